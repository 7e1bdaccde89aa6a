"""Versioned binary container for trained model parameters.

Layout (all integers little-endian)::

    magic      8 bytes   b"GRAPHITE"
    version    u32
    echo_len   u32
    echo       echo_len bytes of UTF-8 ``key = value`` lines (config + metadata)
    count      u32       number of tensors, in declaration order
    per tensor:
        ndim   u32
        shape  ndim x u64
        data   prod(shape) x f64 (little-endian, C order)
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .model import GnnConfig, ModelParams

MAGIC = b"GRAPHITE"
VERSION = 1


class ModelFormatError(ValueError):
    pass


def dumps(params: ModelParams, config: GnnConfig, metadata: dict | None = None) -> bytes:
    echo = config.to_text()
    for key, value in (metadata or {}).items():
        if "\n" in str(value) or "=" in key:
            raise ValueError(f"metadata entry {key!r} cannot be written on one line")
        echo += f"{key} = {value}\n"
    raw = echo.encode("utf-8")
    out = [MAGIC, struct.pack("<II", VERSION, len(raw)), raw, struct.pack("<I", len(params.arrays))]
    for arr in params.arrays.values():
        out.append(struct.pack("<I", arr.ndim))
        out.append(struct.pack(f"<{arr.ndim}Q", *arr.shape))
        out.append(np.ascontiguousarray(arr, dtype="<f8").tobytes())
    return b"".join(out)


def loads(blob: bytes) -> tuple[ModelParams, GnnConfig, dict]:
    """Inverse of :func:`dumps`; returns ``(params, config, metadata)``."""
    if blob[:8] != MAGIC:
        raise ModelFormatError("not a model file (bad magic)")
    pos = 8
    version, echo_len = struct.unpack_from("<II", blob, pos)
    pos += 8
    if version != VERSION:
        raise ModelFormatError(f"unsupported model version {version}")
    echo = blob[pos : pos + echo_len].decode("utf-8")
    pos += echo_len
    config_fields = set(GnnConfig.__dataclass_fields__)
    config_lines, metadata = [], {}
    for line in echo.splitlines():
        key, _, value = line.partition("=")
        if key.strip() in config_fields:
            config_lines.append(line)
        else:
            metadata[key.strip()] = value.strip()
    config = GnnConfig.from_text("\n".join(config_lines))
    (count,) = struct.unpack_from("<I", blob, pos)
    pos += 4
    tensors = []
    for _ in range(count):
        (ndim,) = struct.unpack_from("<I", blob, pos)
        pos += 4
        shape = struct.unpack_from(f"<{ndim}Q", blob, pos)
        pos += 8 * ndim
        size = int(np.prod(shape, dtype=np.int64))
        data = np.frombuffer(blob, dtype="<f8", count=size, offset=pos).reshape(shape)
        pos += 8 * size
        tensors.append(data.astype(np.float64))
    if pos != len(blob):
        raise ModelFormatError("trailing bytes after the last tensor")
    if count < 4:
        raise ModelFormatError("model file holds too few tensors")
    num_features, num_classes = tensors[0].shape[0], tensors[-1].shape[0]
    names = [n for n, _ in ModelParams.layout(num_features, num_classes, config)]
    if len(names) != count:
        raise ModelFormatError("tensor count does not match the echoed configuration")
    params = ModelParams(dict(zip(names, tensors)))
    params.check_shapes(num_features, num_classes, config)
    return params, config, metadata


def save(path, params: ModelParams, config: GnnConfig, metadata: dict | None = None) -> None:
    Path(path).write_bytes(dumps(params, config, metadata))


def load(path) -> tuple[ModelParams, GnnConfig, dict]:
    return loads(Path(path).read_bytes())
