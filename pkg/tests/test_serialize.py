import struct

import numpy as np
import pytest

from graphite.gnn import GnnConfig, ModelParams
from graphite.gnn.serialize import MAGIC, ModelFormatError, dumps, load, loads, save


def _params(config=None):
    config = config or GnnConfig(hidden_dim=3, num_layers=2, w_x=0.1, tau=0.01)
    return ModelParams.init(5, 4, config, np.random.default_rng(0)), config


def test_round_trip_is_exact(tmp_path):
    params, config = _params()
    path = tmp_path / "m.bin"
    save(path, params, config, {"transform": "graphite"})
    p2, c2, meta = load(path)
    assert c2 == config
    assert meta == {"transform": "graphite"}
    assert p2.names() == params.names()
    for name in params.names():
        np.testing.assert_array_equal(p2[name], params[name])
    assert dumps(p2, c2, meta) == path.read_bytes()


def test_header_layout():
    params, config = _params()
    blob = dumps(params, config)
    assert blob[:8] == MAGIC
    version, echo_len = struct.unpack_from("<II", blob, 8)
    assert version == 1
    echo = blob[16 : 16 + echo_len].decode("utf-8")
    assert "hidden_dim = 3" in echo and "tau = 0.01" in echo
    (count,) = struct.unpack_from("<I", blob, 16 + echo_len)
    assert count == len(params.names())
    # first tensor: in_weight, 2-D, shape (5, 3), little-endian doubles
    pos = 20 + echo_len
    assert struct.unpack_from("<I", blob, pos) == (2,)
    assert struct.unpack_from("<2Q", blob, pos + 4) == (5, 3)
    first = struct.unpack_from("<d", blob, pos + 20)[0]
    assert first == params["in_weight"][0, 0]


def test_scalar_tensor_has_zero_dims():
    params, config = _params(GnnConfig(hidden_dim=2, num_layers=1))
    p2, _, _ = loads(dumps(params, config))
    assert p2["gate_b.0"].shape == ()


def test_bad_magic_and_truncation():
    params, config = _params()
    blob = dumps(params, config)
    with pytest.raises(ModelFormatError, match="magic"):
        loads(b"NOTAMODEL" + blob[9:])
    with pytest.raises((ModelFormatError, ValueError, struct.error)):
        loads(blob[:-8])
    with pytest.raises(ModelFormatError, match="trailing"):
        loads(blob + b"\0")


def test_unsupported_version():
    params, config = _params()
    blob = bytearray(dumps(params, config))
    blob[8:12] = struct.pack("<I", 99)
    with pytest.raises(ModelFormatError, match="version 99"):
        loads(bytes(blob))


def test_multiline_metadata_rejected():
    params, config = _params()
    with pytest.raises(ValueError):
        dumps(params, config, {"note": "a\nb"})
