import numpy as np
import pytest

from graphite.splits import SplitSpec, from_names, random_split
from graphite.synthetic import GenerationError, SyntheticParams, generate_synthetic
from graphite.transform import check_assumptions


def test_defaults_pass_the_gate():
    g = generate_synthetic()
    assert g.num_nodes == 500 and g.num_classes == 2 and g.num_features == 50
    assert check_assumptions(g) == []


def test_generation_is_seeded():
    assert generate_synthetic(num_nodes=50, seed=3) == generate_synthetic(num_nodes=50, seed=3)
    assert generate_synthetic(num_nodes=50, seed=3) != generate_synthetic(num_nodes=50, seed=4)


def test_features_come_mostly_from_own_pool():
    g = generate_synthetic(num_nodes=300, feature_noise=0.0, seed=1)
    pool = g.num_features // g.num_classes
    for v in range(g.num_nodes):
        assert (g.feature_row(v) // pool == g.labels[v]).all()


def test_homophilic_wiring_fails_the_gate():
    with pytest.raises(GenerationError, match="after 5 attempts"):
        generate_synthetic(
            num_nodes=20, num_features=2, features_per_node=1, p_cross=0.0,
            feature_noise=0.0, avg_degree=2.0, max_attempts=5,
        )


@pytest.mark.parametrize(
    "kwargs",
    [dict(num_nodes=1), dict(p_cross=1.5), dict(features_per_node=40), dict(avg_degree=-1.0)],
)
def test_invalid_params(kwargs):
    with pytest.raises(ValueError):
        SyntheticParams(**kwargs)


def test_random_split_ratios_and_disjointness():
    labels = np.array([0, 1] * 50 + [-1] * 10)
    s = random_split(labels, seed=0)
    assert (s.train.size, s.val.size, s.test.size) == (48, 32, 20)
    assert not set(s.train) & set(s.val) and not set(s.val) & set(s.test)
    assert (labels[np.concatenate([s.train, s.val, s.test])] >= 0).all()
    assert random_split(labels, seed=0) == s


def test_split_validation():
    with pytest.raises(ValueError):
        random_split([0, 1], ratios=(0.8, 0.3, 0.1))
    with pytest.raises(ValueError, match="unlabeled"):
        from_names(["train", "none"]).validate([-1, 0])
    assert isinstance(from_names(["train", "test"]), SplitSpec)
