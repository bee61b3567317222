import numpy as np
import pytest
from scipy import stats

from hiergames import RandomStream


def test_same_label_replays_identical_sequence():
    root = RandomStream(42)
    a = root.derive(0).uniform(0, 1, 1000)
    b = root.derive(0).uniform(0, 1, 1000)
    assert np.array_equal(a, b)


def test_distinct_labels_differ():
    root = RandomStream(42)
    a = root.derive(0).uniform(0, 1, 10)
    b = root.derive(1).uniform(0, 1, 10)
    assert not np.any(a == b)


def test_derivation_order_matters():
    root = RandomStream(42)
    a = root.derive(1).derive(2).uniform(0, 1, 100)
    b = root.derive(2).derive(1).uniform(0, 1, 100)
    assert not np.array_equal(a, b)


def test_derive_ignores_parent_consumption():
    root = RandomStream(42)
    fresh = root.derive(3).uniform(0, 1, 50)
    root.uniform(0, 1, 999)  # consume the parent
    again = root.derive(3).uniform(0, 1, 50)
    assert np.array_equal(fresh, again)


def test_clone_replays_future_draws():
    s = RandomStream(42).derive(5)
    s.uniform(0, 1, 17)
    c = s.clone()
    assert np.array_equal(c.uniform(0, 1, 64), s.uniform(0, 1, 64))


def test_string_labels_are_stable():
    a = RandomStream(1).derive("solve").uniform(0, 1, 5)
    b = RandomStream(1).derive("solve").uniform(0, 1, 5)
    c = RandomStream(1).derive("eval").uniform(0, 1, 5)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_uniform_rejects_bad_bounds(stream):
    with pytest.raises(ValueError, match="out of order"):
        stream.uniform(2.0, 1.0)


def test_uniform_degenerate_interval(stream):
    assert stream.uniform(5.0, 5.0) == 5.0


def test_uniform_mean_matches_midpoint():
    draws = RandomStream(7).derive("u").uniform(33.0, 37.0, 10**6)
    assert abs(draws.mean() - 35.0) < 0.01
    assert draws.min() >= 33.0 and draws.max() < 37.0


def test_uniform_symmetric_interval(stream):
    draws = stream.uniform(-1.0, 1.0, 10_000)
    assert draws.min() >= -1.0 and draws.max() < 1.0


def test_unit_sphere_dim_one_is_sign(stream):
    vals = np.array([stream.unit_sphere(1)[0] for _ in range(50)])
    assert set(np.unique(vals)) <= {-1.0, 1.0}


def test_unit_sphere_norm(stream):
    for _ in range(100):
        v = stream.unit_sphere(3)
        assert abs(np.linalg.norm(v) - 1.0) <= 1e-12


def test_unit_sphere_rejects_dim_zero(stream):
    with pytest.raises(ValueError):
        stream.unit_sphere(0)


def test_unit_sphere_mean_shrinks():
    draws = RandomStream(3).derive("s").unit_sphere_batch(5, 10**5)
    assert np.linalg.norm(draws.mean(axis=0)) <= 0.02


def test_unit_sphere_mean_rate():
    # Componentwise means shrink like 1 / sqrt(K).
    s = RandomStream(9).derive("rate")
    for count in (100, 10_000, 1_000_000):
        mean = s.unit_sphere_batch(4, count).mean(axis=0)
        assert np.linalg.norm(mean) <= 4.0 / np.sqrt(count)


def test_unit_ball_inside(stream):
    draws = stream.unit_ball_batch(3, 2000)
    assert np.all(np.linalg.norm(draws, axis=1) <= 1.0 + 1e-12)


def test_sibling_streams_pass_chi2_independence():
    root = RandomStream(2718)
    u = root.derive(0).uniform(0, 1, 10**5)
    v = root.derive(1).uniform(0, 1, 10**5)
    table, _, _ = np.histogram2d(u, v, bins=10, range=[[0, 1], [0, 1]])
    _, p_value, _, _ = stats.chi2_contingency(table)
    assert p_value > 1e-6


def test_choice_index_distribution(stream):
    probs = np.array([0.5, 0.3, 0.2])
    draws = np.array([stream.choice_index(probs) for _ in range(6000)])
    freq = np.bincount(draws, minlength=3) / draws.size
    assert np.all(np.abs(freq - probs) < 0.03)
