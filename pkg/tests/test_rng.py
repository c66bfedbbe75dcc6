import numpy as np
import pytest

from leadopt.rng import Rng


def test_same_seed_same_stream():
    a = Rng(42).standard_normal(100)
    b = Rng(42).standard_normal(100)
    assert np.array_equal(a, b)


def test_different_seeds_differ():
    a = Rng(1).standard_normal(100)
    b = Rng(2).standard_normal(100)
    assert not np.array_equal(a, b)


def test_child_streams_independent_of_draw_order():
    root = Rng(7)
    c0 = root.child(0)
    c1 = root.child(1)
    first = c1.standard_normal(10)
    # drawing from c0 must not perturb c1's future output
    c0.standard_normal(1000)
    again = Rng(7).child(1)
    again.standard_normal(10)  # consume the same prefix
    root2 = Rng(7)
    fresh = root2.child(1).standard_normal(10)
    assert np.array_equal(first, fresh)


def test_nested_paths_distinct():
    streams = {
        (): Rng(3).standard_normal(5).tobytes(),
        (0,): Rng(3, (0,)).standard_normal(5).tobytes(),
        (1,): Rng(3, (1,)).standard_normal(5).tobytes(),
        (0, 0): Rng(3).child(0).child(0).standard_normal(5).tobytes(),
        (0, 1): Rng(3).child(0, 1).standard_normal(5).tobytes(),
    }
    assert len(set(streams.values())) == len(streams)


def test_child_path_equals_constructor_path():
    via_child = Rng(9).child(4).child(2).standard_normal(8)
    direct = Rng(9, (4, 2)).standard_normal(8)
    assert np.array_equal(via_child, direct)


def test_choice_weighted_respects_zero_weight():
    rng = Rng(0)
    draws = [rng.choice_weighted(3, [1.0, 0.0, 1.0]) for _ in range(200)]
    assert 1 not in draws
    assert set(draws) <= {0, 2}


def test_choice_weighted_distribution():
    rng = Rng(5)
    draws = np.array([rng.choice_weighted(2, [3.0, 1.0]) for _ in range(4000)])
    frac = np.mean(draws == 0)
    assert abs(frac - 0.75) < 0.03  # ~4 sigma for n=4000


def test_uniform_and_integers_in_range():
    rng = Rng(11)
    u = rng.uniform(size=1000)
    assert np.all((0.0 <= u) & (u < 1.0))
    k = rng.integers(10, size=1000)
    assert set(np.unique(k)) <= set(range(10))
