import math

import numpy as np
import pytest

from mondrianforest import RngStream


def test_same_seed_same_draws():
    a = RngStream(123)
    b = RngStream(123)
    assert [a.uniform() for _ in range(50)] == [b.uniform() for _ in range(50)]


def test_child_streams_are_pure():
    # deriving child m must not depend on what else was derived or drawn
    a = RngStream(9)
    a.uniform()
    a.child(0).uniform()
    fresh = RngStream(9).child(3)
    used = a.child(3)
    assert [used.uniform() for _ in range(10)] == [fresh.uniform() for _ in range(10)]


def test_children_differ_from_parent_and_each_other():
    root = RngStream(5)
    seqs = [tuple(RngStream(5, (i,)).uniform() for _ in range(8)) for i in range(4)]
    assert len(set(seqs)) == 4
    assert tuple(root.uniform() for _ in range(8)) not in seqs


def test_counter_tracks_scalar_draws():
    s = RngStream(1)
    s.uniform()
    s.exponential(2.0)
    s.categorical([1.0, 3.0])
    assert s.counter == 3


def test_exponential_inverse_cdf_matches_uniform_stream():
    # one uniform consumed, value is -log1p(-u) / rate
    u = RngStream(77).uniform()
    e = RngStream(77).exponential(3.0)
    assert e == -math.log1p(-u) / 3.0


def test_exponential_zero_rate_is_inf():
    s = RngStream(2)
    assert s.exponential(0.0) == math.inf
    assert s.counter == 0


def test_exponential_negative_rate_rejected():
    with pytest.raises(ValueError):
        RngStream(2).exponential(-1.0)


def test_exponential_moments():
    s = RngStream(42)
    draws = np.array([s.exponential(2.0) for _ in range(20000)])
    assert np.all(draws > 0)
    assert abs(draws.mean() - 0.5) < 4 * draws.std(ddof=1) / math.sqrt(draws.size)


def test_categorical_frequencies():
    s = RngStream(11)
    draws = np.array([s.categorical([1.0, 3.0]) for _ in range(20000)])
    freq = draws.mean()
    assert abs(freq - 0.75) < 4 * math.sqrt(0.75 * 0.25 / draws.size)


def test_categorical_never_picks_zero_weight():
    s = RngStream(13)
    draws = {s.categorical([0.0, 1.0, 0.0]) for _ in range(200)}
    assert draws == {1}


def test_categorical_rejects_bad_weights():
    with pytest.raises(ValueError):
        RngStream(1).categorical([0.0, 0.0])
    with pytest.raises(ValueError):
        RngStream(1).categorical([-1.0, 2.0])


def test_seed_validation():
    with pytest.raises(ValueError):
        RngStream(-1)
    with pytest.raises(ValueError):
        RngStream(2**64)
