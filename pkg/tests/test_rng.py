import numpy as np

from weakosc.rng import counter_bits, counter_uniform


def test_counter_streams_are_pointwise():
    full = counter_uniform(7, np.arange(1000, dtype=np.uint64), 2)
    part = counter_uniform(7, np.arange(500, 1000, dtype=np.uint64), 2)
    assert np.array_equal(full[500:], part)


def test_uniform_range_and_moments():
    u = counter_uniform(1, np.arange(200000, dtype=np.uint64), 0)
    assert u.min() >= 0 and u.max() < 1
    assert abs(u.mean() - 0.5) < 0.005
    assert abs(u.var() - 1 / 12) < 0.002


def test_streams_and_seeds_differ():
    idx = np.arange(10000, dtype=np.uint64)
    a, b, c = counter_uniform(1, idx, 0), counter_uniform(1, idx, 1), counter_uniform(2, idx, 0)
    assert abs(np.corrcoef(a, b)[0, 1]) < 0.05
    assert abs(np.corrcoef(a, c)[0, 1]) < 0.05
    assert counter_bits(1, idx, 0).dtype == np.uint64
