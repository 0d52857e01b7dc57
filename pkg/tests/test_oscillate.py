import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from weakosc.errors import DegenerateFrequencies, NonFiniteSample, ValidationFailure
from weakosc.oscillate import (
    AveragingWindow,
    OscillatingPureState,
    analytic_linear_phase_average,
    averaged_projector,
    dephase,
    fastness,
    fundamental_period,
    min_frequency_gap,
    projector_at,
    state_at,
    time_average,
)

R2 = 1 / math.sqrt(2)


def random_state(rng, dim, gap=1.0):
    levels = gap * np.cumsum(1 + rng.uniform(0, 2, dim))
    return OscillatingPureState.normalized(rng.uniform(0.2, 1, dim), levels, rng.uniform(0, 2 * np.pi, dim))


def test_state_at_origin():
    s = OscillatingPureState([0.6, 0.8], [1.0, 3.0], [0.4, -1.1])
    assert np.allclose(state_at(s, 0.0).amplitudes, [0.6 * np.exp(0.4j), 0.8 * np.exp(-1.1j)], atol=1e-15)


def test_single_term_projector_constant():
    s = OscillatingPureState([1.0], [5.0], [0.3])
    for t in (0.0, 0.7, 123.4):
        assert np.allclose(projector_at(s, t).matrix, [[1.0]])


def test_half_period_flip():
    w = 2.0
    s = OscillatingPureState([R2, R2], [0.0, w], [0.0, 0.0])
    assert np.allclose(state_at(s, math.pi / w).amplitudes, [R2, -R2], atol=1e-15)


def test_equal_amplitude_projector():
    s = OscillatingPureState([R2, R2], [0.0, 1.0], [0.0, 0.0])
    assert np.allclose(projector_at(s, 0.0).matrix, 0.5, atol=1e-15)


def test_projector_off_diagonal_structure(rng):
    s = random_state(rng, 3)
    t = 0.37
    P = projector_at(s, t).matrix
    a, w, p = s.amplitudes, s.frequencies, s.phase_offsets
    for i in range(3):
        for j in range(3):
            want = a[i] * a[j] * np.exp(1j * ((w[j] - w[i]) * t + (p[j] - p[i])))
            assert P[j, i] == pytest.approx(want, abs=1e-14)


@given(st.integers(1, 5), st.integers(0, 2 ** 32 - 1), st.floats(-1e3, 1e3))
def test_projector_trace_and_purity(dim, seed, t):
    s = random_state(np.random.default_rng(seed), dim)
    rho = projector_at(s, t)
    assert np.trace(rho.matrix).real == pytest.approx(1.0, abs=1e-12)
    assert rho.purity() == pytest.approx(1.0, abs=1e-12)


def test_dephase_examples():
    assert np.allclose(dephase(OscillatingPureState([R2, R2], [0, 1], [0, 0])).matrix, np.diag([0.5, 0.5]))
    s = OscillatingPureState([math.sqrt(0.9), math.sqrt(0.1)], [0, 1], [0, 0])
    assert np.allclose(dephase(s).matrix, np.diag([0.9, 0.1]), atol=1e-15)
    with pytest.raises(DegenerateFrequencies):
        dephase(OscillatingPureState([R2, R2], [2.0, 2.0], [0, 0]))


@given(st.integers(0, 2 ** 32 - 1))
def test_dephase_ignores_phase_offsets(seed):
    rng = np.random.default_rng(seed)
    s = random_state(rng, 4)
    s2 = OscillatingPureState(s.amplitudes, s.frequencies, rng.uniform(-10, 10, 4))
    assert np.array_equal(dephase(s).matrix, dephase(s2).matrix)


def test_time_average_examples():
    w = AveragingWindow(0.3, 2.0, 64)
    assert time_average(lambda t: 2.5, w) == pytest.approx(2.5, abs=1e-15)
    one = AveragingWindow(0.0, 2 * math.pi / 3.0, 64)
    assert abs(time_average(lambda t: np.exp(3j * t), one, period=one.duration)) <= 1e-12
    full = AveragingWindow(0.0, 2 * math.pi, 4096)
    val = time_average(lambda t: 1 / (1.25 + math.cos(t)), full, period=2 * math.pi)
    assert val.real == pytest.approx(4 / 3, abs=1e-12)


def test_time_average_non_finite():
    with pytest.raises(NonFiniteSample):
        time_average(lambda t: 1 / (t - 0.5) if t != 0.5 else math.inf, AveragingWindow(0.0, 1.0, 3))


def test_window_validation():
    with pytest.raises(ValidationFailure):
        AveragingWindow(0.0, 0.0)
    with pytest.raises(ValidationFailure):
        AveragingWindow(0.0, 1.0, 1)


def test_linear_phase_examples():
    w = AveragingWindow(0.0, 3.0)
    assert analytic_linear_phase_average(0.0, w) == 1
    assert abs(analytic_linear_phase_average(2 * math.pi * 5 / 3.0, w)) <= 1e-15


@given(st.floats(0.1, 50), st.floats(0.05, 20), st.floats(-5, 5))
def test_linear_phase_bound_and_quadrature(dw, duration, start):
    w = AveragingWindow(start, duration)
    exact = analytic_linear_phase_average(dw, w)
    assert abs(exact) <= 2 / (dw * duration) + 1e-15
    cycles = dw * duration / (2 * math.pi)
    nodes = max(65, int(64 * math.ceil(cycles)) * 8 + 1)
    quad = time_average(lambda t: np.exp(1j * dw * t), AveragingWindow(start, duration, nodes))
    assert abs(quad - exact) <= 1e-4 * max(1, 1 / nodes)


def test_time_average_matches_analytic_periodic():
    dw = 7.0
    w = AveragingWindow(0.2, 3 * 2 * math.pi / dw, 3 * 64)
    quad = time_average(lambda t: np.exp(1j * dw * t), w, period=2 * math.pi / dw)
    assert abs(quad - analytic_linear_phase_average(dw, w)) <= 1e-10


@given(st.integers(0, 2 ** 32 - 1), st.sampled_from([10.0, 100.0, 1000.0]))
def test_dephasing_limit(seed, cycles):
    s = random_state(np.random.default_rng(seed), 3)
    gap = min_frequency_gap(s)
    w = AveragingWindow(0.1, 2 * math.pi * cycles / gap, 256)
    dev = np.max(np.abs(averaged_projector(s, w) - dephase(s).matrix))
    assert dev <= 2 / (gap * w.duration) + 1e-14


def test_averaged_projector_matches_quadrature(rng):
    s = OscillatingPureState.normalized([1, 0.7, 0.4], [0, 2, 5], [0, 1, 2])
    w = AveragingWindow(0.3, 2 * math.pi, 128)
    quad = time_average(lambda t: projector_at(s, t).matrix, w, period=fundamental_period(s))
    assert np.max(np.abs(quad - averaged_projector(s, w))) <= 1e-13


def test_fastness_examples():
    s = OscillatingPureState([R2, R2], [0.0, 3.0], [0, 0])
    assert fastness(s, AveragingWindow(0, 2 * math.pi * 1e4 / 3.0)).is_fast
    assert not fastness(s, AveragingWindow(0, 2 * math.pi * 10 / 3.0)).is_fast
    single = fastness(OscillatingPureState([1.0], [1.0], [0.0]), AveragingWindow(0, 1))
    assert single.min_gap == math.inf and single.is_fast


def test_normalized_moves_sign_into_phase():
    s = OscillatingPureState.normalized([1, -1], [0, 1])
    assert np.allclose(state_at(s, 0).amplitudes, [R2, -R2])
