import math

import numpy as np
import pytest

from weakosc.errors import GridOverflow, NoSurvivors, ValidationFailure
from weakosc.oscillate import AveragingWindow, OscillatingPureState
from weakosc.pointerlab import (
    Estimator,
    PointerModel,
    estimate_weak_value,
    monte_carlo,
    postselect,
    readout,
    translate,
    weak_couple,
)
from weakosc.qcore import PureState, make_observable, pure_state
from weakosc.weakval import SPIN, TwoStateConfig, weak_value_pure

UP, DOWN = pure_state([1, 0]), pure_state([0, 1])


def test_model_validation():
    with pytest.raises(ValidationFailure):
        PointerModel(M=64)
    with pytest.raises(ValidationFailure):
        PointerModel(L=5.0, sigma=1.0)


def test_eigenstate_shift():
    pm = PointerModel(g=0.3)
    j = weak_couple(UP, SPIN, pm)
    x, p = readout(j.amplitudes[0], pm)
    assert x == pytest.approx(0.3, abs=1e-12) and abs(p) <= 1e-12


def test_zero_coupling_unchanged():
    pm = PointerModel(g=0.0)
    s = pure_state([1, 2j])
    j = weak_couple(s, SPIN, pm)
    assert np.allclose(j.amplitudes, np.outer(s.amplitudes, pm.initial()), atol=1e-14)


def test_bimodal_vs_single_peak():
    s = pure_state([1, 1])

    def peaks(g):
        pm = PointerModel(M=512, L=32.0, g=g)
        dens = np.sum(np.abs(weak_couple(s, SPIN, pm).amplitudes) ** 2, axis=0)
        interior = (dens[1:-1] > dens[:-2]) & (dens[1:-1] > dens[2:]) & (dens[1:-1] > 1e-3 * dens.max())
        return int(interior.sum())

    assert peaks(5.0) == 2
    assert peaks(0.1) == 1


def test_joint_norm_preserved(rng):
    for g in (0.01, 0.5, 2.0):
        pm = PointerModel(g=g)
        h = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
        o = make_observable((h + h.conj().T) / 2)
        s = pure_state(rng.standard_normal(3) + 1j * rng.standard_normal(3))
        assert weak_couple(s, o, pm).norm() == pytest.approx(1.0, abs=1e-10)


def test_grid_overflow():
    with pytest.raises(GridOverflow):
        weak_couple(UP, SPIN, PointerModel(g=10.0))


def test_postselect_examples():
    pm = PointerModel(g=0.0)
    with pytest.raises(NoSurvivors):
        postselect(weak_couple(UP, SPIN, pm), DOWN)
    chi, prob = postselect(weak_couple(UP, SPIN, pm), UP)
    assert prob == pytest.approx(1.0, abs=1e-12)
    assert np.allclose(chi, pm.initial(), atol=1e-12)
    cfg = TwoStateConfig(1.0, 1.0)
    pre = cfg.pre_state(math.pi / 2)
    _, prob = postselect(weak_couple(pre, SPIN, PointerModel(g=1e-3)), cfg.post_state())
    assert prob == pytest.approx(abs(np.vdot(cfg.post_state().amplitudes, pre.amplitudes)) ** 2, rel=1e-5)


def test_readout_examples():
    pm = PointerModel()
    phi = pm.initial()
    x, p = readout(phi, pm)
    assert abs(x) <= 1e-12 and abs(p) <= 1e-12
    x, p = readout(translate(phi, 0.7, pm), pm)
    assert x == pytest.approx(0.7, abs=1e-10) and abs(p) <= 1e-10
    k = pm.p[3]
    x, p = readout(phi * np.exp(1j * k * pm.x), pm)
    assert abs(x) <= 1e-10 and p == pytest.approx(k, abs=1e-10)


def test_estimate_minus_i():
    cfg = TwoStateConfig(1.0, 1.0)
    pre, post = cfg.pre_state(math.pi / 2), cfg.post_state()
    assert weak_value_pure(pre, SPIN, post).value == pytest.approx(-1j)
    est = estimate_weak_value(pre, SPIN, post, PointerModel(g=0.01))
    assert abs(est.value - (-1j)) <= 0.01


def test_estimate_plus_i():
    cfg = TwoStateConfig(1.0, 1.0)
    pre, post = cfg.pre_state(-math.pi / 2), cfg.post_state()
    assert weak_value_pure(pre, SPIN, post).value == pytest.approx(1j)
    assert abs(estimate_weak_value(pre, SPIN, post, PointerModel(g=0.01)).value - 1j) <= 0.01


def _mc(trials, estimator, seed=5, workers=1, g=0.1):
    cfg = TwoStateConfig(0.5, 1.0)
    return monte_carlo(cfg.oscillating_state(), SPIN, cfg.post_state(), PointerModel(g=g),
                       AveragingWindow(0.0, cfg.period()), trials, seed, estimator, workers=workers)


def test_mc_deterministic_and_worker_independent():
    a = _mc(70000, Estimator.POOLED)
    b = _mc(70000, Estimator.POOLED, workers=3)
    assert a == b


def test_mc_stderr_scaling():
    small = _mc(100000, Estimator.POOLED, seed=1)
    big = _mc(200000, Estimator.POOLED, seed=2)
    assert small.stderr_re / big.stderr_re == pytest.approx(math.sqrt(2), rel=0.15)
    assert small.stderr_im / big.stderr_im == pytest.approx(math.sqrt(2), rel=0.15)


def test_mc_estimators_split():
    pooled = _mc(300000, Estimator.POOLED)
    binned = _mc(300000, Estimator.TIME_BINNED)
    assert abs(pooled.value.real - 0.6) <= 3 * pooled.stderr_re + 0.02
    assert abs(binned.value.real - 1.0) <= 3 * binned.stderr_re + 0.05


def test_mc_coarse_bins_flagged():
    cfg = TwoStateConfig(0.5, 1.0)
    with pytest.warns(RuntimeWarning):
        est = monte_carlo(cfg.oscillating_state(), SPIN, cfg.post_state(), PointerModel(g=0.1),
                          AveragingWindow(0.0, 20 * cfg.period()), 50000, 1, Estimator.TIME_BINNED, n_bins=8)
    assert "BinTooCoarse" in est.notes


def test_mc_no_survivors():
    up = OscillatingPureState([1.0, 0.0], [0.0, 1.0], [0.0, 0.0])
    post = PureState(np.array([0.0, 1.0 + 0j]))
    with pytest.raises(NoSurvivors):
        monte_carlo(up, SPIN, post, PointerModel(g=1e-9), AveragingWindow(0, 1.0), 1000, 1)
