"""Strong, non-post-selected statistics of oscillating states versus their dephased mixtures.

All four quantities are window means. For linear phases the mean of the
projector is known in closed form (``averaged_projector``) and that is the
default route; ``method="quadrature"`` integrates the instantaneous quantity
numerically instead and is what the tests use as an oracle.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DimensionMismatch
from .oscillate import (
    AveragingWindow,
    OscillatingPureState,
    averaged_projector,
    dephase,
    fundamental_period,
    min_frequency_gap,
    time_average,
)
from .qcore import Observable, PureState, expectation, make_observable

DEFAULT_RESOLUTION = 1e-3
QUADRATURE_TOL = 1e-9


class Quantity(str, enum.Enum):
    EXPECTATION = "Expectation"
    TRANSITION = "Transition"
    CORRELATOR_C1 = "CorrelatorC1"
    PRODUCT_OF_MEANS_C2 = "ProductOfMeansC2"


@dataclass(frozen=True)
class EquivalenceReport:
    quantity: Quantity
    oscillating_value: complex
    mixed_value: complex
    deviation: float
    bound: float
    passed: bool
    trial: int = 0


def _check_dim(s: OscillatingPureState, n: int) -> None:
    if s.dim != n:
        raise DimensionMismatch(f"state has dimension {s.dim}, operator has {n}")


def _window_trace(s: OscillatingPureState, op: np.ndarray, window: AveragingWindow, method: str) -> complex:
    """Window mean of Tr[Pi(t) op]."""
    if method == "analytic":
        return complex(np.sum(averaged_projector(s, window) * op.T))

    def f(times):
        v = s.vectors(times)
        return np.einsum("ti,ij,tj->t", v.conj(), op, v)

    return time_average(f, window, period=fundamental_period(s), vectorized=True)


def averaged_expectation(s: OscillatingPureState, obs: Observable, window: AveragingWindow, method: str = "analytic") -> float:
    _check_dim(s, obs.dim)
    return float(_window_trace(s, obs.matrix, window, method).real)


def averaged_transition(s: OscillatingPureState, target: PureState, window: AveragingWindow, method: str = "analytic") -> float:
    _check_dim(s, target.dim)
    return float(_window_trace(s, target.projector(), window, method).real)


def correlator_C1(s: OscillatingPureState, product, window: AveragingWindow, method: str = "analytic") -> complex:
    """Window mean of <psi(t)| O(tau_1)...O(tau_N) |psi(t)> for a caller-supplied operator chain."""
    op = np.asarray(product, dtype=complex)
    if op.ndim != 2 or op.shape != (s.dim, s.dim):
        raise DimensionMismatch(f"operator chain has shape {op.shape}, state dimension is {s.dim}")
    return _window_trace(s, op, window, method)


def product_of_means_C2(
    s: OscillatingPureState,
    obs: Observable,
    offsets: Sequence[float],
    window: AveragingWindow,
    method: str = "analytic",
) -> float:
    """Product of per-factor window means, factor i jittered over the window shifted by tau_i."""
    _check_dim(s, obs.dim)
    out = 1.0
    for tau in offsets:
        out *= averaged_expectation(s, obs, window.shifted(tau), method)
    return out


def _coherence_bound(s: OscillatingPureState, window: AveragingWindow, op: np.ndarray) -> float:
    pairs = len(s.coherence_pairs())
    if pairs == 0:
        return 0.0
    gap = min_frequency_gap(s)
    return 2.0 * pairs * float(np.max(np.abs(op))) / (gap * window.duration)


def random_hermitian(rng: np.random.Generator, dim: int) -> np.ndarray:
    g = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / math.sqrt(2)
    return (g + g.conj().T) / 2


def random_pure(rng: np.random.Generator, dim: int) -> PureState:
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return PureState(v / np.linalg.norm(v))


def random_oscillating_state(rng: np.random.Generator, dim: int, base_gap: float = 1e3) -> OscillatingPureState:
    """Random amplitudes and phases; level spacings are base_gap * U(1, 5) * (1 + U(0, 3)), levels shuffled."""
    amps = rng.uniform(0.2, 1.0, dim)
    scale = base_gap * rng.uniform(1.0, 5.0)
    levels = np.concatenate([[0.0], np.cumsum(scale * (1.0 + rng.uniform(0.0, 3.0, dim - 1)))])
    rng.shuffle(levels)
    return OscillatingPureState.normalized(amps, levels, rng.uniform(0.0, 2 * np.pi, dim))


def _report(q, trial, osc, mixed, bound, resolution) -> EquivalenceReport:
    dev = abs(osc - mixed)
    ok = dev <= min(bound, resolution) + QUADRATURE_TOL
    return EquivalenceReport(q, osc, mixed, float(dev), float(bound), bool(ok), trial)


def equivalence_trial(
    s: OscillatingPureState,
    window: AveragingWindow,
    rng: np.random.Generator,
    trial: int = 0,
    resolution: float = DEFAULT_RESOLUTION,
    n_factors: int = 2,
) -> list[EquivalenceReport]:
    d = s.dim
    rho = dephase(s)
    obs = make_observable(random_hermitian(rng, d))
    target = random_pure(rng, d)
    chain = random_hermitian(rng, d) @ random_hermitian(rng, d)
    offsets = rng.uniform(0.0, window.duration, size=n_factors)

    reports = []
    m = expectation(rho, obs)
    reports.append(_report(Quantity.EXPECTATION, trial, averaged_expectation(s, obs, window), m,
                           _coherence_bound(s, window, obs.matrix), resolution))

    proj = target.projector()
    reports.append(_report(Quantity.TRANSITION, trial, averaged_transition(s, target, window),
                           float(np.real(np.trace(rho.matrix @ proj))),
                           _coherence_bound(s, window, proj), resolution))

    reports.append(_report(Quantity.CORRELATOR_C1, trial, correlator_C1(s, chain, window),
                           complex(np.trace(rho.matrix @ chain)),
                           _coherence_bound(s, window, chain), resolution))

    scale = float(np.max(np.abs(np.linalg.eigvalsh(obs.matrix))))
    c2_bound = n_factors * scale ** (n_factors - 1) * _coherence_bound(s, window, obs.matrix)
    reports.append(_report(Quantity.PRODUCT_OF_MEANS_C2, trial, product_of_means_C2(s, obs, offsets, window),
                           m ** n_factors, c2_bound, resolution))
    return reports


def equivalence_suite(
    s: OscillatingPureState,
    trials: int,
    window: AveragingWindow,
    seed: int,
    resolution: float = DEFAULT_RESOLUTION,
) -> list[EquivalenceReport]:
    """Random observables, targets and operator chains, all four quantities per trial.

    A report passes when the deviation is below both the predicted coherence
    bound and ``resolution``; the latter makes slow windows fail even though
    their (large) predicted bound would be respected.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    out: list[EquivalenceReport] = []
    for k, child in enumerate(np.random.SeedSequence(seed).spawn(trials)):
        out.extend(equivalence_trial(s, window, np.random.default_rng(child), k, resolution))
    return out
