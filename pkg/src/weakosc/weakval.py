"""Weak values for pure, mixed and time-averaged pre-selection, and the two-state laws.

Convention: the pre-selected state sits on the bra side,

    O_w = <pre| O |post> / <pre|post> = Tr[Pi_pre O Pi_post] / Tr[Pi_pre Pi_post].

This is the complex conjugate of the more common <post|O|pre>/<post|pre>;
only the sign of the imaginary part differs.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    InsufficientSamples,
    OrthogonalPostselection,
    PoleAtPhase,
    PoleOnPath,
    ValidationFailure,
)
from .oscillate import AveragingWindow, OscillatingPureState, fundamental_period, time_average
from .qcore import DensityOperator, MixtureDecomposition, Observable, PureState, make_density, make_observable

EPS_OVERLAP = 1e-8
VERDICT_TOL = 0.05
POLE_MARGIN = 0.05
DEFAULT_PERIOD_NODES = 2 ** 16
PV_EXCLUSION = 1e-6

SPIN = make_observable(np.diag([1.0, -1.0]))


@dataclass(frozen=True)
class WeakValue:
    value: complex

    @property
    def real(self) -> float:
        return self.value.real

    @property
    def imag(self) -> float:
        return self.value.imag

    def __complex__(self) -> complex:
        return self.value


def _weak(value) -> WeakValue:
    value = complex(value)
    if not (math.isfinite(value.real) and math.isfinite(value.imag)):
        raise OrthogonalPostselection(f"weak value is not finite: {value!r}")
    return WeakValue(value)


def _match(*dims: int) -> None:
    if len(set(dims)) != 1:
        raise DimensionMismatch(f"dimensions differ: {dims}")


def weak_value_pure(pre: PureState, obs: Observable, post: PureState) -> WeakValue:
    _match(pre.dim, obs.dim, post.dim)
    overlap = np.vdot(pre.amplitudes, post.amplitudes)
    if abs(overlap) <= EPS_OVERLAP:
        raise OrthogonalPostselection(f"|<pre|post>| = {abs(overlap):.3e} <= {EPS_OVERLAP:g}")
    return _weak(np.vdot(pre.amplitudes, obs.matrix @ post.amplitudes) / overlap)


def weak_value_projector_form(pre: PureState, obs: Observable, post: PureState) -> WeakValue:
    """Same quantity as :func:`weak_value_pure`, computed from the projectors."""
    _match(pre.dim, obs.dim, post.dim)
    p1, p2 = pre.projector(), post.projector()
    den = np.trace(p1 @ p2)
    if abs(den) <= EPS_OVERLAP ** 2:
        raise OrthogonalPostselection(f"Tr[Pi1 Pi2] = {abs(den):.3e}")
    return _weak(np.trace(p1 @ obs.matrix @ p2) / den)


def weak_value_mixed(pre: DensityOperator, obs: Observable, post: DensityOperator) -> WeakValue:
    _match(pre.dim, obs.dim, post.dim)
    den = np.trace(pre.matrix @ post.matrix)
    if abs(den) <= EPS_OVERLAP ** 2:
        raise OrthogonalPostselection(f"Tr[rho1 rho2] = {abs(den):.3e} <= {EPS_OVERLAP ** 2:g}")
    return _weak(np.trace(pre.matrix @ obs.matrix @ post.matrix) / den)


def weak_value_by_decomposition(pre: MixtureDecomposition, obs: Observable, post: MixtureDecomposition) -> WeakValue:
    """Pair-weighted sum of pure weak values.

    Pair (i, j) is weighted by p_i q_j Tr[Pi_i Pi_j], its share of the
    post-selected ensemble. Orthogonal pairs carry zero weight and are skipped.
    """
    _match(pre.dim, obs.dim, post.dim)
    num = 0.0 + 0.0j
    total = 0.0
    for p, a in zip(pre.weights, pre.components):
        for q, b in zip(post.weights, post.components):
            ov = np.vdot(a.amplitudes, b.amplitudes)
            w = p * q * abs(ov) ** 2
            if w == 0.0 or abs(ov) <= EPS_OVERLAP:
                continue
            total += w
            num += w * weak_value_pure(a, obs, b).value
    if total <= EPS_OVERLAP ** 2:
        raise OrthogonalPostselection(f"total post-selection probability {total:.3e}")
    return _weak(num / total)


def _instantaneous(s: OscillatingPureState, obs: Observable, post: PureState, times: np.ndarray):
    v = s.vectors(times)
    ov = v.conj() @ post.amplitudes
    num = v.conj() @ (obs.matrix @ post.amplitudes)
    return num, ov


def averaged_weak_value(s: OscillatingPureState, obs: Observable, post: PureState, window: AveragingWindow) -> WeakValue:
    """Window mean of the instantaneous pure weak value.

    Uses the periodic rectangle rule when the window spans whole periods of
    the state, trapezoid otherwise. A node with vanishing overlap is an error.
    """
    _match(s.dim, obs.dim, post.dim)

    def f(times):
        num, ov = _instantaneous(s, obs, post, times)
        bad = np.abs(ov) <= EPS_OVERLAP
        if np.any(bad):
            raise PoleOnPath(
                f"overlap {np.abs(ov[bad]).min():.3e} at t = {times[bad][0]!r}; shift the window or change nodes"
            )
        return num / ov

    return _weak(time_average(f, window, period=fundamental_period(s), vectorized=True))


def naive_substitution_weak_value(
    s: OscillatingPureState, obs: Observable, post: PureState, window: AveragingWindow
) -> WeakValue:
    """Ratio of separately window-averaged numerator and denominator."""
    _match(s.dim, obs.dim, post.dim)

    def f(times):
        num, ov = _instantaneous(s, obs, post, times)
        # Tr[Pi1 O Pi2] = <pre|O|post><post|pre>, Tr[Pi1 Pi2] = |<pre|post>|^2
        return np.stack([num * ov.conj(), np.abs(ov) ** 2], axis=1)

    avg = time_average(f, window, period=fundamental_period(s), vectorized=True)
    if abs(avg[1]) <= EPS_OVERLAP ** 2:
        raise OrthogonalPostselection(f"averaged post-selection probability {abs(avg[1]):.3e}")
    return _weak(avg[0] / avg[1])


# ---------------------------------------------------------------- two-state model


@dataclass(frozen=True)
class TwoStateConfig:
    """Pre state ~ |+> + A e^{i phi}|->, post ~ |+> + B e^{i chi}|->, chi - phi = omega t + phi0."""

    A: float
    B: float
    omega: float = 1.0
    phi0: float = 0.0

    def __post_init__(self):
        if not (self.A > 0 and self.B > 0 and math.isfinite(self.A) and math.isfinite(self.B)):
            raise ValidationFailure("A and B must be strictly positive and finite")

    @property
    def AB(self) -> float:
        return self.A * self.B

    def phase(self, t: float) -> float:
        return self.omega * t + self.phi0

    def period(self) -> float:
        return 2 * math.pi / abs(self.omega)

    def pre_state(self, t: float = 0.0) -> PureState:
        # The phase difference is carried entirely by the pre-selected state.
        v = np.array([1.0, self.A * np.exp(-1j * self.phase(t))])
        return PureState(v / np.linalg.norm(v))

    def post_state(self) -> PureState:
        v = np.array([1.0, self.B + 0j])
        return PureState(v / np.linalg.norm(v))

    def oscillating_state(self) -> OscillatingPureState:
        """Pre state as a linear-phase oscillating state matching :meth:`pre_state`."""
        n = math.hypot(1.0, self.A)
        return OscillatingPureState([1 / n, self.A / n], [0.0, -self.omega], [0.0, -self.phi0])

    def mixed_pre(self) -> DensityOperator:
        n2 = 1 / (1 + self.A ** 2)
        return make_density(np.diag([n2, n2 * self.A ** 2]).astype(complex))

    def mixed_post(self) -> DensityOperator:
        n2 = 1 / (1 + self.B ** 2)
        return make_density(np.diag([n2, n2 * self.B ** 2]).astype(complex))


def spin_weak_value_at_phase(ab: float, delta):
    """(1 - AB e^{i delta}) / (1 + AB e^{i delta}); vectorized over delta."""
    z = ab * np.exp(1j * np.asarray(delta, dtype=float))
    return (1 - z) / (1 + z)


def spin_weak_value_real(ab: float, delta):
    d = np.asarray(delta, dtype=float)
    return (1 - ab * ab) / (1 + ab * ab + 2 * ab * np.cos(d))


def spin_weak_value_imag(ab: float, delta):
    d = np.asarray(delta, dtype=float)
    return -2 * ab * np.sin(d) / (1 + ab * ab + 2 * ab * np.cos(d))


def two_state_weak_value(cfg: TwoStateConfig, t: float) -> WeakValue:
    d = cfg.phase(t)
    ab = cfg.AB
    if abs(1 + ab * np.exp(1j * d)) <= EPS_OVERLAP:
        raise PoleAtPhase(f"1 + AB e^(i delta) vanishes at AB = {ab!r}, delta = {d!r}")
    if ab == 1.0:
        # exactly zero real part away from the pole
        return WeakValue(complex(0.0, float(spin_weak_value_imag(ab, d))))
    return WeakValue(complex(spin_weak_value_at_phase(ab, d)))


def sgn_law(ab: float) -> float:
    return float(np.sign(1 - ab * ab))


def rational_law(ab: float) -> float:
    return (1 - ab * ab) / (1 + ab * ab)


def period_average_spin(ab: float, nodes: int = DEFAULT_PERIOD_NODES, pv_exclusion: float = PV_EXCLUSION) -> complex:
    """Mean of the two-state spin weak value over one full period of the phase.

    Periodic rectangle rule on an even number of nodes placed symmetrically
    about delta = pi, none on the pole itself. Mirror nodes are summed in
    pairs, so the odd imaginary part cancels to rounding. For AB = 1 the
    pairs within ``pv_exclusion`` of the pole are dropped (principal value).
    """
    if nodes < 2 or nodes % 2:
        raise ValueError("nodes must be a positive even number")
    half = nodes // 2
    offset = 2 * np.pi * (np.arange(half) + 0.5) / nodes  # distance of the pair from the pole
    above, below = np.pi + offset, np.pi - offset
    re = spin_weak_value_real(ab, above) + spin_weak_value_real(ab, below)
    im = spin_weak_value_imag(ab, above) + spin_weak_value_imag(ab, below)
    if abs(ab - 1.0) <= 1e-12:
        re = np.zeros_like(re)
        im = np.where(offset > pv_exclusion, im, 0.0)
    return complex(np.sum(re) / nodes, np.sum(im) / nodes)


def two_state_averaged(cfg: TwoStateConfig, nodes: int = DEFAULT_PERIOD_NODES, tol: float = 1e-6) -> WeakValue:
    """sgn(1 - A^2 B^2), cross-checked against one-period quadrature."""
    closed = sgn_law(cfg.AB)
    if cfg.AB == 1.0:
        closed = 0.0
    quad = period_average_spin(cfg.AB, nodes)
    if abs(quad - closed) > tol:
        raise ArithmeticError(f"quadrature {quad!r} disagrees with closed form {closed!r} at AB = {cfg.AB!r}")
    return WeakValue(complex(closed, 0.0))


def two_state_mixed(cfg: TwoStateConfig, postselect_mixed: bool = False) -> WeakValue:
    """(1 - A^2 B^2)/(1 + A^2 B^2) from the trace formula on the dephased operators."""
    post = cfg.mixed_post() if postselect_mixed else make_density(cfg.post_state().projector())
    return weak_value_mixed(cfg.mixed_pre(), SPIN, post)


# ---------------------------------------------------------------- discrimination


class VerdictKind(str, enum.Enum):
    OSCILLATING_PURE = "OscillatingPure"
    MIXED = "Mixed"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class Evidence:
    A: float
    B: float
    measured: complex
    sgn_prediction: float
    mixed_prediction: float


@dataclass(frozen=True)
class Verdict:
    kind: VerdictKind
    evidence: tuple = field(default_factory=tuple)
    sgn_residual: float = math.nan
    mixed_residual: float = math.nan


def classify_value(ab: float, measured: complex, verdict_tol: float = VERDICT_TOL) -> VerdictKind:
    """Which law a single measurement is consistent with."""
    m = complex(measured)
    fits_sgn = abs(m - sgn_law(ab)) <= verdict_tol
    fits_mixed = abs(m - rational_law(ab)) <= verdict_tol
    if fits_sgn and not fits_mixed:
        return VerdictKind.OSCILLATING_PURE
    if fits_mixed and not fits_sgn:
        return VerdictKind.MIXED
    return VerdictKind.INCONCLUSIVE


def discriminate(
    samples: Iterable[Sequence],
    verdict_tol: float = VERDICT_TOL,
    pole_margin: float = POLE_MARGIN,
) -> Verdict:
    """Decide between the sgn law and the rational law from (A, B, measured) triples.

    Samples with AB within ``pole_margin`` of 1 are set aside (both laws give 0
    there). At least three remaining samples with distinct AB are required.
    """
    usable = []
    for a, b, measured in samples:
        m = complex(measured.value if isinstance(measured, WeakValue) else measured)
        ab = a * b
        if abs(ab - 1.0) <= pole_margin:
            continue
        usable.append(Evidence(float(a), float(b), m, sgn_law(ab), rational_law(ab)))
    distinct = {round(e.A * e.B, 12) for e in usable}
    if len(distinct) < 3:
        raise InsufficientSamples(f"need >= 3 distinct AB products away from 1, got {len(distinct)}")
    r_sgn = max(abs(e.measured - e.sgn_prediction) for e in usable)
    r_mix = max(abs(e.measured - e.mixed_prediction) for e in usable)
    fit_sgn, fit_mix = r_sgn <= verdict_tol, r_mix <= verdict_tol
    if fit_sgn and not fit_mix:
        kind = VerdictKind.OSCILLATING_PURE
    elif fit_mix and not fit_sgn:
        kind = VerdictKind.MIXED
    else:
        kind = VerdictKind.INCONCLUSIVE
    return Verdict(kind, tuple(usable), float(r_sgn), float(r_mix))
