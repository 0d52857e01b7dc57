"""Continuous-spectrum version of the experiment on a finite grid of detector bins.

The grid is a set of equal bins of width h. The oscillating state is

    psi(x, t) = A(x) exp(-i phi(x, t)),   phi(x, t) = -Omega x t + Phi x,

and what a non-post-selected measurement reports per bin is the bin
probability, so ``ContinuumProfile.amplitude`` holds the bin amplitude
sqrt(P_k / h). When the profile also carries the smooth ``amplitude_fn`` the
weak-value integrals are done inside each bin with Gauss-Legendre nodes;
without it the amplitude is taken constant across each bin.

The tailored post-selection B_k = N C / A_k is constant per bin (it can only
be shaped at the detector resolution) and has zero phase.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import (
    DimensionMismatch,
    OrthogonalPostselection,
    PoleAtPhase,
    ValidationFailure,
    VanishingAmplitude,
)
from .oscillate import DEFAULT_FAST_FACTOR, AveragingWindow, FastnessReport, OscillatingPureState, dephase
from .qcore import PureState, density_from_pure, make_observable
from .weakval import (
    EPS_OVERLAP,
    TwoStateConfig,
    WeakValue,
    averaged_weak_value,
    period_average_spin,
    two_state_averaged,
    two_state_mixed,
    weak_value_mixed,
)

EPS_AMP = 1e-10
SUB_NODES = 8
_GL_X, _GL_W = np.polynomial.legendre.leggauss(SUB_NODES)


@dataclass(frozen=True)
class ContinuumProfile:
    grid: np.ndarray
    amplitude: np.ndarray
    Omega: float
    Phi: float
    delta_x: float
    delta_t: float
    amplitude_fn: Optional[Callable] = None

    def __post_init__(self):
        x = np.array(self.grid, dtype=float)
        a = np.array(self.amplitude, dtype=float)
        if x.ndim != 1 or x.size < 4 or a.shape != x.shape:
            raise DimensionMismatch("grid and amplitude must be equal-length vectors of at least 4 points")
        d = np.diff(x)
        if np.any(d <= 0) or np.max(np.abs(d - d.mean())) > 1e-9 * d.mean():
            raise ValidationFailure("grid must be strictly increasing with uniform spacing")
        if np.any(a < 0) or not np.all(np.isfinite(a)):
            raise ValidationFailure("amplitudes must be finite and non-negative")
        norm = float(np.sum(a * a) * d.mean())
        if abs(norm - 1.0) > 1e-10:
            raise ValidationFailure(f"grid norm sum A^2 h = {norm!r}, expected 1")
        if not (self.delta_x > 0 and self.delta_t > 0):
            raise ValidationFailure("resolutions delta_x and delta_t must be positive")
        x.setflags(write=False)
        a.setflags(write=False)
        object.__setattr__(self, "grid", x)
        object.__setattr__(self, "amplitude", a)

    @property
    def h(self) -> float:
        return float((self.grid[-1] - self.grid[0]) / (self.grid.size - 1))

    @property
    def lower_edge(self) -> float:
        return float(self.grid[0] - 0.5 * self.h)

    @property
    def upper_edge(self) -> float:
        return float(self.grid[-1] + 0.5 * self.h)

    @classmethod
    def from_function(cls, fn: Callable, lo: float, hi: float, bins: int, Omega: float, Phi: float = 0.0,
                      delta_x: float | None = None, delta_t: float = 1.0) -> "ContinuumProfile":
        """Bin a smooth amplitude ``fn`` on [lo, hi] and normalize it (function and bins alike)."""
        h = (hi - lo) / bins
        x = lo + (np.arange(bins) + 0.5) * h
        xs = x[:, None] + 0.5 * h * _GL_X[None, :]
        p = (np.asarray(fn(xs), dtype=float) ** 2 * _GL_W).sum(axis=1) * 0.5 * h
        scale = 1.0 / math.sqrt(p.sum())
        amp = np.sqrt(p / h) * scale
        amp *= 1.0 / math.sqrt(np.sum(amp * amp) * h)  # absorb rounding in the bin sum
        return cls(x, amp, Omega, Phi, h if delta_x is None else delta_x, delta_t,
                   lambda y, _f=fn, _s=scale: _s * np.asarray(_f(y), dtype=float))

    @classmethod
    def from_bin_probabilities(cls, grid, probs, Omega: float, Phi: float = 0.0,
                               delta_x: float | None = None, delta_t: float = 1.0) -> "ContinuumProfile":
        grid = np.asarray(grid, dtype=float)
        probs = np.asarray(probs, dtype=float)
        h = float((grid[-1] - grid[0]) / (grid.size - 1))
        amp = np.sqrt(probs / probs.sum() / h)
        amp *= 1.0 / math.sqrt(np.sum(amp * amp) * h)
        return cls(grid, amp, Omega, Phi, h if delta_x is None else delta_x, delta_t)


@dataclass(frozen=True)
class Window:
    a: float
    delta_a: float


@dataclass(frozen=True)
class TailoredPostselection:
    samples: np.ndarray
    C1: float
    C2: float
    N: float
    window: Window
    start: int
    half_bins: int

    @property
    def ratio(self) -> float:
        return self.C2 / self.C1


def snap_window(p: ContinuumProfile, w: Window) -> tuple[Window, int, int]:
    """Snap the centre to the nearest bin edge and the half-width to whole bins.

    Returns the snapped window, the index of the first bin and the number of
    bins per half.
    """
    h = p.h
    m = int(round(w.delta_a / h))
    edge = int(round((w.a - p.lower_edge) / h))
    if m < 2:
        raise ValidationFailure(f"half-width {w.delta_a!r} is below two bins (h = {h!r})")
    if edge - m < 0 or edge + m > p.grid.size:
        raise ValidationFailure(f"window [{w.a - w.delta_a}, {w.a + w.delta_a}] leaves the grid")
    return Window(p.lower_edge + edge * h, m * h), edge - m, m


def check_fast_condition(p: ContinuumProfile, fast_factor: float = DEFAULT_FAST_FACTOR) -> FastnessReport:
    """|Omega| against 2 pi / (delta_x delta_t), reported as phase cycles per time window."""
    gap = abs(p.Omega) * p.delta_x
    cycles = gap * p.delta_t / (2 * math.pi)
    return FastnessReport(min_gap=gap, cycles_in_window=cycles, is_fast=bool(cycles >= fast_factor),
                          fast_factor=fast_factor)


def spatial_mixing(p: ContinuumProfile, fast_factor: float = DEFAULT_FAST_FACTOR) -> bool:
    """True when Phi alone winds the phase many times across one resolution cell."""
    return abs(p.Phi) * p.delta_x / (2 * math.pi) >= fast_factor


def tailored_postselection(p: ContinuumProfile, w: Window, C1: float, C2: float) -> TailoredPostselection:
    if not (C1 > 0 and C2 > 0):
        raise ValidationFailure("C1 and C2 must be positive")
    snapped, start, m = snap_window(p, w)
    amp = p.amplitude[start:start + 2 * m]
    if np.any(amp <= EPS_AMP):
        k = start + int(np.argmin(amp))
        raise VanishingAmplitude(f"A = {p.amplitude[k]!r} at x = {p.grid[k]!r} inside the window")
    c = np.concatenate([np.full(m, float(C1)), np.full(m, float(C2))])
    raw = c / amp
    n = 1.0 / math.sqrt(np.sum(raw * raw) * p.h)
    b = n * raw
    b.setflags(write=False)
    return TailoredPostselection(b, float(C1), float(C2), n, snapped, start, m)


def _bin_phase_integrals(p: ContinuumProfile, idx: np.ndarray, k: float) -> np.ndarray:
    """Per-bin integral of A(x) exp(i k x)."""
    h = p.h
    x = p.grid[idx]
    if p.amplitude_fn is None:
        half = 0.5 * k * h
        sinc = math.sin(half) / half if half != 0 else 1.0
        return p.amplitude[idx] * h * sinc * np.exp(1j * k * x)
    xs = x[:, None] + 0.5 * h * _GL_X[None, :]
    return (p.amplitude_fn(xs) * np.exp(1j * k * xs) * _GL_W).sum(axis=1) * 0.5 * h


def phase_rate(p: ContinuumProfile, t: float) -> float:
    """k(t) = Omega t - Phi, the wavenumber of chi(x) - phi(x, t) with chi = 0."""
    return p.Omega * t - p.Phi


def _halves(p: ContinuumProfile, post: TailoredPostselection, t: float):
    if post.start + 2 * post.half_bins > p.grid.size:
        raise DimensionMismatch("post-selection does not fit this profile")
    idx = np.arange(post.start, post.start + 2 * post.half_bins)
    terms = post.samples * _bin_phase_integrals(p, idx, phase_rate(p, t))
    m = post.half_bins
    # fixed left-to-right order keeps the result bit-stable
    return complex(np.sum(terms[:m])), complex(np.sum(terms[m:]))


def continuum_weak_value(p: ContinuumProfile, post: TailoredPostselection, w: Window | None, t: float) -> WeakValue:
    """Grid quadrature of (L - R) / (L + R) at time t.

    ``w`` is accepted for symmetry with the other operations; the window is
    the one baked into ``post``.
    """
    if w is not None:
        snapped, _, _ = snap_window(p, w)
        if snapped != post.window:
            raise ValidationFailure("window does not match the one the post-selection was built on")
    left, right = _halves(p, post, t)
    scale = abs(left) + abs(right)
    den = left + right
    if scale <= EPS_OVERLAP * post.N * post.window.delta_a * max(post.C1, post.C2):
        raise OrthogonalPostselection(f"post-selection amplitude vanishes at t = {t!r}")
    if abs(den) <= 1e-12 * scale:
        raise PoleAtPhase(f"left and right halves cancel at t = {t!r}")
    return WeakValue((left - right) / den)


def window_phase(p: ContinuumProfile, post: TailoredPostselection, t):
    """theta(t) = Omega da t - Phi da."""
    da = post.window.delta_a
    return p.Omega * da * np.asarray(t) - p.Phi * da


def four_term_weak_value(C1: float, C2: float, theta):
    """Unsimplified ratio of the four window terms.

    Numerator and denominator share the factor 1 - e^{i theta}; where it
    vanishes the removable limit (the closed form) is returned.
    """
    th = np.asarray(theta, dtype=float)
    e = np.exp(1j * th)
    removable = np.abs(1 - e) < 1e-8
    den = np.where(removable, 1.0, C1 - C2 - C1 / e + C2 * e)
    out = np.where(removable, closed_form_weak_value(C1, C2, th), (C1 + C2 - C1 / e - C2 * e) / den)
    return out[()] if out.ndim == 0 else out


def closed_form_weak_value(C1: float, C2: float, theta):
    z = (C2 / C1) * np.exp(1j * np.asarray(theta, dtype=float))
    return (1 - z) / (1 + z)


def continuum_period(p: ContinuumProfile, post: TailoredPostselection) -> float:
    return 2 * math.pi / (abs(p.Omega) * post.window.delta_a)


def continuum_averaged_quadrature(
    p: ContinuumProfile, post: TailoredPostselection, start: float = 0.0, nodes: int = 4096
) -> complex:
    """One-period mean of the grid weak value (periodic rectangle rule, midpoint nodes)."""
    if p.Omega == 0:
        raise ValidationFailure("Omega = 0: the weak value does not oscillate")
    T = continuum_period(p, post)
    times = start + T * (np.arange(nodes) + 0.5) / nodes
    vals = np.array([continuum_weak_value(p, post, None, t).value for t in times])
    return complex(vals.mean())


def continuum_averaged_weak_value(
    p: ContinuumProfile,
    post: TailoredPostselection,
    w: Window | None = None,
    window: AveragingWindow | None = None,
    nodes: int = 4096,
    tol: float = 1e-3,
) -> WeakValue:
    """sgn(1 - C2^2/C1^2), checked against the grid quadrature over one period."""
    if not check_fast_condition(p).is_fast:
        warnings.warn("fast-oscillation condition not met; the time average is not representative",
                      RuntimeWarning, stacklevel=2)
    r = post.ratio
    if r == 1.0:
        # the grid route sits on the pole; use the principal value of the closed form
        quad = period_average_spin(1.0)
        closed = 0.0
    else:
        closed = float(np.sign(1 - r * r))
        start = 0.0 if window is None else window.start
        quad = continuum_averaged_quadrature(p, post, start, nodes)
    if abs(quad - closed) > tol:
        raise ArithmeticError(f"grid quadrature {quad!r} disagrees with sgn law {closed!r}")
    return WeakValue(complex(closed, 0.0))


def continuum_mixed_weak_value(p: ContinuumProfile, post: TailoredPostselection, w: Window | None = None) -> WeakValue:
    """Dephased pre-selection: ratio of the bin sums of A^2 B^2 over the two halves."""
    m = post.half_bins
    weight = post.samples ** 2 * p.amplitude[post.start:post.start + 2 * m] ** 2 * p.h
    left, right = float(np.sum(weight[:m])), float(np.sum(weight[m:]))
    return WeakValue(complex((left - right) / (left + right), 0.0))


def continuum_mixed_closed_form(C1: float, C2: float) -> float:
    r2 = (C2 / C1) ** 2
    return (1 - r2) / (1 + r2)


# ---------------------------------------------------------------- countable basis


def countable_reduction(
    amps,
    a_idx: int,
    b_idx: int,
    B: float,
    chi: float = 0.0,
    omega0: float = 1.0,
    nodes: int = 2 ** 14,
) -> tuple[WeakValue, WeakValue]:
    """Time-averaged and mixed weak values of |a><a| - |b><b| in the full space.

    The oscillating state has the moduli and phases of ``amps`` with distinct
    frequencies: 0 on a, omega0 on b, and higher multiples of omega0 elsewhere,
    so every coherence shares the period 2 pi / omega0. The averaging window
    covers exactly that period and is placed so that the nodes sit
    symmetrically about the (possible) pole.
    """
    amps = np.asarray(amps, dtype=complex)
    d = amps.size
    if d < 3:
        raise DimensionMismatch("countable reduction needs at least 3 dimensions")
    if a_idx == b_idx or not (0 <= a_idx < d and 0 <= b_idx < d):
        raise ValidationFailure("a_idx and b_idx must be distinct valid indices")
    mod = np.abs(amps)
    if mod[a_idx] <= EPS_AMP or mod[b_idx] <= EPS_AMP:
        raise VanishingAmplitude("amplitudes on the measured pair must be non-zero")
    if not B > 0:
        raise ValidationFailure("B must be positive")

    freqs = np.zeros(d)
    freqs[b_idx] = omega0
    others = [j for j in range(d) if j not in (a_idx, b_idx)]
    freqs[others] = omega0 * (2 + np.arange(len(others)))
    offsets = np.angle(amps)
    s = OscillatingPureState(mod / np.linalg.norm(mod), freqs, offsets)

    obs = np.zeros((d, d), dtype=complex)
    obs[a_idx, a_idx], obs[b_idx, b_idx] = 1.0, -1.0
    obs = make_observable(obs)
    post_v = np.zeros(d, dtype=complex)
    post_v[a_idx], post_v[b_idx] = 1.0, B * np.exp(1j * chi)
    post = PureState(post_v / np.linalg.norm(post_v))

    # delta(t) = chi - (phase_b(t) - phase_a(t)); the pole is at delta = pi
    delta0 = chi - (offsets[b_idx] - offsets[a_idx])
    T = 2 * math.pi / omega0
    # delta falls at rate omega0; first node half a step below the pole, so the
    # node set is symmetric about delta = pi
    t_start = (delta0 - math.pi + math.pi / nodes) / omega0
    window = AveragingWindow(t_start, T, nodes)
    averaged = averaged_weak_value(s, obs, post, window)
    mixed = weak_value_mixed(dephase(s), obs, density_from_pure(post))
    return averaged, mixed


def countable_reference(amps, a_idx: int, b_idx: int, B: float) -> tuple[WeakValue, WeakValue]:
    """Two-state closed forms with A_eff = |A_b| / |A_a|."""
    amps = np.asarray(amps, dtype=complex)
    cfg = TwoStateConfig(abs(amps[b_idx]) / abs(amps[a_idx]), B)
    return two_state_averaged(cfg), two_state_mixed(cfg)
