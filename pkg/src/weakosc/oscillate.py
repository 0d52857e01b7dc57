"""Quickly oscillating pure states, their dephased counterparts, and time averaging.

A state here is sum_i A_i exp(i(w_i t + phi_i)) |i> in the computational basis.
Amplitudes are non-negative; any sign lives in the phase offset.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DegenerateFrequencies, DimensionMismatch, NonFiniteSample, ValidationFailure
from .qcore import DensityOperator, PureState, make_density

DEFAULT_FAST_FACTOR = 100.0


def _ro(a, dtype=float) -> np.ndarray:
    arr = np.array(a, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class OscillatingPureState:
    amplitudes: np.ndarray
    frequencies: np.ndarray
    phase_offsets: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.amplitudes, dtype=float)
        w = np.asarray(self.frequencies, dtype=float)
        p = np.asarray(self.phase_offsets, dtype=float)
        if a.ndim != 1 or a.size == 0 or a.shape != w.shape or a.shape != p.shape:
            raise DimensionMismatch("amplitudes, frequencies and phase_offsets must be equal-length vectors")
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(w)) and np.all(np.isfinite(p))):
            raise ValidationFailure("non-finite state parameters")
        if np.any(a < 0):
            raise ValidationFailure("amplitudes must be non-negative; absorb signs into phase_offsets")
        if abs(float(np.sum(a * a)) - 1.0) > 1e-12:
            raise ValidationFailure(f"sum of squared amplitudes is {np.sum(a * a)!r}, not 1")
        object.__setattr__(self, "amplitudes", _ro(a))
        object.__setattr__(self, "frequencies", _ro(w))
        object.__setattr__(self, "phase_offsets", _ro(p))

    @classmethod
    def normalized(cls, amplitudes, frequencies, phase_offsets=None) -> "OscillatingPureState":
        """Build a state from unnormalized amplitudes; negative entries get a pi phase."""
        a = np.asarray(amplitudes, dtype=float)
        p = np.zeros_like(a) if phase_offsets is None else np.array(phase_offsets, dtype=float)
        p = p + np.where(a < 0, np.pi, 0.0)
        a = np.abs(a)
        return cls(a / np.linalg.norm(a), frequencies, p)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def with_phase_shift(self, shift: float) -> "OscillatingPureState":
        return OscillatingPureState(self.amplitudes, self.frequencies, self.phase_offsets + shift)

    def coherence_pairs(self):
        """Index pairs (i, j), i < j, whose coherence term is non-zero."""
        idx = np.flatnonzero(self.amplitudes > 0)
        return [(int(i), int(j)) for k, i in enumerate(idx) for j in idx[k + 1:]]

    def vectors(self, times) -> np.ndarray:
        """State vectors at an array of times, shape (len(times), dim)."""
        t = np.asarray(times, dtype=float)[..., None]
        return self.amplitudes * np.exp(1j * (self.frequencies * t + self.phase_offsets))


@dataclass(frozen=True)
class AveragingWindow:
    start: float
    duration: float
    nodes: int = 256

    def __post_init__(self):
        if not (self.duration > 0 and math.isfinite(self.duration)):
            raise ValidationFailure(f"window duration must be positive, got {self.duration!r}")
        if int(self.nodes) != self.nodes or self.nodes < 2:
            raise ValidationFailure(f"window needs at least 2 nodes, got {self.nodes!r}")

    @property
    def end(self) -> float:
        return self.start + self.duration

    def shifted(self, offset: float) -> "AveragingWindow":
        return AveragingWindow(self.start + offset, self.duration, self.nodes)

    def scaled(self, factor: float) -> "AveragingWindow":
        return AveragingWindow(self.start, self.duration * factor, self.nodes)


@dataclass(frozen=True)
class FastnessReport:
    min_gap: float
    cycles_in_window: float
    is_fast: bool
    fast_factor: float = DEFAULT_FAST_FACTOR


def state_at(s: OscillatingPureState, t: float) -> PureState:
    v = s.vectors(np.array([t]))[0]
    # Renormalize to absorb rounding in exp(); the parameters already guarantee unit norm.
    return PureState(v / np.linalg.norm(v))


def projector_at(s: OscillatingPureState, t: float) -> DensityOperator:
    v = state_at(s, t).amplitudes
    return make_density(np.outer(v, v.conj()))


def _check_nondegenerate(s: OscillatingPureState) -> None:
    for i, j in s.coherence_pairs():
        if s.frequencies[i] == s.frequencies[j]:
            raise DegenerateFrequencies(
                f"terms {i} and {j} share frequency {s.frequencies[i]!r}; merge them before dephasing"
            )


def dephase(s: OscillatingPureState) -> DensityOperator:
    _check_nondegenerate(s)
    return make_density(np.diag(s.amplitudes ** 2).astype(complex))


def analytic_linear_phase_average(delta_omega: float, window: AveragingWindow) -> complex:
    """Exact mean of exp(i*dw*t) over the window."""
    if delta_omega == 0:
        return 1.0 + 0.0j
    half = 0.5 * delta_omega * window.duration
    centre = window.start + 0.5 * window.duration
    return complex(np.exp(1j * delta_omega * centre) * (math.sin(half) / half))


def averaged_projector(s: OscillatingPureState, window: AveragingWindow) -> np.ndarray:
    """Window mean of the instantaneous projector, evaluated in closed form entry by entry."""
    dw = s.frequencies[:, None] - s.frequencies[None, :]
    half = 0.5 * dw * window.duration
    centre = window.start + 0.5 * window.duration
    sinc = np.ones_like(half)
    nz = half != 0
    sinc[nz] = np.sin(half[nz]) / half[nz]
    phase = np.exp(1j * (dw * centre + s.phase_offsets[:, None] - s.phase_offsets[None, :]))
    return np.outer(s.amplitudes, s.amplitudes) * phase * sinc


def _is_whole_periods(duration: float, period: float | None) -> bool:
    if period is None or not period > 0:
        return False
    k = duration / period
    return round(k) >= 1 and abs(k - round(k)) <= 1e-9 * max(1.0, k)


def _evaluate(f, times: np.ndarray, vectorized: bool) -> np.ndarray:
    if vectorized:
        vals = np.asarray(f(times))
    else:
        vals = np.array([f(t) for t in times])
    if not np.all(np.isfinite(vals)):
        bad = np.flatnonzero(~np.isfinite(vals.reshape(len(times), -1)).all(axis=1))
        raise NonFiniteSample(f"non-finite integrand at t = {times[bad[0]]!r}")
    return vals


def time_average_with_error(
    f: Callable, window: AveragingWindow, period: float | None = None, vectorized: bool = False
):
    """Window mean of ``f`` and an error estimate.

    With a known ``period`` dividing the window, the periodic rectangle rule is
    used (spectrally accurate for smooth f; error estimate from halving the
    node set). Otherwise composite trapezoid with a Richardson estimate.
    ``f`` may return scalars or arrays; with ``vectorized`` it receives the whole
    node array at once and must return values stacked along axis 0.
    """
    n = int(window.nodes)
    if _is_whole_periods(window.duration, period):
        times = window.start + window.duration * np.arange(n) / n
        vals = _evaluate(f, times, vectorized)
        value = vals.mean(axis=0)
        err = np.max(np.abs(value - vals[::2].mean(axis=0))) if n % 2 == 0 else np.nan
        return value, float(err)
    times = np.linspace(window.start, window.end, n)
    vals = _evaluate(f, times, vectorized)
    w = np.full(n, 1.0)
    w[0] = w[-1] = 0.5
    value = np.tensordot(w, vals, axes=(0, 0)) / (n - 1)
    if n >= 3 and (n - 1) % 2 == 0:
        coarse = vals[::2]
        wc = np.full(coarse.shape[0], 1.0)
        wc[0] = wc[-1] = 0.5
        vc = np.tensordot(wc, coarse, axes=(0, 0)) / (coarse.shape[0] - 1)
        err = float(np.max(np.abs(value - vc)) / 3.0)
    else:
        err = float("nan")
    return value, err


def time_average(f: Callable, window: AveragingWindow, period: float | None = None, vectorized: bool = False):
    value, _ = time_average_with_error(f, window, period=period, vectorized=vectorized)
    if np.ndim(value) == 0:
        return complex(value)
    return value


def min_frequency_gap(s: OscillatingPureState) -> float:
    gaps = [abs(s.frequencies[i] - s.frequencies[j]) for i, j in s.coherence_pairs()]
    gaps = [g for g in gaps if g > 0]
    return min(gaps) if gaps else math.inf


def fundamental_period(s: OscillatingPureState, rtol: float = 1e-9) -> float | None:
    """Common period of all coherence terms if every gap is an integer multiple of the smallest."""
    gaps = [abs(s.frequencies[i] - s.frequencies[j]) for i, j in s.coherence_pairs()]
    gaps = [g for g in gaps if g > 0]
    if not gaps:
        return None
    g0 = min(gaps)
    for g in gaps:
        k = g / g0
        if abs(k - round(k)) > rtol * k:
            return None
    return 2 * math.pi / g0


def fastness(s: OscillatingPureState, window: AveragingWindow, fast_factor: float = DEFAULT_FAST_FACTOR) -> FastnessReport:
    gap = min_frequency_gap(s)
    cycles = gap * window.duration / (2 * math.pi)
    return FastnessReport(min_gap=gap, cycles_in_window=cycles, is_fast=cycles >= fast_factor, fast_factor=fast_factor)
