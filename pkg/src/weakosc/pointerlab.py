"""Von Neumann pointer simulation: weak coupling, post-selection, readout, Monte Carlo.

The pointer is a Gaussian wavepacket psi(x) ~ exp(-x^2 / (4 sigma^2)) on a
periodic grid (sigma is the standard deviation of |psi|^2). The coupling
exp(-i g O (x) p) moves the eigenbranch with eigenvalue lam by g*lam; the
move is applied exactly as a phase ramp in Fourier space.

To first order in g the post-selected pointer moves by g Re(W) in position
and by g Im(W) / (2 sigma^2) in momentum, where W = <post|O|pre>/<post|pre>.
The library's weak values use the conjugate convention, so the momentum
constant that maps readings back onto them is -2 sigma^2; it is measured on
an exactly solvable case before use (``calibrate_momentum_constant``).
"""

from __future__ import annotations

import enum
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import DimensionMismatch, GridOverflow, NoSurvivors, OrthogonalPostselection, ValidationFailure
from .oscillate import AveragingWindow, OscillatingPureState, fundamental_period
from .qcore import Observable, PureState
from .rng import counter_uniform
from .weakval import EPS_OVERLAP, WeakValue

NO_SURVIVOR_PROB = 1e-300
CHUNK = 1 << 15

# counter streams per trial
_S_TIME, _S_SURVIVE, _S_POSITION, _S_MOMENTUM = range(4)


@dataclass(frozen=True)
class PointerModel:
    M: int = 256
    L: float = 16.0
    sigma: float = 1.0
    g: float = 0.01

    def __post_init__(self):
        if self.M < 128:
            raise ValidationFailure(f"pointer grid needs M >= 128 points, got {self.M}")
        if not self.sigma > 0:
            raise ValidationFailure("sigma must be positive")
        if self.L < 10 * self.sigma:
            raise ValidationFailure(f"span L = {self.L} must be at least 10 sigma")

    @property
    def dx(self) -> float:
        return self.L / self.M

    @property
    def x(self) -> np.ndarray:
        return (np.arange(self.M) - self.M // 2) * self.dx

    @property
    def p(self) -> np.ndarray:
        return 2 * np.pi * np.fft.fftfreq(self.M, self.dx)

    def initial(self) -> np.ndarray:
        psi = np.exp(-self.x ** 2 / (4 * self.sigma ** 2)).astype(complex)
        return psi / math.sqrt(np.sum(np.abs(psi) ** 2) * self.dx)

    def with_g(self, g: float) -> "PointerModel":
        return PointerModel(self.M, self.L, self.sigma, g)


@dataclass(frozen=True)
class JointState:
    """Amplitudes indexed [system basis index, pointer grid index]."""

    amplitudes: np.ndarray
    model: PointerModel

    def norm(self) -> float:
        return float(np.sum(np.abs(self.amplitudes) ** 2) * self.model.dx)


def translate(psi: np.ndarray, shift: float, pm: PointerModel) -> np.ndarray:
    return np.fft.ifft(np.fft.fft(psi) * np.exp(-1j * pm.p * shift))


def _branches(obs: Observable, pm: PointerModel):
    lam, vecs = np.linalg.eigh(obs.matrix)
    worst = float(np.max(np.abs(pm.g * lam))) if lam.size else 0.0
    if worst > pm.L / 4:
        raise GridOverflow(f"pointer shift {worst:.3g} exceeds L/4 = {pm.L / 4:.3g}")
    phi0 = pm.initial()
    packets = np.array([translate(phi0, pm.g * l, pm) for l in lam])
    return lam, vecs, packets


def weak_couple(system: PureState, obs: Observable, pm: PointerModel) -> JointState:
    if system.dim != obs.dim:
        raise DimensionMismatch(f"state dimension {system.dim} != observable dimension {obs.dim}")
    _, vecs, packets = _branches(obs, pm)
    coeff = vecs.conj().T @ system.amplitudes
    return JointState(vecs @ (coeff[:, None] * packets), pm)


def postselect(j: JointState, post: PureState) -> tuple[np.ndarray, float]:
    """Pointer state conditioned on ``post`` and the probability of that outcome."""
    if post.dim != j.amplitudes.shape[0]:
        raise DimensionMismatch("post-selected state does not match the joint state")
    chi = post.amplitudes.conj() @ j.amplitudes
    prob = float(np.sum(np.abs(chi) ** 2) * j.model.dx)
    if prob <= NO_SURVIVOR_PROB:
        raise NoSurvivors(f"post-selection probability {prob:.3e}")
    return chi / math.sqrt(prob), prob


def readout(pointer: np.ndarray, pm: PointerModel) -> tuple[float, float]:
    dens = np.abs(pointer) ** 2
    mean_x = float(np.sum(pm.x * dens) / np.sum(dens))
    spec = np.abs(np.fft.fft(pointer)) ** 2
    mean_p = float(np.sum(pm.p * spec) / np.sum(spec))
    return mean_x, mean_p


def _raw_estimate(pre: PureState, obs: Observable, post: PureState, pm: PointerModel) -> tuple[float, float]:
    chi, _ = postselect(weak_couple(pre, obs, pm), post)
    return readout(chi, pm)


@lru_cache(maxsize=32)
def calibrate_momentum_constant(M: int, L: float, sigma: float) -> float:
    """Measured factor k with Im(weak value) = k * mean_momentum / g.

    Uses S = diag(1, -1), pre ~ |0> + e^{-i pi/2}|1>, post ~ |0> + |1>, whose
    weak value is exactly -i, at g = 1e-3 sigma. Asserts k = -2 sigma^2.
    """
    pm = PointerModel(M, L, sigma, 1e-3 * sigma)
    s = Observable(np.diag([1.0, -1.0]).astype(complex))
    pre = PureState(np.array([1.0, -1j]) / math.sqrt(2))
    post = PureState(np.array([1.0, 1.0 + 0j]) / math.sqrt(2))
    _, mean_p = _raw_estimate(pre, s, post, pm)
    k = -1.0 * pm.g / mean_p
    expected = -2 * sigma ** 2
    if abs(k - expected) > 1e-3 * abs(expected):
        raise ArithmeticError(f"momentum calibration gave {k!r}, expected {expected!r}")
    return k


def momentum_constant(pm: PointerModel) -> float:
    calibrate_momentum_constant(pm.M, pm.L, pm.sigma)
    return -2 * pm.sigma ** 2


def estimate_weak_value(pre: PureState, obs: Observable, post: PureState, pm: PointerModel) -> WeakValue:
    """Weak value read off the post-selected pointer (O(g) accurate for small g)."""
    if pm.g == 0:
        raise ValidationFailure("coupling g must be non-zero to read a weak value")
    if abs(np.vdot(pre.amplitudes, post.amplitudes)) <= EPS_OVERLAP:
        raise OrthogonalPostselection("pre- and post-selected states are orthogonal")
    mean_x, mean_p = _raw_estimate(pre, obs, post, pm)
    return WeakValue(complex(mean_x / pm.g, momentum_constant(pm) * mean_p / pm.g))


# ---------------------------------------------------------------- Monte Carlo


class Estimator(str, enum.Enum):
    POOLED = "Pooled"
    TIME_BINNED = "TimeBinned"


@dataclass(frozen=True)
class McEstimate:
    value: complex
    stderr_re: float
    stderr_im: float
    trials: int
    survivors: int
    estimator: Estimator
    notes: tuple = field(default_factory=tuple)


def _inverse_cdf(weights: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Row-wise sampling of grid indices from unnormalized weights."""
    cdf = np.cumsum(weights, axis=1)
    target = u * cdf[:, -1]
    idx = np.sum(cdf < target[:, None], axis=1)
    return np.minimum(idx, weights.shape[1] - 1)


class _Sampler:
    def __init__(self, s, obs, post, pm, window, seed):
        if not (s.dim == obs.dim == post.dim):
            raise DimensionMismatch("state, observable and post-selection dimensions differ")
        self.s, self.pm, self.window, self.seed = s, pm, window, seed
        lam, vecs, packets = _branches(obs, pm)
        self.vecs_c = vecs.conj()
        self.u = (vecs.conj().T @ post.amplitudes).conj()
        self.packets = packets
        self.spectra = np.fft.fft(packets, axis=1)
        self.x, self.p = pm.x, pm.p

    def chunk(self, lo: int, hi: int):
        idx = np.arange(lo, hi, dtype=np.uint64)
        t = self.window.start + self.window.duration * counter_uniform(self.seed, idx, _S_TIME)
        coeff = (self.s.vectors(t) @ self.vecs_c) * self.u
        chi = coeff @ self.packets
        dens = np.abs(chi) ** 2
        prob = dens.sum(axis=1) * self.pm.dx
        alive = counter_uniform(self.seed, idx, _S_SURVIVE) < prob
        if not np.any(alive):
            return t[alive], np.empty(0), np.empty(0)
        ix = _inverse_cdf(dens[alive], counter_uniform(self.seed, idx[alive], _S_POSITION))
        spec = np.abs(coeff[alive] @ self.spectra) ** 2
        ip = _inverse_cdf(spec, counter_uniform(self.seed, idx[alive], _S_MOMENTUM))
        return t[alive], self.x[ix], self.p[ip]


def _collect(sampler: _Sampler, trials: int, workers: int):
    bounds = [(lo, min(lo + CHUNK, trials)) for lo in range(0, trials, CHUNK)]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(lambda b: sampler.chunk(*b), bounds))
    else:
        parts = [sampler.chunk(*b) for b in bounds]
    # concatenation in trial order makes the result independent of scheduling
    return tuple(np.concatenate([part[k] for part in parts]) for k in range(3))


def monte_carlo(
    s: OscillatingPureState,
    obs: Observable,
    post: PureState,
    pm: PointerModel,
    window: AveragingWindow,
    trials: int,
    seed: int,
    estimator: Estimator | str = Estimator.POOLED,
    n_bins: int = 64,
    workers: int = 1,
) -> McEstimate:
    """Simulated weak measurements at uniformly random times in ``window``.

    Every trial gets a time, a survival draw against the exact post-selection
    probability and, if it survives, one position and one momentum reading
    from the exact pointer marginals. Pooled averages the readings of all
    survivors; TimeBinned forms a weak value per time bin and averages the
    bins with equal weight.
    """
    estimator = Estimator(estimator)
    if trials < 1:
        raise ValidationFailure("trials must be >= 1")
    if pm.g == 0:
        raise ValidationFailure("coupling g must be non-zero")
    k_mom = momentum_constant(pm)
    t, xs, ps = _collect(_Sampler(s, obs, post, pm, window, seed), trials, workers)
    n = xs.size
    if n == 0:
        raise NoSurvivors(f"none of {trials} trials survived post-selection")
    g = pm.g
    notes = []

    if estimator is Estimator.POOLED:
        value = complex(xs.mean() / g, k_mom * ps.mean() / g)
        se_re = xs.std(ddof=1) / math.sqrt(n) / g if n > 1 else math.inf
        se_im = abs(k_mom) * ps.std(ddof=1) / math.sqrt(n) / g if n > 1 else math.inf
        return McEstimate(value, float(se_re), float(se_im), trials, n, estimator)

    period = fundamental_period(s)
    width = window.duration / n_bins
    if period is not None and width > period / 16:
        notes.append("BinTooCoarse")
        warnings.warn(f"time bin width {width:.3g} exceeds period/16 = {period / 16:.3g}", RuntimeWarning,
                      stacklevel=2)
    b = np.minimum(((t - window.start) / width).astype(int), n_bins - 1)
    counts = np.bincount(b, minlength=n_bins)
    if np.any(counts < 2):
        raise NoSurvivors(f"time bin {int(np.argmin(counts))} has fewer than two survivors")
    mx = np.bincount(b, xs, n_bins) / counts
    mp = np.bincount(b, ps, n_bins) / counts
    vx = (np.bincount(b, xs * xs, n_bins) - counts * mx * mx) / (counts - 1)
    vp = (np.bincount(b, ps * ps, n_bins) - counts * mp * mp) / (counts - 1)
    value = complex(mx.mean() / g, k_mom * mp.mean() / g)
    se_re = math.sqrt(np.sum(vx / counts)) / n_bins / g
    se_im = abs(k_mom) * math.sqrt(np.sum(vp / counts)) / n_bins / g
    return McEstimate(value, float(se_re), float(se_im), trials, n, estimator, tuple(notes))
