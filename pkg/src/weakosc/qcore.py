"""Finite-dimensional states, observables and strong-measurement primitives.

Everything here is dense numpy. Arrays stored on the dataclasses are copied
and flagged read-only at construction, so instances can be shared freely.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    NotHermitian,
    NotNormalized,
    NotPositive,
    TraceNotOne,
    ValidationFailure,
)

HERMITIAN_TOL = 1e-10
POSITIVITY_TOL = 1e-12
TRACE_TOL = 1e-12
NORM_TOL = 1e-12


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=np.complex128, copy=True)
    arr.setflags(write=False)
    return arr


def _square(matrix) -> np.ndarray:
    m = np.asarray(matrix, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
        raise DimensionMismatch(f"expected a non-empty square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValidationFailure("matrix has non-finite entries")
    return m


def _check_hermitian(m: np.ndarray) -> None:
    err = np.max(np.abs(m - m.conj().T))
    if err > HERMITIAN_TOL:
        raise NotHermitian(f"max |M - M^dagger| = {err:.3e} exceeds {HERMITIAN_TOL:g}")


@dataclass(frozen=True)
class PureState:
    amplitudes: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.amplitudes, dtype=np.complex128)
        if v.ndim != 1 or v.size == 0:
            raise DimensionMismatch(f"state vector must be 1-d, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValidationFailure("state vector has non-finite entries")
        norm2 = float(np.vdot(v, v).real)
        if abs(norm2 - 1.0) > NORM_TOL:
            raise NotNormalized(f"squared norm {norm2!r} differs from 1")
        object.__setattr__(self, "amplitudes", _frozen(v))

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def projector(self) -> np.ndarray:
        return np.outer(self.amplitudes, self.amplitudes.conj())


def pure_state(vector: Sequence[complex]) -> PureState:
    """Normalize ``vector`` and wrap it. Zero vectors are rejected."""
    v = np.asarray(vector, dtype=np.complex128)
    n = np.linalg.norm(v)
    if not np.isfinite(n) or n == 0.0:
        raise NotNormalized("cannot normalize a zero or non-finite vector")
    return PureState(v / n)


def basis_state(dim: int, index: int) -> PureState:
    v = np.zeros(dim, dtype=np.complex128)
    v[index] = 1.0
    return PureState(v)


@dataclass(frozen=True)
class Observable:
    matrix: np.ndarray

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class DensityOperator:
    matrix: np.ndarray

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def purity(self) -> float:
        return float(np.real(np.trace(self.matrix @ self.matrix)))


def make_observable(matrix) -> Observable:
    m = _square(matrix)
    _check_hermitian(m)
    return Observable(_frozen(m))


def make_density(matrix) -> DensityOperator:
    m = _square(matrix)
    _check_hermitian(m)
    # Eigen-decomposition rather than Cholesky so the error can report the offending eigenvalue.
    evals = np.linalg.eigvalsh((m + m.conj().T) / 2)
    if evals[0] < -POSITIVITY_TOL:
        raise NotPositive(f"most negative eigenvalue {evals[0]:.3e}", min_eigenvalue=float(evals[0]))
    tr = np.trace(m).real
    if abs(tr - 1.0) > TRACE_TOL:
        raise TraceNotOne(f"trace {tr!r} differs from 1")
    return DensityOperator(_frozen(m))


def density_from_pure(state: PureState) -> DensityOperator:
    return make_density(state.projector())


@dataclass(frozen=True)
class MixtureDecomposition:
    """Convex combination of pure states, sum_i w_i |psi_i><psi_i|."""

    weights: np.ndarray
    components: tuple = field(default_factory=tuple)

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        comps = tuple(self.components)
        if w.ndim != 1 or w.size != len(comps) or w.size == 0:
            raise DimensionMismatch("weights and components must be non-empty and of equal length")
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise ValidationFailure("weights must be finite and non-negative")
        if abs(w.sum() - 1.0) > 1e-12:
            raise ValidationFailure(f"weights sum to {w.sum()!r}, not 1")
        dims = {c.dim for c in comps}
        if len(dims) != 1:
            raise DimensionMismatch(f"components have differing dimensions {sorted(dims)}")
        w = w.copy()
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "components", comps)

    @property
    def dim(self) -> int:
        return self.components[0].dim

    def density(self) -> DensityOperator:
        m = sum(w * c.projector() for w, c in zip(self.weights, self.components))
        return make_density(m)


def _match(a: int, b: int) -> None:
    if a != b:
        raise DimensionMismatch(f"dimension {a} does not match {b}")


def expectation(state: DensityOperator, obs: Observable) -> float:
    """Tr[rho O], with the imaginary residue checked and dropped."""
    _match(state.dim, obs.dim)
    value = np.trace(state.matrix @ obs.matrix)
    if abs(value.imag) > HERMITIAN_TOL * max(1.0, abs(value.real)):
        raise ValidationFailure(f"expectation has imaginary part {value.imag:.3e}")
    return float(value.real)


def transition_probability(state: DensityOperator, target: PureState) -> float:
    """Tr[rho Pi_a] routed through :func:`expectation` with the target projector."""
    _match(state.dim, target.dim)
    p = expectation(state, Observable(_frozen(target.projector())))
    return min(1.0, max(0.0, p))
