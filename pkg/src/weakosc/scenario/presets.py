"""Illustrative amplitude laws for the mixed-state sources of the proposed experiments.

None of these is derived physics; they only give the countable-basis and
continuum scenarios plausible amplitude profiles to work with.
"""

from __future__ import annotations

import numpy as np

PRESETS = ("blackbody", "decoherence", "solid_state", "unruh", "hawking", "custom")
THERMAL = ("blackbody", "unruh", "hawking")


def preset_amplitudes(name: str, dim: int, params: dict | None = None, seed: int = 0) -> np.ndarray:
    """Complex amplitude vector of length ``dim`` with unit norm."""
    params = dict(params or {})
    if name not in PRESETS:
        raise ValueError(f"unknown source preset {name!r}; choose from {', '.join(PRESETS)}")
    if name in THERMAL:
        kT = float(params.get("temperature", 2.0))
        spacing = float(params.get("spacing", 1.0))
        if kT <= 0:
            raise ValueError("temperature must be positive")
        p = np.exp(-spacing * np.arange(dim) / kT)
        amps = np.sqrt(p).astype(complex)
    elif name == "decoherence":
        rng = np.random.default_rng(seed)
        amps = np.exp(1j * rng.uniform(0, 2 * np.pi, dim))
    elif name == "solid_state":
        width = float(params.get("width", max(dim / 8, 0.5)))
        c1 = float(params.get("centre1", dim / 4))
        c2 = float(params.get("centre2", 3 * dim / 4))
        j = np.arange(dim)
        p = np.exp(-(j - c1) ** 2 / (2 * width ** 2)) + np.exp(-(j - c2) ** 2 / (2 * width ** 2))
        amps = np.sqrt(p).astype(complex)
    else:
        raw = params.get("amplitudes")
        if raw is None or len(raw) != dim:
            raise ValueError(f"custom preset needs 'amplitudes' with {dim} entries")
        amps = np.array([complex(*a) if isinstance(a, (list, tuple)) else complex(a) for a in raw])
    n = np.linalg.norm(amps)
    if n == 0:
        raise ValueError("preset produced a zero vector")
    return amps / n


def continuum_shape(shape: str, params: dict | None = None):
    """Smooth amplitude function A(x) (unnormalized) for the continuum scenario."""
    params = dict(params or {})
    if shape == "gaussian":
        mu, w = float(params.get("centre", 0.0)), float(params.get("width", 1.0))
        return lambda x: np.exp(-((x - mu) ** 2) / (4 * w ** 2))
    if shape == "two_peak":
        c1, c2 = float(params.get("centre1", -1.5)), float(params.get("centre2", 1.5))
        w = float(params.get("width", 1.0))
        return lambda x: np.sqrt(np.exp(-((x - c1) ** 2) / (2 * w ** 2)) + np.exp(-((x - c2) ** 2) / (2 * w ** 2)))
    raise ValueError(f"unknown continuum shape {shape!r}")
