"""Standardized (mean 0, variance 1) error distributions and data generation."""

import numpy as np

from .exceptions import DomainError
from .matrix import as_symmetric, sqrt_psd
from . import rng as _rng

DISTRIBUTIONS = ("normal", "t9", "gamma", "skew-normal")
_ALIASES = {
    "normal": "normal", "Normal": "normal",
    "t9": "t9", "T9": "t9",
    "gamma": "gamma", "Gamma21": "gamma",
    "skew-normal": "skew-normal", "skewnormal": "skew-normal", "SkewNormal4": "skew-normal",
}

T_DF = 9
GAMMA_SHAPE = 2.0
SKEW_SLANT = 4.0
SKEW_DELTA = SKEW_SLANT / np.sqrt(1 + SKEW_SLANT**2)
SKEW_MEAN = SKEW_DELTA * np.sqrt(2 / np.pi)
SKEW_SD = np.sqrt(1 - 2 * SKEW_DELTA**2 / np.pi)


def normalize_dist(name):
    try:
        return _ALIASES[name]
    except KeyError:
        raise DomainError(f"unknown distribution {name!r}; use one of {DISTRIBUTIONS}") from None


def _generator(seed):
    if isinstance(seed, np.random.Generator):
        return seed
    return _rng.stream(seed, _rng.DATA)


def sample_errors(dist, size, seed):
    """i.i.d. standardized draws; ``size`` is an int or a shape tuple."""
    g = _generator(seed)
    dist = normalize_dist(dist)
    if dist == "normal":
        return g.standard_normal(size)
    if dist == "t9":
        return g.standard_t(T_DF, size) / np.sqrt(T_DF / (T_DF - 2))
    if dist == "gamma":
        return (g.gamma(GAMMA_SHAPE, 1.0, size) - GAMMA_SHAPE) / np.sqrt(GAMMA_SHAPE)
    # skew normal via |U0| delta + sqrt(1 - delta^2) U1
    u0 = np.abs(g.standard_normal(size))
    u1 = g.standard_normal(size)
    s = SKEW_DELTA * u0 + np.sqrt(1 - SKEW_DELTA**2) * u1
    return (s - SKEW_MEAN) / SKEW_SD


def generate_sample(V, dist, N, seed, root=None):
    """N rows X_j = V^{1/2} eps_j with standardized i.i.d. components.

    ``root`` may carry a precomputed ``sqrt_psd(V)``.
    """
    V = as_symmetric(V, "V")
    S = sqrt_psd(V) if root is None else root
    E = sample_errors(dist, (int(N), V.shape[0]), seed)
    return E @ S
