"""Constructors for the named covariance and correlation structures."""

from dataclasses import dataclass, field
from typing import Tuple

import numpy as np

from .exceptions import DimensionError, DomainError, NotPSDError
from .matrix import as_symmetric, sym_eigen

# CLI / config names
KIND_NAMES = {
    "diagonal": "Diagonal",
    "sphericity": "Spherical",
    "compound-symmetry": "CompoundSymmetry",
    "toeplitz": "Toeplitz",
    "ar": "Autoregressive",
    "foar": "FirstOrderAutoregressive",
    "h-cs": "HeterogeneousCS",
    "h-toeplitz": "HeterogeneousToeplitz",
    "h-ar": "HeterogeneousAR",
}
TAG_TO_NAME = {v: k for k, v in KIND_NAMES.items()}
HETEROGENEOUS = ("HeterogeneousCS", "HeterogeneousToeplitz", "HeterogeneousAR")


def kind_tag(name):
    """Normalize a CLI name (``"h-ar"``) or tag (``"HeterogeneousAR"``) to the tag."""
    if name in KIND_NAMES:
        return KIND_NAMES[name]
    if name in TAG_TO_NAME:
        return name
    raise DomainError(f"unknown structure {name!r}; expected one of {sorted(KIND_NAMES)}")


@dataclass(frozen=True)
class StructureKind:
    """A structure tag plus its parameters.

    Parameters by tag:

    ================================  =========================================
    Diagonal                          ``diag``: the d diagonal entries
    Spherical                         ``c``
    CompoundSymmetry                  ``a`` (diagonal), ``b`` (off-diagonal)
    Toeplitz                          ``bands``: (t_0, ..., t_{d-1})
    Autoregressive                    ``rho`` in (0, 1)
    FirstOrderAutoregressive          ``upsilon`` > 0, ``rho`` > 0
    HeterogeneousCS                   ``b`` (core correlation), ``scales``
    HeterogeneousToeplitz             ``bands`` (t_0 = 1), ``scales``
    HeterogeneousAR                   ``rho``, ``scales``
    ================================  =========================================
    """

    tag: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "tag", kind_tag(self.tag))

    @property
    def name(self):
        return TAG_TO_NAME[self.tag]


def _check_psd(M, what):
    w, _ = sym_eigen(M)
    if w[-1] < -1e-10 * max(1.0, np.max(np.abs(w))):
        raise NotPSDError(f"{what} is not positive semidefinite (min eigenvalue {w[-1]:.3g})")
    return M


def autoregressive(rho, d, upsilon=1.0):
    i = np.arange(d)
    return upsilon * float(rho) ** np.abs(i[:, None] - i[None, :])


def toeplitz(bands):
    bands = np.asarray(bands, dtype=float).ravel()
    i = np.arange(bands.size)
    return bands[np.abs(i[:, None] - i[None, :])]


def _scaled(R, scales, d):
    scales = np.asarray(scales, dtype=float).ravel()
    if scales.size != d:
        raise DimensionError(f"need {d} scales, got {scales.size}")
    if np.any(scales <= 0):
        raise DomainError("heterogeneous scales must be positive")
    return scales[:, None] * R * scales[None, :]


def _cs(a, b, d):
    if a <= 0:
        raise DomainError("compound symmetry needs a positive diagonal value")
    lower = -a / (d - 1) if d > 1 else -np.inf
    if not (lower < b < a):
        raise DomainError(f"compound symmetry off-diagonal {b} outside ({lower:.4g}, {a})")
    return np.full((d, d), float(b)) + (a - b) * np.eye(d)


def make_structure(kind, d):
    """Return the exact structured d x d matrix for ``kind``."""
    if not isinstance(kind, StructureKind):
        kind = StructureKind(kind)
    if d < 1:
        raise DimensionError("d must be positive")
    tag, prm = kind.tag, kind.params

    if tag == "Diagonal":
        diag = np.asarray(prm.get("diag", np.ones(d)), dtype=float).ravel()
        if diag.size != d:
            raise DimensionError(f"need {d} diagonal entries, got {diag.size}")
        if np.any(diag < 0):
            raise DomainError("variances must be nonnegative")
        return np.diag(diag)
    if tag == "Spherical":
        c = float(prm.get("c", 1.0))
        if c <= 0:
            raise DomainError("sphericity scale must be positive")
        return c * np.eye(d)
    if tag == "CompoundSymmetry":
        return _cs(float(prm.get("a", 1.0)), float(prm["b"]), d)
    if tag == "Toeplitz":
        bands = np.asarray(prm["bands"], dtype=float).ravel()
        if bands.size != d:
            raise DimensionError(f"need {d} bands, got {bands.size}")
        return _check_psd(toeplitz(bands), "Toeplitz matrix")
    if tag == "Autoregressive":
        rho = float(prm["rho"])
        if not 0 < rho < 1:
            raise DomainError("autoregressive rho must lie in (0, 1)")
        return autoregressive(rho, d)
    if tag == "FirstOrderAutoregressive":
        rho, ups = float(prm["rho"]), float(prm["upsilon"])
        if rho <= 0 or ups <= 0:
            raise DomainError("first-order autoregressive needs upsilon > 0 and rho > 0")
        return _check_psd(autoregressive(rho, d, ups), "first-order autoregressive matrix")
    if tag == "HeterogeneousCS":
        R = _cs(1.0, float(prm["b"]), d)
        return _scaled(R, prm.get("scales", np.ones(d)), d)
    if tag == "HeterogeneousToeplitz":
        bands = np.asarray(prm["bands"], dtype=float).ravel()
        if bands.size != d:
            raise DimensionError(f"need {d} bands, got {bands.size}")
        if bands[0] != 1.0:
            raise DomainError("heterogeneous Toeplitz core must have unit diagonal (t_0 = 1)")
        R = _check_psd(toeplitz(bands), "Toeplitz correlation matrix")
        return _scaled(R, prm.get("scales", np.ones(d)), d)
    if tag == "HeterogeneousAR":
        rho = float(prm["rho"])
        if not 0 < rho < 1:
            raise DomainError("autoregressive rho must lie in (0, 1)")
        return _scaled(autoregressive(rho, d), prm.get("scales", np.ones(d)), d)
    raise DomainError(f"no constructor for {tag}")


def mixture(V_a, V_b, delta):
    """Convex combination ``(1 - delta) V_a + delta V_b``."""
    V_a = as_symmetric(V_a, "V_a")
    V_b = as_symmetric(V_b, "V_b")
    if V_a.shape != V_b.shape:
        raise DimensionError(f"dimension mismatch {V_a.shape} vs {V_b.shape}")
    if not 0.0 <= delta <= 1.0:
        raise DomainError("mixture weight must lie in [0, 1]")
    return (1.0 - delta) * V_a + delta * V_b


# Matrices used throughout the simulation study.
AR_RHO = 0.65
TOEPLITZ_BANDS: Tuple[float, ...] = (1.2, 0.9, 0.8, 0.4, 0.1)


def v1_autoregressive(d=5):
    return make_structure(StructureKind("ar", {"rho": AR_RHO}), d)


def v2_toeplitz():
    return make_structure(StructureKind("toeplitz", {"bands": TOEPLITZ_BANDS}), 5)
