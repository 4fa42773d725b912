"""Hypothesis matrices, targets and nonlinear transforms for each structure.

A null hypothesis has the form ``C @ T(x) == zeta`` where ``x`` is the
diagonal-first vectorized covariance matrix (covariance domain) or the
diagonal-first upper vectorization of the correlation matrix (correlation
domain), and ``T`` is one of

* ``"identity"``
* ``"h"``       -- root of order j applied to the j-th superdiagonal
* ``"g"``       -- stack (x, g(x)) with g the ratios of neighbouring
  superdiagonal means
* ``"h_corr"``  -- the root transform on the upper (correlation) vector

All transform helpers accept arrays of shape ``(..., q)`` so bootstrap
replicates can be processed in one call.
"""

from dataclasses import dataclass, replace

import numpy as np

from .exceptions import DegenerateDenominatorError, DimensionError, DomainError, SingularityError
from .matrix import centering_P, direct_sum, n_full, n_upper, segment_slices
from .structures import kind_tag

COVARIANCE = "covariance"
CORRELATION = "correlation"
_DOMAIN_ALIASES = {"cov": COVARIANCE, "covariance": COVARIANCE, "corr": CORRELATION, "correlation": CORRELATION}


def normalize_domain(domain):
    try:
        return _DOMAIN_ALIASES[domain]
    except KeyError:
        raise DomainError(f"unknown domain {domain!r}; use 'cov' or 'corr'") from None


# ---------------------------------------------------------------------------
# root transforms h and h_corr


def root_orders(d, upper=False):
    """Root order applied at each position: 1 on the diagonal and first
    superdiagonal, j on the j-th superdiagonal for j >= 2."""
    orders = []
    for j, sl in enumerate(segment_slices(d, upper=upper), start=1 if upper else 0):
        orders.extend([max(j, 1)] * (sl.stop - sl.start))
    return np.asarray(orders, dtype=int)


def _roots(x, orders):
    x = np.asarray(x, dtype=float)
    out = x.copy()
    ax = np.abs(x)
    for o in np.unique(orders[orders > 1]):
        m = orders == o
        r = ax[..., m] ** (1.0 / o)
        out[..., m] = r if o % 2 == 0 else np.sign(x[..., m]) * r
    return out


def _root_derivs(x, orders, check=True):
    x = np.asarray(x, dtype=float)
    out = np.ones_like(x)
    roots = orders > 1
    if check:
        bad = np.nonzero(np.any(np.atleast_2d(x[..., roots] == 0), axis=0))[0]
        if bad.size:
            idx = int(np.nonzero(roots)[0][bad[0]])
            raise SingularityError(
                f"root transform is not differentiable at a zero entry (position {idx + 1})", index=idx
            )
    ax = np.abs(x)
    with np.errstate(divide="ignore"):
        for o in np.unique(orders[roots]):
            m = orders == o
            der = ax[..., m] ** (1.0 / o - 1.0) / o
            out[..., m] = der * np.sign(x[..., m]) if o % 2 == 0 else der
    return out


def _check_len(x, q, what):
    if np.shape(x)[-1] != q:
        raise DimensionError(f"{what} expects vectors of length {q}, got {np.shape(x)[-1]}")


def transform_h(x, d):
    _check_len(x, n_full(d), "h")
    return _roots(x, root_orders(d))


def jacobian_h(x, d):
    """Diagonal Jacobian of ``h`` (shape ``(..., p, p)``)."""
    _check_len(x, n_full(d), "h")
    return _diag_embed(_root_derivs(x, root_orders(d)))


def transform_h_corr(x, d):
    _check_len(x, n_upper(d), "h_corr")
    return _roots(x, root_orders(d, upper=True))


def jacobian_h_corr(x, d):
    _check_len(x, n_upper(d), "h_corr")
    return _diag_embed(_root_derivs(x, root_orders(d, upper=True)))


def _diag_embed(v):
    out = np.zeros(v.shape + (v.shape[-1],))
    idx = np.arange(v.shape[-1])
    out[..., idx, idx] = v
    return out


# ---------------------------------------------------------------------------
# neighbouring-diagonal ratio transform g


def _g_parts(x, d):
    segs = segment_slices(d)
    nums, dens = [], []
    for j in range(d - 1):
        den, num = segs[j], segs[j + 1]
        nums.append(x[..., num].sum(axis=-1) / (d - j - 1))
        dens.append(np.abs(x[..., den]).sum(axis=-1) / (d - j))
    return np.stack(nums, axis=-1), np.stack(dens, axis=-1)


def transform_g(x, d):
    """Ratios mean(j-th superdiagonal) / mean(|(j-1)-th superdiagonal|), j = 1..d-1."""
    x = np.asarray(x, dtype=float)
    _check_len(x, n_full(d), "g")
    num, den = _g_parts(x, d)
    if np.any(den == 0):
        raise DegenerateDenominatorError("a superdiagonal used as ratio denominator is identically zero")
    return num / den


def jacobian_g(x, d):
    """Jacobian of ``g`` (shape ``(..., d-1, p)``)."""
    x = np.asarray(x, dtype=float)
    _check_len(x, n_full(d), "g")
    num, den = _g_parts(x, d)
    if np.any(den == 0):
        raise DegenerateDenominatorError("a superdiagonal used as ratio denominator is identically zero")
    segs = segment_slices(d)
    J = np.zeros(x.shape[:-1] + (d - 1, x.shape[-1]))
    for j in range(d - 1):
        ld, ln = d - j, d - j - 1
        dsl, nsl = segs[j], segs[j + 1]
        # g_j = (S_num / ln) / (S_den / ld)
        D = den[..., j, None] * ld
        J[..., j, nsl] = (ld / ln) / D
        J[..., j, dsl] = -num[..., j, None] * ld * np.sign(x[..., dsl]) / D**2
    return J


def stacked_statistic_g(x, d):
    x = np.asarray(x, dtype=float)
    return np.concatenate([x, transform_g(x, d)], axis=-1)


def jacobian_stacked_g(x, d):
    x = np.asarray(x, dtype=float)
    Jg = jacobian_g(x, d)
    eye = np.broadcast_to(np.eye(x.shape[-1]), x.shape[:-1] + (x.shape[-1], x.shape[-1]))
    return np.concatenate([eye, Jg], axis=-2)


# ---------------------------------------------------------------------------
# hypothesis specs


@dataclass(frozen=True, eq=False)
class HypothesisSpec:
    C: np.ndarray
    zeta: np.ndarray
    transform: str
    domain: str
    d: int
    kind: str = ""

    @property
    def input_dim(self):
        return n_full(self.d) if self.domain == COVARIANCE else n_upper(self.d)

    @property
    def linear(self):
        return self.transform == "identity"

    def evaluate(self, x):
        """T(x) for the spec's transform."""
        if self.transform == "identity":
            return np.asarray(x, dtype=float)
        if self.transform == "h":
            return transform_h(x, self.d)
        if self.transform == "g":
            return stacked_statistic_g(x, self.d)
        if self.transform == "h_corr":
            return transform_h_corr(x, self.d)
        raise DomainError(f"unknown transform {self.transform!r}")

    def jacobian(self, x):
        x = np.asarray(x, dtype=float)
        if self.transform == "identity":
            return np.broadcast_to(np.eye(x.shape[-1]), x.shape[:-1] + (x.shape[-1],) * 2)
        if self.transform == "h":
            return jacobian_h(x, self.d)
        if self.transform == "g":
            return jacobian_stacked_g(x, self.d)
        if self.transform == "h_corr":
            return jacobian_h_corr(x, self.d)
        raise DomainError(f"unknown transform {self.transform!r}")

    def jacobian_diag(self, x):
        """Diagonal of the Jacobian for the entrywise transforms (identity, h, h_corr)."""
        x = np.asarray(x, dtype=float)
        if self.transform == "identity":
            return np.ones_like(x)
        if self.transform == "h":
            return _root_derivs(x, root_orders(self.d))
        if self.transform == "h_corr":
            return _root_derivs(x, root_orders(self.d, upper=True))
        raise DomainError(f"transform {self.transform!r} has no diagonal Jacobian")

    def residual(self, x):
        return self.C @ self.evaluate(x) - self.zeta


def _P(n):
    return centering_P(n)


def toeplitz_C(d):
    return direct_sum([_P(d - k) for k in range(d)])


def heterogeneous_toeplitz_C(d):
    return direct_sum([_P(d - k) for k in range(1, d)])


def ar2_C(d):
    return direct_sum([np.eye(d), heterogeneous_toeplitz_C(d), _P(d - 1)])


def foar_C(d):
    return direct_sum([toeplitz_C(d), _P(d - 1)])


def build_hypothesis(kind, d, domain=COVARIANCE, variant="h"):
    """Hypothesis matrix, target and transform for a structure.

    ``variant`` only matters for the autoregressive kinds: ``"h"`` uses the
    root transform, ``"g"`` stacks the diagonal-ratio transform.
    """
    tag = kind_tag(kind)
    domain = normalize_domain(domain)
    if d < 2:
        raise DimensionError("structure tests need d >= 2")
    if variant not in ("h", "g"):
        raise DomainError(f"unknown variant {variant!r}; use 'h' or 'g'")
    p, pu = n_full(d), n_upper(d)

    def spec(C, zeta=None, transform="identity"):
        zeta = np.zeros(C.shape[0]) if zeta is None else zeta
        return HypothesisSpec(C, np.asarray(zeta, dtype=float), transform, domain, d, tag)

    if domain == COVARIANCE:
        if tag == "Diagonal":
            return spec(direct_sum([np.zeros((d, d)), np.eye(pu)]))
        if tag == "Spherical":
            return spec(direct_sum([_P(d), np.eye(pu)]))
        if tag == "CompoundSymmetry":
            return spec(direct_sum([_P(d), _P(pu)]))
        if tag == "Toeplitz":
            return spec(toeplitz_C(d))
        if tag == "Autoregressive":
            if variant == "h":
                return spec(direct_sum([np.eye(d), _P(pu)]), np.r_[np.ones(d), np.zeros(pu)], "h")
            return spec(ar2_C(d), np.r_[np.ones(d), np.zeros(p - 1)], "g")
        if tag == "FirstOrderAutoregressive":
            if variant == "h":
                raise DomainError("first-order autoregressive structure is only testable with variant 'g'")
            return spec(foar_C(d), None, "g")
    else:
        if tag == "Diagonal":
            return spec(np.eye(pu))
        if tag == "HeterogeneousCS":
            return spec(_P(pu))
        if tag == "HeterogeneousToeplitz":
            return spec(heterogeneous_toeplitz_C(d))
        if tag == "HeterogeneousAR":
            if variant == "g":
                raise DomainError("heterogeneous AR is only testable with variant 'h'")
            return spec(_P(pu), None, "h_corr")
    raise DomainError(f"structure {kind!r} is not testable in the {domain} domain")


def prune_zero_rows(spec):
    """Drop rows of C that are exactly zero (and the matching entries of zeta)."""
    keep = np.any(spec.C != 0, axis=1)
    if np.all(keep):
        return spec
    return replace(spec, C=spec.C[keep], zeta=spec.zeta[keep])
