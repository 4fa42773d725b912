"""Empirical moments of an i.i.d. sample in diagonal-first coordinates."""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .exceptions import DegenerateError, DimensionError, SampleSizeError
from .matrix import dvech, dvech_indices, dvech_upper, n_full, n_upper


def as_sample(X, min_n=2):
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise DimensionError(f"sample must be a 2-D array (N x d), got shape {X.shape}")
    if X.shape[0] < min_n:
        raise SampleSizeError(f"need at least {min_n} observations, got {X.shape[0]}")
    if not np.all(np.isfinite(X)):
        raise DimensionError("sample contains non-finite values")
    return X


def sample_moments(X):
    """Mean, empirical covariance (divisor N - 1) and its dvech."""
    X = as_sample(X)
    mean = X.mean(axis=0)
    Xc = X - mean
    V = Xc.T @ Xc / (X.shape[0] - 1)
    V = 0.5 * (V + V.T)
    return mean, V, dvech(V)


def outer_product_vectors(X):
    """Rows ``w_j = dvech((X_j - Xbar)(X_j - Xbar)^T)``."""
    Xc = X - X.mean(axis=0)
    rows, cols = dvech_indices(X.shape[1])
    return Xc[:, rows] * Xc[:, cols]


def estimate_sigma_dv(X):
    """Empirical covariance (divisor N - 1) of the centered outer-product vectors."""
    X = as_sample(X, min_n=3)
    W = outer_product_vectors(X)
    Wc = W - W.mean(axis=0)
    S = Wc.T @ Wc / (X.shape[0] - 1)
    return 0.5 * (S + S.T)


def correlation_from_cov(V):
    V = np.asarray(V, dtype=float)
    s = np.diag(V)
    if np.any(s <= 0):
        raise DegenerateError("correlation undefined: a variance is zero")
    inv = 1.0 / np.sqrt(s)
    R = V * inv[:, None] * inv[None, :]
    R = 0.5 * (R + R.T)
    R[np.diag_indices_from(R)] = 1.0
    return R, dvech_upper(R)


def jacobian_corr_map(V):
    """Jacobian of v -> dvech_upper(R(v)) in dvech coordinates (p_u x p)."""
    V = np.asarray(V, dtype=float)
    d = V.shape[0]
    s = np.diag(V)
    if np.any(s <= 0):
        raise DegenerateError("correlation undefined: a variance is zero")
    rows, cols = dvech_indices(d, upper=True)
    # position of v_ij in dvech: its superdiagonal segment plus offset
    full_r, full_c = dvech_indices(d)
    pos = {(int(i), int(j)): k for k, (i, j) in enumerate(zip(full_r, full_c))}
    M = np.zeros((n_upper(d), n_full(d)))
    for q, (i, j) in enumerate(zip(rows, cols)):
        i, j = int(i), int(j)
        r = V[i, j] / np.sqrt(s[i] * s[j])
        M[q, pos[(i, j)]] = 1.0 / np.sqrt(s[i] * s[j])
        M[q, pos[(i, i)]] = -r / (2 * s[i])
        M[q, pos[(j, j)]] = -r / (2 * s[j])
    return M


def estimate_upsilon_dv(X, sigma=None, V=None):
    X = as_sample(X, min_n=3)
    if V is None:
        _, V, _ = sample_moments(X)
    if sigma is None:
        sigma = estimate_sigma_dv(X)
    M = jacobian_corr_map(V)
    U = M @ sigma @ M.T
    return 0.5 * (U + U.T)


@dataclass(frozen=True, eq=False)
class MomentBundle:
    mean: np.ndarray
    Vhat: np.ndarray
    vhat: np.ndarray
    SigmaHat: np.ndarray
    Rhat: Optional[np.ndarray] = None
    rhat: Optional[np.ndarray] = None
    UpsilonHat: Optional[np.ndarray] = None
    N: int = 0

    def point(self, correlation):
        """(estimate, its asymptotic covariance) for the chosen domain."""
        if correlation:
            return self.rhat, self.UpsilonHat
        return self.vhat, self.SigmaHat


def compute_moments(X, correlation=False):
    X = as_sample(X, min_n=3)
    mean, V, v = sample_moments(X)
    S = estimate_sigma_dv(X)
    if not correlation:
        return MomentBundle(mean, V, v, S, N=X.shape[0])
    R, r = correlation_from_cov(V)
    U = estimate_upsilon_dv(X, sigma=S, V=V)
    return MomentBundle(mean, V, v, S, R, r, U, N=X.shape[0])
