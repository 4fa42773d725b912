"""Vectorization operators and small matrix constructors.

Symmetric matrices are plain ``numpy`` arrays. Two vectorizations are used:

* ``vech``  -- row-wise upper triangle: (m11, m12, ..., m1d, m22, ..., mdd)
* ``dvech`` -- diagonal-first: the main diagonal, then the first
  superdiagonal, the second superdiagonal, and so on.

The ``_upper`` variants drop the main diagonal. In documentation the
superdiagonal segments are numbered k = 1..d (segment k holds the (k-1)-th
superdiagonal and starts at the 1-based position a_k); internally all
indices are 0-based.
"""

import numpy as np

from .exceptions import DimensionError, NotPSDError, NumericError

PSD_TOL = 1e-10


def n_full(d):
    return d * (d + 1) // 2


def n_upper(d):
    return d * (d - 1) // 2


def _dim_from_full(length):
    d = int(round((np.sqrt(8 * length + 1) - 1) / 2))
    if n_full(d) != length:
        raise DimensionError(f"length {length} is not d(d+1)/2 for any integer d")
    return d


def _dim_from_upper(length):
    d = int(round((np.sqrt(8 * length + 1) + 1) / 2))
    if n_upper(d) != length:
        raise DimensionError(f"length {length} is not d(d-1)/2 for any integer d")
    return d


def diag_index(d):
    """1-based start positions a_1..a_d of the superdiagonal segments.

    a_k = 1 + sum_{l=0}^{k-2} (d - l); the same numbers index the row starts
    in ``vech``.
    """
    a = np.ones(d, dtype=int)
    for k in range(1, d):
        a[k] = a[k - 1] + d - (k - 1)
    return a


def segment_slices(d, upper=False):
    """0-based slices of each superdiagonal inside ``dvech`` (or ``dvech_upper``).

    Entry ``j`` of the returned list covers the j-th superdiagonal
    (``j = 0`` is the main diagonal, absent when ``upper``).
    """
    starts = diag_index(d) - 1
    offset = d if upper else 0
    out = []
    for j in range(1 if upper else 0, d):
        s = starts[j] - offset
        out.append(slice(s, s + d - j))
    return out


def as_symmetric(M, name="matrix"):
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {M.shape}")
    if not np.array_equal(M, M.T):
        tol = 1e-12 * (1.0 + np.max(np.abs(M)))
        if np.max(np.abs(M - M.T)) > tol:
            raise DimensionError(f"{name} is not symmetric")
        M = 0.5 * (M + M.T)
    return M


def dvech(M):
    M = as_symmetric(M)
    return np.concatenate([np.diagonal(M, k) for k in range(M.shape[0])])


def dvech_upper(M):
    M = as_symmetric(M)
    d = M.shape[0]
    if d == 1:
        return np.zeros(0)
    return np.concatenate([np.diagonal(M, k) for k in range(1, d)])


def dvech_inv(v, diagonal=None):
    """Rebuild the symmetric matrix from ``dvech`` output.

    With ``diagonal`` given, ``v`` is read as ``dvech_upper`` output and the
    main diagonal is taken from ``diagonal``.
    """
    v = np.asarray(v, dtype=float).ravel()
    if diagonal is None:
        d = _dim_from_full(v.size)
        segs = segment_slices(d)
        first = 0
    else:
        diagonal = np.asarray(diagonal, dtype=float).ravel()
        d = diagonal.size
        if v.size != n_upper(d):
            raise DimensionError(
                f"upper vector of length {v.size} does not match d={d} (need {n_upper(d)})"
            )
        segs = segment_slices(d, upper=True)
        first = 1
    M = np.zeros((d, d))
    if diagonal is not None:
        M[np.diag_indices(d)] = diagonal
    for j, sl in enumerate(segs, start=first):
        vals = v[sl]
        idx = np.arange(d - j)
        M[idx, idx + j] = vals
        M[idx + j, idx] = vals
    return M


def vech(M):
    M = as_symmetric(M)
    return M[np.triu_indices(M.shape[0])]


def vech_upper(M):
    M = as_symmetric(M)
    return M[np.triu_indices(M.shape[0], k=1)]


def permutation_A(d):
    """Permutation matrix with ``A @ vech(B) == dvech(B)``.

    Built from the double sum over superdiagonal ``l`` and position ``k``:
    row a_{l+1}+k-1 (position of b_{k,k+l} in dvech) receives column
    a_k+l (its position in vech).
    """
    if d < 2:
        raise DimensionError("permutation_A needs d >= 2")
    a = diag_index(d) - 1
    p = n_full(d)
    A = np.zeros((p, p))
    for ell in range(d):
        for k in range(d - ell):
            A[a[ell] + k, a[k] + ell] = 1.0
    return A


def permutation_A_upper(d):
    """Permutation with ``A @ vech_upper(B) == dvech_upper(B)``."""
    if d < 2:
        raise DimensionError("permutation_A_upper needs d >= 2")
    a = diag_index(d) - 1
    q = n_upper(d)
    A = np.zeros((q, q))
    for ell in range(1, d):
        for k in range(d - ell):
            # row k of vech_upper starts at a[k] - k, holding b_{k,k+1} first
            A[a[ell] - d + k, a[k] - k + ell - 1] = 1.0
    return A


def centering_P(n):
    return np.eye(n) - np.full((n, n), 1.0 / n)


def direct_sum(blocks):
    blocks = [np.atleast_2d(np.asarray(b, dtype=float)) for b in blocks]
    if not blocks:
        raise DimensionError("direct_sum needs at least one block")
    rows = sum(b.shape[0] for b in blocks)
    cols = sum(b.shape[1] for b in blocks)
    out = np.zeros((rows, cols))
    r = c = 0
    for b in blocks:
        out[r:r + b.shape[0], c:c + b.shape[1]] = b
        r += b.shape[0]
        c += b.shape[1]
    return out


def sym_eigen(M):
    """Eigenvalues in descending order and matching orthonormal eigenvectors."""
    M = as_symmetric(M)
    if not np.all(np.isfinite(M)):
        raise NumericError("matrix has non-finite entries")
    w, Q = np.linalg.eigh(M)
    order = np.argsort(w, kind="stable")[::-1]
    return w[order], Q[:, order]


def psd_factor(M, tol=PSD_TOL):
    """Return the eigen-factor ``L`` (d x r) with ``L @ L.T == M``.

    Columns belonging to (clamped) zero eigenvalues are dropped, so ``r`` is the
    numerical rank. Raises ``NotPSDError`` when an eigenvalue is below
    ``-tol * ||M||``.
    """
    w, Q = sym_eigen(M)
    scale = max(np.max(np.abs(w)) if w.size else 0.0, 0.0)
    if w.size and w[-1] < -tol * max(scale, 1e-300):
        raise NotPSDError(f"matrix is not positive semidefinite (min eigenvalue {w[-1]:.3g})")
    keep = w > tol * scale
    return Q[:, keep] * np.sqrt(w[keep])


def sqrt_psd(M, tol=PSD_TOL):
    """Symmetric PSD square root; small negative eigenvalues are clamped to 0."""
    w, Q = sym_eigen(M)
    scale = np.max(np.abs(w)) if w.size else 0.0
    if w.size and w[-1] < -tol * scale:
        raise NotPSDError(f"matrix is not positive semidefinite (min eigenvalue {w[-1]:.3g})")
    w = np.clip(w, 0.0, None)
    S = (Q * np.sqrt(w)) @ Q.T
    return 0.5 * (S + S.T)


def dvech_indices(d, upper=False):
    """Row and column index arrays with ``M[rows, cols] == dvech(M)``."""
    rows, cols = [], []
    for j in range(1 if upper else 0, d):
        i = np.arange(d - j)
        rows.append(i)
        cols.append(i + j)
    if not rows:
        return np.zeros(0, dtype=int), np.zeros(0, dtype=int)
    return np.concatenate(rows), np.concatenate(cols)
