"""Combined multiple-contrast test with a bootstrap-calibrated local level.

Each row of the hypothesis matrix gives one component statistic
``T_l = sqrt(N) c_l' v``. The parametric bootstrap draws
``T* = sqrt(N) C Ybar*`` with ``Y*_j ~ N(0, Sigma)``; the common local level
beta is the largest grid value whose bootstrap family-wise rejection rate
stays at or below alpha.
"""

from dataclasses import asdict, dataclass, field

import numpy as np

from . import rng as _rng
from .exceptions import DegenerateError, DomainError
from .hypotheses import build_hypothesis
from .matrix import n_full, psd_factor
from .moments import as_sample, compute_moments


@dataclass(frozen=True)
class MCTPResult:
    beta_tilde: float
    per_component: list
    global_reject: bool
    sub_hypothesis_decisions: dict
    alpha: float
    B: int
    seed: int
    N: int = 0
    d: int = 0
    quantile_mode: str = "signed"
    feasible: bool = True
    flags: list = field(default_factory=list)

    def to_dict(self):
        return asdict(self)


def sphericity_blocks(d):
    """Row partition of the sphericity matrix: equal diagonal | zero off-diagonal."""
    return {"equal_diagonal": list(range(d)), "diagonality": list(range(d, n_full(d)))}


def _quantile_index(b, B, mode):
    """0-based order-statistic index for local level beta = b / B."""
    gamma = 1 - b / (2 * B) if mode == "signed" else 1 - b / B
    k = int(np.ceil(round(gamma * B, 9)))
    return min(max(k, 1), B) - 1


def _thresholds(sorted_draws, b, mode):
    B = sorted_draws.shape[0]
    return sorted_draws[_quantile_index(b, B, mode)]


def _fwer(abs_draws, q):
    return float(np.mean(np.any(abs_draws > q, axis=1)))


def calibrate_beta(draws, alpha, mode="signed"):
    """Largest b/B (b = 0..B-1) with bootstrap FWER <= alpha.

    The FWER is non-decreasing in b, so the downward grid scan reduces to a
    bisection. Returns (beta, thresholds, feasible).
    """
    B = draws.shape[0]
    abs_draws = np.abs(draws)
    sorted_draws = np.sort(draws if mode == "signed" else abs_draws, axis=0)

    def ok(b):
        return _fwer(abs_draws, _thresholds(sorted_draws, b, mode)) <= alpha

    if not ok(0):
        return 0.0, _thresholds(sorted_draws, 0, mode), False
    lo, hi = 0, B - 1  # ok(lo) holds
    if ok(hi):
        lo = hi
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if ok(mid):
            lo = mid
        else:
            hi = mid
    return lo / B, _thresholds(sorted_draws, lo, mode), True


def bootstrap_components(C, Sigma, B, seed, workers=1):
    """B draws of sqrt(N) C Ybar* (shape (B, m)); exact N(0, C Sigma C')."""
    L = psd_factor(Sigma)
    if L.shape[1] == 0:
        raise DegenerateError("estimated covariance of the vectorized sample is zero")
    CL = C @ L

    def block(g, n):
        return g.standard_normal((n, L.shape[1])) @ CL.T

    return _rng.blocked_draws(block, B, seed, _rng.MCTP, workers)


def combined_mctp(X, C=None, alpha=0.05, B=1000, seed=0, blocks=None, quantile_mode="signed",
                  workers=1, moments=None):
    """Multiple contrast test; defaults to the sphericity hypothesis matrix.

    ``blocks`` maps sub-hypothesis names to row indices of ``C``; a block is
    rejected when any of its informative components is.
    """
    if quantile_mode not in ("signed", "absolute"):
        raise DomainError("quantile_mode must be 'signed' or 'absolute'")
    if B < 1:
        raise DomainError("B must be positive")
    if moments is None:
        X = as_sample(X, min_n=3)
        moments = compute_moments(X)
    d = moments.Vhat.shape[0]
    if C is None:
        C = build_hypothesis("Spherical", d).C
        if blocks is None:
            blocks = sphericity_blocks(d)
    C = np.atleast_2d(np.asarray(C, dtype=float))
    if C.shape[0] < 1 or C.shape[1] != moments.vhat.size:
        raise DomainError(f"C must have shape (m, {moments.vhat.size}) with m >= 1")
    N = moments.N

    T = np.sqrt(N) * C @ moments.vhat
    draws = bootstrap_components(C, moments.SigmaHat, B, seed, workers)
    informative = np.any(draws != 0, axis=0)
    flags = []
    if not np.any(informative):
        raise DegenerateError("no component has a non-degenerate bootstrap distribution")
    if not np.all(informative):
        flags.append(f"non-informative components excluded: {np.nonzero(~informative)[0].tolist()}")

    beta, q_inf, feasible = calibrate_beta(draws[:, informative], alpha, quantile_mode)
    if not feasible:
        flags.append("no local level reaches the global level; beta set to 0")
    q = np.full(C.shape[0], np.nan)
    q[informative] = q_inf
    absT = np.abs(T)

    per = []
    for ell in range(C.shape[0]):
        if not informative[ell]:
            per.append(dict(index=ell, T=float(T[ell]), q=None, ratio=None, rejected=False, informative=False))
            continue
        ratio = float(absT[ell] / q[ell]) if q[ell] > 0 else (np.inf if absT[ell] > q[ell] else 0.0)
        per.append(dict(index=ell, T=float(T[ell]), q=float(q[ell]), ratio=ratio,
                        rejected=bool(absT[ell] > q[ell]), informative=True))
    rejected = np.array([c["rejected"] for c in per])
    decisions = {}
    for name, rows in (blocks or {}).items():
        decisions[name] = bool(np.any(rejected[list(rows)]))
    return MCTPResult(beta_tilde=float(beta), per_component=per, global_reject=bool(rejected.any()),
                      sub_hypothesis_decisions=decisions, alpha=alpha, B=int(B), seed=int(seed),
                      N=int(N), d=int(d), quantile_mode=quantile_mode, feasible=feasible, flags=flags)
