import numpy as np
import pytest
from scipy import stats

from covstruct.engine import (
    ats,
    empirical_quantile,
    hotelling_t2,
    linear_replicates,
    make_spec,
    mc_draws,
    mc_pvalue,
    mc_quantile,
    mean_shift_replicates,
    run_structure_test,
    test_from_moments,
)
from covstruct.exceptions import DegenerateError, DomainError, SampleSizeError
from covstruct.hypotheses import build_hypothesis, prune_zero_rows
from covstruct.matrix import dvech, sqrt_psd
from covstruct.moments import compute_moments
from covstruct.structures import autoregressive, v2_toeplitz


def gaussian(V, N, seed):
    return np.random.default_rng(seed).standard_normal((N, V.shape[0])) @ sqrt_psd(V)


def test_empirical_quantile_ceiling():
    x = np.arange(1, 101, dtype=float)
    assert empirical_quantile(x, 0.95) == 95.0
    assert empirical_quantile(x, 0.951) == 96.0
    assert empirical_quantile(x[::-1], 0.0) == 1.0


def test_ats_examples():
    spec = prune_zero_rows(build_hypothesis("Diagonal", 3))
    v = dvech(np.array([[1, 0.5, 0], [0.5, 1, 0], [0, 0, 1.0]]))
    assert ats(v, np.eye(6), spec, 100) == pytest.approx(100 * 0.25 / 3)
    assert ats(v, 4 * np.eye(6), spec, 100) == pytest.approx(100 * 0.25 / 12)
    assert ats(dvech(np.diag([1.0, 2, 3])), np.eye(6), spec, 100) == 0.0
    with pytest.raises(DegenerateError):
        ats(v, np.zeros((6, 6)), spec, 100)


def _sigma_from_eigs(lams):
    """Sigma and C = I with C Sigma C' having eigenvalues ``lams``."""
    Q, _ = np.linalg.qr(np.random.default_rng(0).standard_normal((len(lams), len(lams))))
    return Q @ np.diag(lams) @ Q.T, np.eye(len(lams))


def test_mc_quantile_rank_one():
    S, C = _sigma_from_eigs([3.0, 0.0, 0.0])
    q = mc_quantile(C, S, 0.05, 10_000, seed=11)
    assert abs(q - stats.chi2.ppf(0.95, 1)) < 0.15
    assert abs(stats.chi2.ppf(0.95, 1) - 3.8415) < 1e-4


def test_mc_quantile_two_equal():
    S, C = _sigma_from_eigs([2.0, 2.0])
    q = mc_quantile(C, S, 0.05, 10_000, seed=12)
    target = 0.5 * stats.chi2.ppf(0.95, 2)
    assert target == pytest.approx(2.996, abs=1e-3)
    # mc standard error of the quantile is about 0.05 here
    assert abs(q - target) < 0.15


def test_mc_edge_cases():
    S, C = _sigma_from_eigs([1.0, 0.5])
    assert mc_pvalue(C, S, 1000, 0, 0.0) == 1.0
    with pytest.raises(DegenerateError):
        mc_draws(C, np.zeros((2, 2)), 100, 0)
    # eigenvalues below the relative floor are ignored
    S2, _ = _sigma_from_eigs([1.0, 1e-15])
    S1, _ = _sigma_from_eigs([1.0, 0.0])
    assert np.allclose(mc_draws(C, S2, 50, 3), mc_draws(C, S1, 50, 3))


def _ks(a, b):
    return stats.ks_2samp(a, b).statistic


def test_efficient_vs_literal_linear():
    X = gaussian(v2_toeplitz()[:3, :3], 40, 1)
    m = compute_moments(X)
    spec = make_spec("toeplitz", 3)
    a = linear_replicates(spec.C, m.SigmaHat, m.N, 5000, 1, path="efficient")
    b = linear_replicates(spec.C, m.SigmaHat, m.N, 5000, 2, path="literal")
    assert _ks(a, b) < 0.05


def test_efficient_vs_literal_hstar():
    X = gaussian(autoregressive(0.65, 3), 40, 2)
    m = compute_moments(X)
    spec = make_spec("ar", 3, variant="h")
    a = mean_shift_replicates(spec, m.vhat, m.SigmaHat, m.N, 5000, 1, path="efficient")
    b = mean_shift_replicates(spec, m.vhat, m.SigmaHat, m.N, 5000, 2, path="literal")
    assert _ks(a[np.isfinite(a)], b[np.isfinite(b)]) < 0.05


def test_efficient_vs_literal_gstar():
    X = gaussian(autoregressive(0.65, 3), 40, 3)
    m = compute_moments(X)
    spec = make_spec("ar", 3, variant="g")
    a = mean_shift_replicates(spec, m.vhat, m.SigmaHat, m.N, 5000, 1, path="efficient")
    b = mean_shift_replicates(spec, m.vhat, m.SigmaHat, m.N, 5000, 2, path="literal")
    assert _ks(a, b) < 0.05


@pytest.mark.parametrize("kind,method,variant", [
    ("toeplitz", "boot", "h"), ("toeplitz", "mc", "h"), ("ar", "boot-hstar", "h"),
    ("ar", "boot-hdagger", "g"), ("ar", "boot-hstar", "g"), ("h-ar", "boot", "h"),
])
def test_determinism_across_workers(kind, method, variant):
    X = gaussian(autoregressive(0.65, 5), 60, 4)
    r1 = run_structure_test(X, kind, method=method, reps=2000, seed=9, variant=variant, workers=1)
    r8 = run_structure_test(X, kind, method=method, reps=2000, seed=9, variant=variant, workers=8)
    again = run_structure_test(X, kind, method=method, reps=2000, seed=9, variant=variant, workers=1)
    assert r1 == r8 == again
    assert repr(r1.to_dict()) == repr(r8.to_dict())


def test_result_records_settings():
    X = gaussian(np.eye(3), 30, 5)
    r = run_structure_test(X, "compound-symmetry", method="boot", alpha=0.1, reps=777, seed=3)
    assert (r.alpha, r.reps, r.seed, r.N, r.d, r.method) == (0.1, 777, 3, 30, 3, "BootStandard")
    assert 0 <= r.p_value <= 1 and r.reject == (r.statistic > r.critical_value)
    r = run_structure_test(X, "ar", method="boot", reps=200)
    assert r.method == "BootHStar"


def hadamard_sample():
    """Columns of an 8x8 Hadamard matrix: centered and exactly orthogonal."""
    from scipy.linalg import hadamard
    H = hadamard(8).astype(float)
    return H[:, [1, 2, 3]] * [1.0, 2.0, 3.0]


def test_degenerate_g_forced_rejection():
    X = hadamard_sample()
    assert np.all(np.cov(X, rowvar=False)[[0, 1], [1, 2]] == 0)
    r = run_structure_test(X, "ar", method="boot", variant="g", reps=100)
    assert r.degenerate and r.reject and r.p_value == 0.0
    assert r.statistic == np.inf


def test_method_validation():
    X = gaussian(np.eye(3), 30, 7)
    with pytest.raises(DomainError):
        run_structure_test(X, "toeplitz", method="jackknife")
    with pytest.raises(DomainError):
        run_structure_test(X, "sphericity", domain="corr")
    with pytest.raises(SampleSizeError):
        run_structure_test(np.ones((1, 3)), "toeplitz")
    with pytest.raises(DomainError):
        run_structure_test(X, "toeplitz", reps=0)


def test_zero_sigma_is_degenerate():
    X = np.tile([1.0, 2.0, 3.0], (20, 1))
    with pytest.raises(DegenerateError):
        run_structure_test(X, "toeplitz", method="boot", reps=100)


def _rate(V, kind, N, runs, seed, **kw):
    hits = 0
    for k in range(runs):
        hits += run_structure_test(gaussian(V, N, seed + k), kind, seed=k, **kw).reject
    return hits / runs


def test_level_diagonal():
    rate = _rate(np.diag([1.0, 2.0, 3.0]), "diagonal", 500, 400, 1000, method="boot", reps=500)
    assert 0.02 <= rate <= 0.085


def test_power_compound_symmetry_on_toeplitz():
    rate = _rate(v2_toeplitz(), "compound-symmetry", 250, 100, 2000, method="boot", reps=500)
    assert rate > 0.5


def test_bootstrap_and_mc_critical_values_agree():
    rel = []
    for k in range(100):
        X = gaussian(v2_toeplitz(), 1000, 3000 + k)
        m = compute_moments(X)
        spec = make_spec("toeplitz", 5)
        b = test_from_moments(m, spec, "boot", reps=1000, seed=k).critical_value
        c = test_from_moments(m, spec, "mc", reps=1000, seed=k).critical_value
        rel.append(b / c - 1)
    assert abs(np.mean(rel)) < 0.05


def test_pvalue_monotone_in_violation():
    from covstruct.structures import mixture
    V1, V2 = autoregressive(0.65, 5), v2_toeplitz()
    means = []
    for delta in (0.0, 0.5, 1.0):
        V = mixture(V1, V2, delta)
        p = [run_structure_test(gaussian(V, 250, 4000 + k), "ar", method="boot-hstar", reps=300, seed=k).p_value
             for k in range(60)]
        means.append(np.mean(p))
    assert means[0] > means[1] > means[2]


def test_hotelling():
    X = gaussian(np.eye(2), 50, 8)
    r = hotelling_t2(X, X.mean(0))
    assert r.statistic == pytest.approx(0, abs=1e-20) and r.p_value == pytest.approx(1.0)
    rej = np.mean([hotelling_t2(gaussian(np.eye(2), 1000, 5000 + k), [0, 0]).reject for k in range(400)])
    assert 0.02 < rej < 0.09
    assert hotelling_t2(gaussian(np.eye(2), 100, 9), [1, 1]).p_value < 1e-10
    with pytest.raises(DomainError):
        hotelling_t2(X, [0, 0, 0])
