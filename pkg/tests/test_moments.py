import numpy as np
import pytest

from covstruct.exceptions import DegenerateError, SampleSizeError
from covstruct.matrix import dvech, sqrt_psd
from covstruct.moments import (
    compute_moments,
    correlation_from_cov,
    estimate_sigma_dv,
    estimate_upsilon_dv,
    jacobian_corr_map,
    sample_moments,
)
from covstruct.structures import autoregressive

from oracles import central_fd, correlation_vector, rel_err, wick_sigma


def gaussian(V, N, seed):
    rng = np.random.default_rng(seed)
    return rng.standard_normal((N, V.shape[0])) @ sqrt_psd(V)


def test_sample_moments_two_points():
    mean, V, v = sample_moments(np.array([[0.0, 0.0], [2.0, 2.0]]))
    assert np.array_equal(mean, [1, 1])
    assert np.array_equal(V, [[2, 2], [2, 2]])
    assert np.array_equal(v, dvech(V))


def test_constant_sample():
    X = np.tile([1.0, 2.0, 3.0], (10, 1))
    assert np.array_equal(sample_moments(X)[1], np.zeros((3, 3)))
    assert np.array_equal(estimate_sigma_dv(X), np.zeros((6, 6)))


def test_sample_size_errors():
    with pytest.raises(SampleSizeError):
        sample_moments(np.ones((1, 3)))
    with pytest.raises(SampleSizeError):
        estimate_sigma_dv(np.ones((2, 3)))


def test_consistency_of_Vhat():
    V1 = autoregressive(0.65, 5)
    _, V, _ = sample_moments(gaussian(V1, 100_000, 1))
    assert np.max(np.abs(V - V1)) < 0.03


def test_wick_identity_d2():
    S = estimate_sigma_dv(gaussian(np.eye(2), 20_000, 2))
    target = np.diag([2.0, 2.0, 1.0])
    assert np.all(np.abs(np.diag(S) - np.diag(target)) / np.diag(target) < 0.05)
    assert np.allclose(wick_sigma(np.eye(2)), target)


def test_wick_oracle_d3():
    V = np.array([[1.0, 0.5, 0.25], [0.5, 1.5, 0.4], [0.25, 0.4, 2.0]])
    S = estimate_sigma_dv(gaussian(V, 20_000, 3))
    W = wick_sigma(V)
    # relative to the diagonal scale so near-zero targets do not dominate
    scale = np.sqrt(np.outer(np.diag(W), np.diag(W)))
    assert np.max(np.abs(S - W) / scale) < 0.07


def test_sigma_psd_and_shift_invariance():
    rng = np.random.default_rng(4)
    X = rng.standard_normal((40, 4)) ** 3
    S = estimate_sigma_dv(X)
    assert np.array_equal(S, S.T)
    w = np.linalg.eigvalsh(S)
    assert w.min() >= -1e-10 * np.abs(w).max()
    assert np.allclose(estimate_sigma_dv(X + [5.0, -3.0, 1.0, 100.0]), S, atol=1e-8)


def test_correlation_examples():
    R, r = correlation_from_cov(np.array([[4.0, 2.0], [2.0, 4.0]]))
    assert R[0, 1] == 0.5 and np.array_equal(r, [0.5])
    assert np.array_equal(correlation_from_cov(np.diag([1.0, 2.0, 3.0]))[1], np.zeros(3))
    V = np.array([[2.0, 0.3, 0.1], [0.3, 1.0, 0.2], [0.1, 0.2, 3.0]])
    D = np.diag([0.5, 2.0, 7.0])
    assert np.allclose(correlation_from_cov(D @ V @ D)[1], correlation_from_cov(V)[1], atol=1e-15)
    with pytest.raises(DegenerateError):
        correlation_from_cov(np.diag([1.0, 0.0]))


def test_corr_jacobian_examples():
    M = jacobian_corr_map(np.eye(2))
    assert np.allclose(M, [[0, 0, 1]])
    M = jacobian_corr_map(np.array([[4.0, 2.0], [2.0, 4.0]]))
    assert M[0, 2] == pytest.approx(0.25) and M[0, 0] == pytest.approx(-0.0625)


@pytest.mark.parametrize("d", [2, 3, 4, 5])
def test_corr_jacobian_fd(d):
    rng = np.random.default_rng(30 + d)
    for _ in range(100):
        A = rng.standard_normal((d, d))
        V = A @ A.T + 0.5 * np.eye(d)
        num = central_fd(lambda v: correlation_vector(v, d), dvech(V))
        assert rel_err(jacobian_corr_map(V), num) < 1e-6


def test_upsilon_bivariate_limit():
    U = estimate_upsilon_dv(gaussian(np.eye(2), 20_000, 5))
    assert U.shape == (1, 1)
    assert abs(U[0, 0] - 1.0) < 0.1


def test_upsilon_scale_invariant():
    rng = np.random.default_rng(6)
    X = rng.standard_normal((200, 4)) @ sqrt_psd(autoregressive(0.4, 4))
    U = estimate_upsilon_dv(X)
    assert np.allclose(U, U.T)
    assert np.linalg.eigvalsh(U).min() > -1e-10
    assert np.max(np.abs(estimate_upsilon_dv(X * [1.0, 3.0, 0.2, 10.0]) - U)) < 1e-8


def test_compute_moments_bundle():
    X = gaussian(autoregressive(0.5, 3), 50, 7)
    m = compute_moments(X, correlation=True)
    assert m.N == 50 and m.SigmaHat.shape == (6, 6) and m.UpsilonHat.shape == (3, 3)
    assert m.point(True)[0] is m.rhat and m.point(False)[1] is m.SigmaHat
    assert compute_moments(X).rhat is None
