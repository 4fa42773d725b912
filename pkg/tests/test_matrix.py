import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from covstruct.exceptions import DimensionError, NotPSDError, NumericError
from covstruct.matrix import (
    centering_P,
    diag_index,
    direct_sum,
    dvech,
    dvech_inv,
    dvech_upper,
    n_full,
    permutation_A,
    permutation_A_upper,
    segment_slices,
    sqrt_psd,
    sym_eigen,
    vech,
    vech_upper,
)
from covstruct.structures import autoregressive


def random_sym(rng, d):
    M = rng.standard_normal((d, d))
    return M + M.T


def rowwise_vech(M, k=0):
    """Independent enumerator of the row-wise upper triangle."""
    d = M.shape[0]
    return np.array([M[i, j] for i in range(d) for j in range(i + k, d)])


def test_dvech_examples():
    M = np.array([[1, 2, 3], [2, 4, 5], [3, 5, 6]], float)
    assert np.array_equal(dvech(M), [1, 4, 6, 2, 5, 3])
    assert np.array_equal(dvech(np.eye(2)), [1, 1, 0])
    assert np.allclose(dvech(autoregressive(0.65, 3)), [1, 1, 1, 0.65, 0.65, 0.4225], atol=1e-15)


def test_dvech_upper_examples():
    assert np.array_equal(dvech_upper(np.array([[1, 0.5], [0.5, 1]])), [0.5])
    assert np.allclose(dvech_upper(autoregressive(0.65, 3)), [0.65, 0.65, 0.4225], atol=1e-15)
    assert np.array_equal(dvech_upper(np.eye(3)), [0, 0, 0])


def test_dvech_inv_examples():
    assert np.array_equal(dvech_inv([1, 4, 6, 2, 5, 3]), [[1, 2, 3], [2, 4, 5], [3, 5, 6]])
    assert np.array_equal(dvech_inv([1, 1, 0]), np.eye(2))
    assert np.array_equal(dvech_inv([0.5], diagonal=np.ones(2)), [[1, 0.5], [0.5, 1]])


def test_dvech_inv_length_mismatch():
    with pytest.raises(DimensionError):
        dvech_inv(np.ones(4))


def test_asymmetric_input_rejected():
    with pytest.raises(DimensionError):
        dvech(np.array([[1.0, 2.0], [0.0, 1.0]]))


def test_diag_index_and_segments():
    # 1-based starts of each superdiagonal for d = 4: 1, 5, 8, 10
    assert list(diag_index(4)) == [1, 5, 8, 10]
    assert [s.stop - s.start for s in segment_slices(4)] == [4, 3, 2, 1]
    assert [s.stop - s.start for s in segment_slices(4, upper=True)] == [3, 2, 1]


def test_permutation_A_d2():
    A = permutation_A(2)
    assert np.array_equal(A, [[1, 0, 0], [0, 0, 1], [0, 1, 0]])
    v11, v12, v22 = 1.0, 2.0, 3.0
    assert np.array_equal(A @ [v11, v12, v22], [v11, v22, v12])


@pytest.mark.parametrize("d", range(2, 9))
def test_permutation_matrices(d):
    rng = np.random.default_rng(d)
    A, Au = permutation_A(d), permutation_A_upper(d)
    for P in (A, Au):
        assert np.all(P.sum(axis=0) == 1) and np.all(P.sum(axis=1) == 1)
        assert np.max(np.abs(P @ P.T - np.eye(P.shape[0]))) < 1e-12
    M = random_sym(rng, d)
    assert np.array_equal(vech(M), rowwise_vech(M))
    assert np.array_equal(vech_upper(M), rowwise_vech(M, 1))
    assert np.max(np.abs(A @ rowwise_vech(M) - dvech(M))) < 1e-12
    assert np.max(np.abs(Au @ rowwise_vech(M, 1) - dvech_upper(M))) < 1e-12


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 8), st.integers(0, 2**31))
def test_roundtrip_exact(d, seed):
    M = random_sym(np.random.default_rng(seed), d)
    assert np.array_equal(dvech_inv(dvech(M)), M)
    assert np.array_equal(dvech_inv(dvech_upper(M), diagonal=np.diag(M)), M)
    assert dvech(M).size == n_full(d)


def test_centering_examples():
    assert np.allclose(centering_P(2), [[0.5, -0.5], [-0.5, 0.5]])
    assert np.array_equal(centering_P(1), [[0.0]])
    assert np.allclose(centering_P(5) @ np.ones(5), 0, atol=1e-15)


@pytest.mark.parametrize("n", [1, 2, 3, 7, 15])
def test_centering_idempotent(n):
    P = centering_P(n)
    assert np.array_equal(P, P.T)
    assert np.max(np.abs(P @ P - P)) < 1e-12


def test_direct_sum_examples():
    D = direct_sum([np.zeros((2, 2)), np.eye(1)])
    E = np.zeros((3, 3))
    E[2, 2] = 1
    assert np.array_equal(D, E)
    D = direct_sum([centering_P(2), centering_P(1)])
    assert np.allclose(D[:2, :2], [[0.5, -0.5], [-0.5, 0.5]]) and D[2, 2] == 0 and np.all(D[:2, 2] == 0)
    assert np.array_equal(direct_sum([np.eye(2), np.eye(3)]), np.eye(5))
    with pytest.raises(DimensionError):
        direct_sum([])


def test_sym_eigen_examples():
    assert np.allclose(sym_eigen(np.eye(3))[0], [1, 1, 1])
    assert np.allclose(sym_eigen(np.diag([2.0, 1.0]))[0], [2, 1])
    assert np.allclose(sym_eigen(np.ones((2, 2)))[0], [2, 0], atol=1e-14)
    with pytest.raises(NumericError):
        sym_eigen(np.array([[np.nan, 0], [0, 1.0]]))


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 10), st.integers(0, 2**31))
def test_sym_eigen_reconstruction(d, seed):
    M = random_sym(np.random.default_rng(seed), d)
    w, Q = sym_eigen(M)
    assert np.all(np.diff(w) <= 0)
    assert np.max(np.abs(Q @ np.diag(w) @ Q.T - M)) < 1e-10 * (1 + np.max(np.abs(M)))


def test_sqrt_psd_examples():
    assert np.allclose(sqrt_psd(np.eye(4)), np.eye(4))
    assert np.allclose(sqrt_psd(np.diag([4.0, 9.0])), np.diag([2.0, 3.0]))
    assert np.allclose(sqrt_psd(np.ones((2, 2))), np.full((2, 2), 0.5) * np.sqrt(2))
    with pytest.raises(NotPSDError):
        sqrt_psd(np.diag([1.0, -1.0]))


def test_sqrt_psd_clamps_tiny_negative():
    M = np.ones((3, 3)) + np.diag([0, 0, -1e-14])
    S = sqrt_psd(M)
    assert np.allclose(S @ S, M, atol=1e-8)
