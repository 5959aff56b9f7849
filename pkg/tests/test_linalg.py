import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qlspsim import linalg
from qlspsim.errors import InputValidationError

from conftest import random_complex


def test_svd_rectangular_hand_example(backend):
    r = linalg.svd([[1, 0, 1], [0, 1, 0]])
    np.testing.assert_allclose(r.D, [np.sqrt(2), 1.0], atol=1e-14)
    null = r.V[:, -1]
    assert linalg.angle(null, [1, 0, -1]) < 1e-14
    assert r.V.shape == (3, 3)


@pytest.mark.parametrize("M, expected", [(np.eye(3), [1, 1, 1]), (np.diag([3.0, 2.0, 1.0]), [3, 2, 1]),
                                         (np.diag([1.0, 3.0, 2.0]), [3, 2, 1])])
def test_svd_trivial(backend, M, expected):
    np.testing.assert_allclose(linalg.svd(M).D, expected, atol=1e-14)


@pytest.mark.parametrize("shape", [(1, 1), (1, 4), (4, 1), (5, 6), (16, 17), (33, 20)])
def test_svd_invariants(backend, shape):
    rng = np.random.default_rng(sum(shape))
    M = random_complex(rng, *shape)
    r = linalg.svd(M)
    assert np.linalg.norm(r.reconstruct() - M) <= 1e-10 * max(1, r.D[0])
    assert np.all(np.diff(r.D) <= 0) and np.all(r.D >= 0)
    assert linalg.unitarity_defect(r.S) < 1e-10
    assert linalg.unitarity_defect(r.V) < 1e-10


def test_svd_rank_deficient(backend):
    rng = np.random.default_rng(1)
    u = random_complex(rng, 6, 2)
    M = u @ random_complex(rng, 2, 7)
    r = linalg.svd(M)
    assert r.D[2:].max() < 1e-12 * r.D[0]
    assert linalg.unitarity_defect(r.S) < 1e-10
    assert np.linalg.norm(r.reconstruct() - M) < 1e-10 * r.D[0]


def test_svd_rejects_non_finite():
    with pytest.raises(InputValidationError):
        linalg.svd([[1.0, np.nan]])
    with pytest.raises(InputValidationError):
        linalg.svd(np.zeros((0, 3)))


def test_eig_examples(backend):
    np.testing.assert_allclose(linalg.eig_hermitian(np.diag([2.0, -1.0, 0.0])).eigenvalues, [-1, 0, 2])
    r = linalg.eig_hermitian([[0, 1], [1, 0]])
    np.testing.assert_allclose(r.eigenvalues, [-1, 1], atol=1e-15)
    assert linalg.angle(r.eigenvectors[:, 0], [1, -1]) < 1e-14
    assert linalg.angle(r.eigenvectors[:, 1], [1, 1]) < 1e-14


def test_eig_dilation_of_hand_example(backend, hand_system):
    ev = linalg.eig_hermitian(hand_system.B).eigenvalues
    np.testing.assert_allclose(ev, [-np.sqrt(2), -1, 0, 1, np.sqrt(2)], atol=1e-14)


def test_eig_rejects_non_hermitian():
    with pytest.raises(InputValidationError, match="1.000e\\+00"):
        linalg.eig_hermitian([[0, 1], [0, 0]])


@pytest.mark.parametrize("n", [1, 2, 7, 40])
def test_eig_residuals(backend, n):
    rng = np.random.default_rng(n)
    G = random_complex(rng, n, n)
    H = G + G.conj().T
    r = linalg.eig_hermitian(H)
    lam_max = np.max(np.abs(r.eigenvalues))
    for j in range(n):
        u = r.eigenvectors[:, j]
        assert np.linalg.norm(H @ u - r.eigenvalues[j] * u) <= 1e-10 * max(1, lam_max)
    assert np.all(np.diff(r.eigenvalues) >= 0)
    assert linalg.unitarity_defect(r.eigenvectors) < 1e-10


def test_eig_degenerate(backend):
    rng = np.random.default_rng(3)
    Q = np.linalg.qr(random_complex(rng, 6, 6))[0]
    H = Q @ np.diag([1, 1, 1, -2, -2, 0.5]) @ Q.conj().T
    r = linalg.eig_hermitian(H)
    np.testing.assert_allclose(r.eigenvalues, [-2, -2, 0.5, 1, 1, 1], atol=1e-13)


def test_expm_examples():
    np.testing.assert_allclose(linalg.expm_i(np.zeros((3, 3)), 1.7), np.eye(3), atol=1e-15)
    np.testing.assert_allclose(linalg.expm_i([[1.0]], np.pi), [[-1.0]], atol=1e-15)
    X = np.array([[0, 1], [1, 0]])
    np.testing.assert_allclose(linalg.expm_i(X, np.pi / 2), -1j * X, atol=1e-15)


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 12), st.floats(-3, 3), st.floats(-3, 3), st.integers(0, 2**31))
def test_expm_group_property(n, t1, t2, seed):
    rng = np.random.default_rng(seed)
    G = random_complex(rng, n, n)
    H = (G + G.conj().T) / 2
    U1, U2 = linalg.expm_i(H, t1), linalg.expm_i(H, t2)
    assert np.max(np.abs(U1 @ U2 - linalg.expm_i(H, t1 + t2))) < 1e-9
    assert linalg.unitarity_defect(U1) < 1e-10


def test_evolve_matches_expm():
    rng = np.random.default_rng(0)
    G = random_complex(rng, 9, 9)
    H = G + G.conj().T
    psi = linalg.normalize(random_complex(rng, 9))
    eig = linalg.eig_hermitian(H)
    np.testing.assert_allclose(linalg.evolve(eig, 0.37, psi), linalg.expm_i(H, 0.37) @ psi, atol=1e-12)


@pytest.mark.parametrize("k, y, expected", [(0, 0.3, 1.0), (0, 5.0, 1.0), (3, 0.5, -1.0), (2, 2.0, 7.0),
                                            (3, -2.0, -26.0), (1, -4.0, -4.0)])
def test_chebyshev_values(k, y, expected):
    assert linalg.chebyshev_T(k, y) == pytest.approx(expected, abs=1e-12)


def test_chebyshev_against_recurrence():
    y = np.linspace(-3, 3, 601)
    for k in range(61):
        ref = linalg.chebyshev_T_recurrence(k, y)
        got = linalg.chebyshev_T(k, y)
        assert np.all(np.abs(got - ref) <= 1e-12 * np.maximum(1.0, np.abs(ref)))


def test_chebyshev_large_argument_does_not_overflow_early():
    assert np.isfinite(linalg.chebyshev_T(400, 1.5))
    assert linalg.chebyshev_T(401, -1.5) < 0


@given(st.lists(st.complex_numbers(max_magnitude=1e3, allow_nan=False, allow_infinity=False), min_size=1,
                max_size=20).filter(lambda v: np.linalg.norm(v) > 1e-3))
def test_normalize(v):
    assert abs(np.linalg.norm(linalg.normalize(v)) - 1) <= 1e-10


def test_normalize_zero():
    with pytest.raises(InputValidationError):
        linalg.normalize([0, 0])


def test_fidelity_and_angle():
    a = np.array([1, 0], complex)
    b = np.array([1, 1e-9], complex)
    assert linalg.infidelity(a, b) == pytest.approx(1e-18, rel=1e-6)
    assert linalg.fidelity(a, 1j * a) == pytest.approx(1.0)
    assert linalg.fidelity(a, [0, 1]) == pytest.approx(0.0, abs=1e-30)
