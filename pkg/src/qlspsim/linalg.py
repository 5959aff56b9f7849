"""Dense complex linear algebra: Jacobi SVD and eigendecomposition, e^{-iMt},
Chebyshev evaluation and a few state-vector helpers.

Matrices are plain ``numpy`` complex arrays; the rotation sweeps run in the
compiled kernel when it is available (see :mod:`qlspsim._backend`).
"""
from __future__ import annotations

from typing import NamedTuple

import numpy as np

from . import _backend
from .constants import HERMITIAN_TOL, JACOBI_MAX_SWEEPS
from .errors import InputValidationError, NumericalFailureError

_EPS = np.finfo(float).eps


class SvdResult(NamedTuple):
    """``M = S @ diag(D) @ V^dagger`` with full square ``S`` and ``V``."""

    S: np.ndarray
    D: np.ndarray
    V: np.ndarray
    sweeps: int = 0

    def sigma_matrix(self, shape):
        out = np.zeros(shape, dtype=complex)
        k = len(self.D)
        out[:k, :k] = np.diag(self.D)
        return out

    def reconstruct(self):
        m, n = self.S.shape[0], self.V.shape[0]
        return self.S @ self.sigma_matrix((m, n)) @ self.V.conj().T


class EigResult(NamedTuple):
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    sweeps: int = 0


def as_matrix(M) -> np.ndarray:
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] < 1 or M.shape[1] < 1:
        raise InputValidationError(f"expected a non-empty 2-d matrix, got shape {M.shape}")
    M = M.astype(np.complex128, copy=False)
    if not np.all(np.isfinite(M)):
        raise InputValidationError("matrix has non-finite entries")
    return M


def hermitian_defect(M) -> float:
    M = np.asarray(M)
    if M.shape[0] != M.shape[1]:
        return np.inf
    return float(np.max(np.abs(M - M.conj().T), initial=0.0))


def is_hermitian(M, tol=HERMITIAN_TOL) -> bool:
    M = np.asarray(M)
    return hermitian_defect(M) <= tol * max(1.0, float(np.max(np.abs(M), initial=0.0)))


def _complete_basis(Q, k):
    """Fill columns k.. of the m x m array ``Q`` with an orthonormal complement."""
    m = Q.shape[0]
    col = k
    for e in range(m):
        if col == m:
            break
        v = np.zeros(m, dtype=complex)
        v[e] = 1.0
        for _ in range(2):
            v -= Q[:, :col] @ (Q[:, :col].conj().T @ v)
        nv = np.linalg.norm(v)
        if nv > 1e-8:
            Q[:, col] = v / nv
            col += 1
    return Q


def svd(M) -> SvdResult:
    """Full singular value decomposition by one-sided Jacobi.

    ``V`` is always the full ``cols x cols`` unitary, so for an ``N x (N+1)``
    input the right null vector is the last column of ``V``.
    """
    M = as_matrix(M)
    m, n = M.shape
    tol = _EPS * max(m, n)
    G, V, sweeps = _backend.kernels.jacobi_svd(M, tol, JACOBI_MAX_SWEEPS)
    if G is None:
        raise NumericalFailureError(
            f"one-sided Jacobi SVD did not converge in {sweeps} sweeps", iterations=sweeps
        )
    norms = np.linalg.norm(G, axis=0)
    order = np.argsort(-norms, kind="stable")
    norms = norms[order]
    G = G[:, order]
    V = V[:, order]
    r = min(m, n)
    D = norms[:r].copy()
    S = np.zeros((m, m), dtype=complex)
    cutoff = max(m, n) * _EPS * (D[0] if r else 0.0)
    k = 0
    for i in range(r):
        if D[i] <= cutoff or D[i] == 0.0:
            break
        S[:, i] = G[:, i] / D[i]
        k += 1
    _complete_basis(S, k)
    return SvdResult(S, D, np.ascontiguousarray(V), sweeps)


def eig_hermitian(M) -> EigResult:
    """Eigenvalues (ascending) and orthonormal eigenvectors of a Hermitian matrix."""
    M = as_matrix(M)
    if M.shape[0] != M.shape[1]:
        raise InputValidationError(f"eig_hermitian needs a square matrix, got {M.shape}")
    defect = hermitian_defect(M)
    if defect > HERMITIAN_TOL * max(1.0, float(np.max(np.abs(M)))):
        raise InputValidationError(f"matrix is not Hermitian: max |M - M^dagger| = {defect:.3e}")
    M = 0.5 * (M + M.conj().T)
    w, V, sweeps = _backend.kernels.jacobi_eigh(M, _EPS, JACOBI_MAX_SWEEPS)
    if w is None:
        raise NumericalFailureError(
            f"Jacobi eigensolver did not converge in {sweeps} sweeps", iterations=sweeps
        )
    order = np.argsort(w, kind="stable")
    return EigResult(w[order], np.ascontiguousarray(V[:, order]), sweeps)


def expm_i(M, t: float, eig: EigResult | None = None) -> np.ndarray:
    """``exp(-i M t)`` for Hermitian ``M``; pass ``eig`` to reuse a decomposition."""
    if eig is None:
        eig = eig_hermitian(M)
    U = eig.eigenvectors
    return (U * np.exp(-1j * eig.eigenvalues * t)) @ U.conj().T


def evolve(eig: EigResult, t: float, state) -> np.ndarray:
    """``exp(-i M t) @ state`` through cached eigendata, without forming the matrix."""
    U = eig.eigenvectors
    return U @ (np.exp(-1j * eig.eigenvalues * t) * (U.conj().T @ state))


def chebyshev_T(k: int, y):
    """First-kind Chebyshev polynomial T_k(y), valid for any real y.

    Inside [-1, 1] uses cos(k arccos y); outside uses sign(y)^k cosh(k arccosh|y|),
    which cannot overflow before the true value does.
    """
    if k < 0:
        raise InputValidationError("Chebyshev degree must be non-negative")
    y = np.asarray(y, dtype=float)
    ay = np.abs(y)
    inside = ay <= 1.0
    with np.errstate(over="ignore", invalid="ignore"):
        cin = np.cos(k * np.arccos(np.clip(y, -1.0, 1.0)))
        sgn = np.where((y < 0) & (k % 2 == 1), -1.0, 1.0)
        cout = sgn * np.cosh(k * np.arccosh(np.maximum(ay, 1.0)))
    out = np.where(inside, cin, cout)
    return float(out) if out.ndim == 0 else out


def chebyshev_T_recurrence(k: int, y):
    y = np.asarray(y, dtype=float)
    t0, t1 = np.ones_like(y), y.copy()
    if k == 0:
        return t0
    for _ in range(k - 1):
        t0, t1 = t1, 2 * y * t1 - t0
    return t1


def normalize(v) -> np.ndarray:
    v = np.asarray(v, dtype=complex)
    nv = np.linalg.norm(v)
    if nv == 0 or not np.isfinite(nv):
        raise InputValidationError("cannot normalize a zero or non-finite vector")
    return v / nv


def fidelity(a, b) -> float:
    """|<a|b>|^2 for normalized copies of ``a`` and ``b``."""
    return float(np.cos(angle(a, b)) ** 2)


def infidelity(a, b) -> float:
    """1 - fidelity, computed without cancellation."""
    return float(np.sin(angle(a, b)) ** 2)


def angle(a, b) -> float:
    """Angle between the complex lines spanned by ``a`` and ``b`` (radians)."""
    a = normalize(a)
    b = normalize(b)
    c = min(1.0, abs(np.vdot(a, b)))
    # sin form is accurate for nearly parallel vectors
    s = np.linalg.norm(b - a * np.vdot(a, b))
    return float(np.arctan2(s, c))


def unitarity_defect(U) -> float:
    U = np.asarray(U)
    return float(np.max(np.abs(U.conj().T @ U - np.eye(U.shape[1]))))
