"""Linear-system instances, the augmented matrix C = (A | b/beta), its Hermitian
dilation B, and checks of the spectral facts the solvers rely on.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import linalg
from .constants import (
    DEGENERATE_LAST_TOL,
    GAP_TOL,
    INTERLACE_SLACK,
    KAPPA_TOL,
    NORM_A_TOL,
    NULL_SINGULAR_TOL,
    RANK_TOL,
    SIGMA_MAX_TOL,
    SPECTRUM_PAIRING_TOL,
    NULL_ANGLE_TOL,
)
from .errors import (
    DegenerateDecompositionError,
    InputValidationError,
    InvalidSparsityError,
    RankDeficiencyError,
)

SPECTRUM_SHAPES = ("geometric", "two_cluster", "linear")


@dataclass(frozen=True, eq=False)
class LseInstance:
    A: np.ndarray
    b: np.ndarray
    kappa: float
    sparsity: int
    seed: int
    spectrum_shape: str = "geometric"

    @property
    def N(self) -> int:
        return self.A.shape[0]

    def to_dict(self) -> dict:
        return {
            "N": self.N,
            "kappa": float(self.kappa),
            "s": int(self.sparsity),
            "seed": int(self.seed),
            "spectrum_shape": self.spectrum_shape,
            "A": [[float(z.real), float(z.imag)] for z in self.A.ravel()],
            "b": [[float(z.real), float(z.imag)] for z in self.b],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "LseInstance":
        try:
            N = int(d["N"])
            A = np.array([complex(re, im) for re, im in d["A"]], dtype=complex)
            b = np.array([complex(re, im) for re, im in d["b"]], dtype=complex)
            kappa = float(d["kappa"])
            s = int(d["s"])
            seed = int(d["seed"])
            shape = str(d.get("spectrum_shape", "geometric"))
        except (KeyError, TypeError, ValueError) as exc:
            raise InputValidationError(f"malformed instance record: {exc!r}") from exc
        if A.size != N * N:
            raise InputValidationError(f"A has {A.size} entries, expected N*N = {N * N}")
        if b.size != N:
            raise InputValidationError(f"b has {b.size} entries, expected N = {N}")
        inst = cls(A.reshape(N, N), b, kappa, s, seed, shape)
        validate_instance(inst)
        return inst

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "LseInstance":
        try:
            d = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InputValidationError(f"instance is not valid JSON: {exc}") from exc
        return cls.from_dict(d)

    def save(self, path) -> Path:
        path = Path(path)
        path.write_text(self.to_json())
        return path

    @classmethod
    def load(cls, path) -> "LseInstance":
        return cls.from_json(Path(path).read_text())

    def same_as(self, other: "LseInstance") -> bool:
        return (
            np.array_equal(self.A, other.A)
            and np.array_equal(self.b, other.b)
            and self.kappa == other.kappa
            and self.sparsity == other.sparsity
            and self.seed == other.seed
            and self.spectrum_shape == other.spectrum_shape
        )


def validate_instance(inst: LseInstance) -> None:
    A, b = inst.A, inst.b
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] < 2:
        raise InputValidationError(f"A must be square with N >= 2, got {A.shape}")
    if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b))):
        raise InputValidationError("instance has non-finite entries")
    if inst.kappa < 1:
        raise InputValidationError(f"kappa must be >= 1, got {inst.kappa}")
    if abs(np.linalg.norm(b) - 1.0) > NORM_A_TOL:
        raise InputValidationError(f"b must be a unit vector, |b| = {np.linalg.norm(b)!r}")
    sv = linalg.svd(A).D
    if sv[0] > 1.0 + NORM_A_TOL:
        raise InputValidationError(f"|A| = {sv[0]!r} exceeds 1")
    if sv[-1] < RANK_TOL:
        raise RankDeficiencyError(f"A is singular: smallest singular value {sv[-1]:.3e}")
    if abs(sv[0] / sv[-1] - inst.kappa) > KAPPA_TOL * max(1.0, inst.kappa):
        raise InputValidationError(
            f"stored kappa {inst.kappa} does not match cond(A) = {sv[0] / sv[-1]!r}"
        )
    if not 2 <= inst.sparsity <= A.shape[0] + 1:
        raise InvalidSparsityError(f"sparsity {inst.sparsity} outside [2, N+1]")
    if row_sparsity(augmented_matrix(A, b, 1.0)) > inst.sparsity:
        raise InvalidSparsityError("C has rows with more nonzeros than the stored sparsity")
    if inst.spectrum_shape not in SPECTRUM_SHAPES:
        raise InputValidationError(f"unknown spectrum shape {inst.spectrum_shape!r}")


def singular_profile(N: int, kappa: float, shape: str) -> np.ndarray:
    """Target singular values of A, descending, from 1 down to 1/kappa."""
    j = np.arange(N, dtype=float)
    if shape == "geometric":
        sv = kappa ** (-j / (N - 1))
    elif shape == "linear":
        sv = 1.0 - (1.0 - 1.0 / kappa) * j / (N - 1)
    elif shape == "two_cluster":
        # N-1 values packed in [0.9, 1] and one isolated at 1/kappa
        spread = 0.1 * (1.0 - 1.0 / kappa)
        sv = 1.0 - spread * j / max(N - 2, 1)
        sv[-1] = 1.0 / kappa
    else:
        raise InputValidationError(f"unknown spectrum shape {shape!r}")
    sv[0] = 1.0
    sv[-1] = 1.0 / kappa
    return sv


def _givens_unitary(m: int, rng: np.random.Generator, passes: int = 2) -> np.ndarray:
    """Random m x m unitary built as a product of complex Givens rotations."""
    U = np.diag(np.exp(2j * np.pi * rng.random(m)))
    for _ in range(passes):
        for p in range(m - 1):
            for q in range(p + 1, m):
                th = np.arccos(np.sqrt(rng.random()))
                phi = 2 * np.pi * rng.random()
                c, s = np.cos(th), np.sin(th) * np.exp(1j * phi)
                rp = U[p].copy()
                U[p] = c * rp - np.conj(s) * U[q]
                U[q] = s * rp + c * U[q]
    return U


def generate_instance(
    N: int, kappa: float, s: int, seed: int, spectrum_shape: str = "geometric"
) -> LseInstance:
    """Random A with prescribed singular values and at most s-1 nonzeros per row.

    A = P_r blockdiag(U_i diag(sv_i) W_i^dagger) P_c with block size s-1, so each
    row of C = (A | b/beta) has at most s nonzeros. The block factors are exact
    unitaries (Givens products), so |A| <= 1 and cond(A) = kappa by construction.
    """
    if N < 2:
        raise InputValidationError(f"N must be >= 2, got {N}")
    if kappa < 1:
        raise InputValidationError(f"kappa must be >= 1, got {kappa}")
    if s < 2:
        raise InvalidSparsityError(f"sparsity {s} < 2: each row of C needs the b entry and one A entry")
    if s > N + 1:
        raise InvalidSparsityError(f"sparsity {s} exceeds N+1 = {N + 1}")
    rng = np.random.default_rng(seed)
    sv = singular_profile(N, float(kappa), spectrum_shape)
    block = min(N, s - 1)
    positions = rng.permutation(N)
    sv_at = np.empty(N)
    sv_at[positions] = sv
    A_core = np.zeros((N, N), dtype=complex)
    for start in range(0, N, block):
        idx = np.arange(start, min(start + block, N))
        m = len(idx)
        U = _givens_unitary(m, rng)
        W = _givens_unitary(m, rng)
        A_core[np.ix_(idx, idx)] = (U * sv_at[idx]) @ W.conj().T
    rows = rng.permutation(N)
    cols = rng.permutation(N)
    A = A_core[rows][:, cols]
    b = rng.normal(size=N) + 1j * rng.normal(size=N)
    b /= np.linalg.norm(b)
    return LseInstance(A, b, float(kappa), int(s), int(seed), spectrum_shape)


def augmented_matrix(A, b, beta: float) -> np.ndarray:
    return np.hstack([np.asarray(A, dtype=complex), (np.asarray(b, dtype=complex) / beta)[:, None]])


def hermitian_dilation(C) -> np.ndarray:
    """B = [[0, C], [C^dagger, 0]]."""
    C = np.asarray(C, dtype=complex)
    m, n = C.shape
    B = np.zeros((m + n, m + n), dtype=complex)
    B[:m, m:] = C
    B[m:, :m] = C.conj().T
    return B


def row_sparsity(C, tol=0.0) -> int:
    return int(np.max(np.sum(np.abs(np.asarray(C)) > tol, axis=1)))


def classical_solve(A, b) -> np.ndarray:
    """Ground-truth solution by LU with partial pivoting (LAPACK gesv)."""
    return np.linalg.solve(np.asarray(A, dtype=complex), np.asarray(b, dtype=complex))


@dataclass(eq=False)
class AugmentedSystem:
    inst: LseInstance
    beta: float
    C: np.ndarray
    B: np.ndarray
    svd_C: linalg.SvdResult
    sigma_bar: np.ndarray
    gap: float
    alpha: float
    _eig_B: linalg.EigResult | None = field(default=None, repr=False)

    @property
    def N(self) -> int:
        return self.C.shape[0]

    @property
    def sigma(self) -> np.ndarray:
        """Singular values of C, sigma_1 >= ... >= sigma_N (sigma_{N+1} = 0 omitted)."""
        return self.svd_C.D

    @property
    def null_vector(self) -> np.ndarray:
        """v_{N+1}: right singular vector of C with singular value 0."""
        return self.svd_C.V[:, -1]

    @property
    def sigma_null(self) -> float:
        return float(np.linalg.norm(self.C @ self.null_vector))

    @property
    def target_state(self) -> np.ndarray:
        """|v_{N+1}> = (0_N, v_{N+1}) in the (2N+1)-dimensional register, phase-fixed."""
        v = _phase_fix(self.null_vector)
        return np.concatenate([np.zeros(self.N, dtype=complex), v])

    @property
    def initial_state(self) -> np.ndarray:
        """|1> = (0, ..., 0, 1)."""
        e = np.zeros(2 * self.N + 1, dtype=complex)
        e[-1] = 1.0
        return e

    @property
    def delta_star(self) -> float:
        return 1.0 / self.inst.kappa

    def eig_B(self) -> linalg.EigResult:
        if self._eig_B is None:
            self._eig_B = linalg.eig_hermitian(self.B)
        return self._eig_B


def augment(inst: LseInstance, beta: float) -> AugmentedSystem:
    if not beta > 0:
        raise InputValidationError(f"beta must be positive, got {beta}")
    sigma_bar = linalg.svd(inst.A).D
    if sigma_bar[-1] < RANK_TOL:
        raise RankDeficiencyError(f"A is singular within tolerance: sigma_bar_N = {sigma_bar[-1]:.3e}")
    C = augmented_matrix(inst.A, inst.b, beta)
    svd_C = linalg.svd(C)
    sigma_null = float(np.linalg.norm(C @ svd_C.V[:, -1]))
    gap = float(svd_C.D[-1] - sigma_null)
    # triangle bound |C| <= |A| + |b|/beta with |b| = 1; with |A| <= 1 and beta >= 1 it is at most 2
    alpha = float(sigma_bar[0] + 1.0 / beta)
    if beta >= 1.0:
        alpha = min(alpha, 2.0)
    return AugmentedSystem(inst, float(beta), C, hermitian_dilation(C), svd_C, sigma_bar, gap, alpha)


def _phase_fix(v) -> np.ndarray:
    """Multiply by the global phase that makes the last entry real and positive."""
    last = v[-1]
    if abs(last) == 0:
        return np.asarray(v, dtype=complex)
    return np.asarray(v, dtype=complex) * (abs(last) / last)


@dataclass(frozen=True, eq=False)
class NullVectorReport:
    angle: float
    residual: float


def verify_theorem1(sys: AugmentedSystem, x_classical) -> NullVectorReport:
    """Angle between v_{N+1} and (x, -beta), plus |C v_{N+1}|."""
    target = np.concatenate([np.asarray(x_classical, dtype=complex), [-sys.beta]])
    return NullVectorReport(linalg.angle(sys.null_vector, target), sys.sigma_null)


def interlaces(sigma, sigma_bar, sigma_null=0.0, slack=INTERLACE_SLACK) -> bool:
    """sigma_1 >= sbar_1 >= sigma_2 >= ... >= sigma_N >= sbar_N > sigma_{N+1}."""
    sigma = np.asarray(sigma, dtype=float)
    sigma_bar = np.asarray(sigma_bar, dtype=float)
    if len(sigma) != len(sigma_bar):
        return False
    chain = np.empty(2 * len(sigma))
    chain[0::2] = sigma
    chain[1::2] = sigma_bar
    if np.any(np.diff(chain) > slack):
        return False
    return bool(sigma_null <= slack and sigma_bar[-1] > sigma_null + slack)


def verify_interlacing(inst: LseInstance, sys: AugmentedSystem) -> bool:
    return interlaces(sys.sigma, linalg.svd(inst.A).D, sys.sigma_null)


def verify_gap(sys: AugmentedSystem) -> bool:
    return sys.gap >= 1.0 / sys.inst.kappa - GAP_TOL


def verify_sigma_max(sys: AugmentedSystem) -> bool:
    """Triangle bound sigma_1(C) <= sbar_1 + 1/beta (and <= 2 when beta >= 1)."""
    ok = sys.sigma[0] <= sys.sigma_bar[0] + 1.0 / sys.beta + SIGMA_MAX_TOL
    if sys.beta >= 1:
        ok = ok and sys.sigma[0] <= 2.0 + SIGMA_MAX_TOL
    return bool(ok)


def dilation_spectrum_defect(sys: AugmentedSystem) -> float:
    """max deviation between eig(B) and the multiset {-sigma_i} U {0} U {sigma_i}."""
    expected = np.sort(np.concatenate([-sys.sigma, [0.0], sys.sigma]))
    return float(np.max(np.abs(sys.eig_B().eigenvalues - expected)))


def zero_eigenvector_defect(sys: AugmentedSystem) -> float:
    """Distance (up to phase) between B's 0-eigenvector and (0_N, v_{N+1})."""
    eig = sys.eig_B()
    j = int(np.argmin(np.abs(eig.eigenvalues)))
    u = eig.eigenvectors[:, j]
    return float(np.sin(linalg.angle(u, sys.target_state)))


def dilation_gap(sys: AugmentedSystem) -> float:
    """Distance from the 0 eigenvalue of B to its nearest neighbour."""
    ev = sys.eig_B().eigenvalues
    j = int(np.argmin(np.abs(ev)))
    others = np.delete(ev, j)
    return float(np.min(np.abs(others - ev[j])))


def spectral_checks(inst: LseInstance, sys: AugmentedSystem) -> dict:
    """Every spectral statement about C and B, as name -> bool."""
    x = classical_solve(inst.A, inst.b)
    th1 = verify_theorem1(sys, x)
    nx = float(np.linalg.norm(x))
    return {
        "null_vector_angle": th1.angle <= NULL_ANGLE_TOL,
        "null_residual": th1.residual <= NULL_SINGULAR_TOL,
        "interlacing": verify_interlacing(inst, sys),
        "gap_bound": verify_gap(sys),
        "sigma_max_bound": verify_sigma_max(sys),
        "dilation_spectrum": dilation_spectrum_defect(sys) <= SPECTRUM_PAIRING_TOL,
        "zero_eigenvector": zero_eigenvector_defect(sys) <= SPECTRUM_PAIRING_TOL,
        "dilation_gap_is_sigma_N": bool(abs(dilation_gap(sys) - sys.sigma[-1]) <= SPECTRUM_PAIRING_TOL),
        "solution_norm_range": 1.0 - 1e-8 <= nx <= inst.kappa + 1e-8,
    }


@dataclass(frozen=True, eq=False)
class SolutionDecomposition:
    d0: float
    d1: float
    x_normalized: np.ndarray
    v: np.ndarray

    def norm_x(self, beta: float) -> float:
        return beta * self.d0 / self.d1


def decompose_vector(v) -> SolutionDecomposition:
    """Split an (N+1)-vector carrying the solution into (d0, d1, x/|x|).

    The global phase is fixed so the last entry is positive. Because
    v is proportional to (x, -beta), the first block then points along -x.
    """
    v = np.asarray(v, dtype=complex)
    v = v / np.linalg.norm(v)
    if abs(v[-1]) < DEGENERATE_LAST_TOL:
        raise DegenerateDecompositionError(
            f"|last component| = {abs(v[-1]):.3e}: beta is far too small relative to |x|"
        )
    v = _phase_fix(v)
    d1 = float(v[-1].real)
    block = v[:-1]
    d0 = float(np.linalg.norm(block))
    x_hat = -block / d0 if d0 > 0 else block
    return SolutionDecomposition(d0, d1, x_hat, v)


def decompose_solution(sys: AugmentedSystem) -> SolutionDecomposition:
    if sys.sigma_null > NULL_SINGULAR_TOL:
        raise InputValidationError(f"C has no null vector: sigma_(N+1) = {sys.sigma_null:.3e}")
    return decompose_vector(sys.null_vector)
