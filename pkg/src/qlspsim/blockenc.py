"""Block encodings of B/alpha.

Two realizations: an exact one-ancilla unitary dilation, used when states are
actually evolved, and a sparse-access cost model with counters for the four
oracles, used only for query accounting.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .constants import DILATION_NORM_TOL, ENCODING_TOL
from .errors import InputValidationError, NormalizationError

NO_ENTRY = 0  # padding column for rows with fewer than s nonzeros (columns are 1-based)


@dataclass(frozen=True, eq=False)
class BlockEncoding:
    alpha: float
    m: int
    U: np.ndarray
    epsilon_enc: float
    encoded: np.ndarray  # B/alpha

    @property
    def n(self) -> int:
        return self.encoded.shape[0]

    def block(self) -> np.ndarray:
        """(<0^m| x I) U (|0^m> x I)."""
        return self.U[: self.n, : self.n]

    def apply(self, anc0, anc1):
        """U acting on a state given as its two ancilla halves (|0>|anc0> + |1>|anc1>)."""
        n = self.n
        return self.U[:n, :n] @ anc0 + self.U[:n, n:] @ anc1, self.U[n:, :n] @ anc0 + self.U[n:, n:] @ anc1


def dilate(B_over_alpha, alpha: float = 1.0) -> BlockEncoding:
    """U = [[X, sqrt(I - X^2)], [sqrt(I - X^2), -X]] for Hermitian X = B/alpha with |X| <= 1."""
    X = linalg.as_matrix(B_over_alpha)
    eig = linalg.eig_hermitian(X)
    norm = float(np.max(np.abs(eig.eigenvalues)))
    if norm > 1.0 + DILATION_NORM_TOL:
        raise NormalizationError(f"|B/alpha| = {norm!r} exceeds 1", norm=norm)
    X = 0.5 * (X + X.conj().T)
    V = eig.eigenvectors
    # same eigenbasis as X, negative rounding residue clamped at 0
    root = (V * np.sqrt(np.clip(1.0 - eig.eigenvalues**2, 0.0, None))) @ V.conj().T
    n = X.shape[0]
    U = np.empty((2 * n, 2 * n), dtype=complex)
    U[:n, :n] = X
    U[:n, n:] = root
    U[n:, :n] = root
    U[n:, n:] = -X
    err = float(np.max(np.abs(alpha * U[:n, :n] - alpha * X), initial=0.0))
    enc = BlockEncoding(float(alpha), 1, U, err, X)
    if linalg.unitarity_defect(U) > 1e3 * ENCODING_TOL:
        raise NormalizationError(
            f"dilation is not unitary (defect {linalg.unitarity_defect(U):.3e})", norm=norm
        )
    return enc


def encode_system(B, alpha: float) -> BlockEncoding:
    if not alpha > 0:
        raise InputValidationError(f"alpha must be positive, got {alpha}")
    return dilate(np.asarray(B) / alpha, alpha)


@dataclass
class OracleCostModel:
    """Sparse-access oracles for C with query counters.

    Indices are 1-based, matching the usual oracle notation: rows j = 1..N,
    nonzero ordinals l = 1..s, columns k = 1..N+1.
    """

    C: np.ndarray
    s: int
    counters: dict = field(default_factory=lambda: {"O_C1": 0, "O_C2": 0, "O_b": 0, "O_b1": 0})

    def __post_init__(self):
        self.C = np.asarray(self.C, dtype=complex)
        if self.C.ndim != 2:
            raise InputValidationError("C must be a matrix")
        self._cols = [np.flatnonzero(row) + 1 for row in self.C]
        widest = max((len(c) for c in self._cols), default=0)
        if widest > self.s:
            raise InputValidationError(f"C has a row with {widest} nonzeros, more than s = {self.s}")

    @property
    def alpha_model(self) -> float:
        return float(self.s)

    @property
    def total(self) -> int:
        return sum(self.counters.values())

    def _check_row(self, j):
        if not 1 <= j <= self.C.shape[0]:
            raise InputValidationError(f"row index {j} outside 1..{self.C.shape[0]}")

    def oracle_C_col(self, j: int, l: int) -> int:
        self._check_row(j)
        if not 1 <= l <= self.s:
            raise InputValidationError(f"nonzero ordinal {l} outside 1..{self.s}")
        self.counters["O_C1"] += 1
        cols = self._cols[j - 1]
        return int(cols[l - 1]) if l <= len(cols) else NO_ENTRY

    def oracle_C_val(self, j: int, k: int) -> complex:
        self._check_row(j)
        if k == NO_ENTRY:
            self.counters["O_C2"] += 1
            return 0j
        if not 1 <= k <= self.C.shape[1]:
            raise InputValidationError(f"column index {k} outside 1..{self.C.shape[1]}")
        self.counters["O_C2"] += 1
        return complex(self.C[j - 1, k - 1])

    def oracle_b(self, times: int = 1) -> None:
        """State preparation of |b> (modeled as direct amplitude injection)."""
        self._charge("O_b", times)

    def oracle_b1(self, times: int = 1) -> None:
        """Preparation of the initial register state |1>."""
        self._charge("O_b1", times)

    def _charge(self, key, times):
        if times < 0:
            raise InputValidationError("cannot charge a negative number of uses")
        self.counters[key] += int(times)

    def charge_block_encoding_use(self, times: int = 1) -> dict:
        self._charge("O_C1", times)
        self._charge("O_C2", times)
        return self.snapshot()

    def rebuild(self) -> np.ndarray:
        """Reconstruct C by sweeping every (j, l) through both oracles."""
        out = np.zeros_like(self.C)
        for j in range(1, self.C.shape[0] + 1):
            for l in range(1, self.s + 1):
                k = self.oracle_C_col(j, l)
                if k != NO_ENTRY:
                    out[j - 1, k - 1] = self.oracle_C_val(j, k)
        return out

    def snapshot(self) -> dict:
        return {**self.counters, "alpha_model": self.alpha_model}

    def to_json(self) -> str:
        return json.dumps(self.snapshot())


def charge_block_encoding_use(model: OracleCostModel, times: int) -> dict:
    return model.charge_block_encoding_use(times)
