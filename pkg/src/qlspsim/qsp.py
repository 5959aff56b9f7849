"""Eigenstate filtering with quantum signal processing.

The filter is the shifted, rescaled Chebyshev polynomial

    R_k(w; delta) = T_k(-1 + 2 (w^2 - delta^2) / (1 - delta^2)) / T_k(y0),
    y0 = -(1 + delta^2) / (1 - delta^2),

which equals 1 at w = 0 and is at most 1/|T_k(y0)| in modulus on delta <= |w| <= 1.

Phase factors. The sequence (phi_1, ..., phi_l), l = 2k, realizes

    U_phi(w) = e^{i phi_1 Z} R(w) e^{i phi_2 Z} R(w) ... e^{i phi_l Z} R(w),
    R(w) = [[w, s], [s, -w]],  s = sqrt(1 - w^2),

and <0|U_phi|0> has real part R_k(w). Phases are found in the equivalent
reflection-free form <0| e^{i psi_0 Z} W(w) e^{i psi_1 Z} ... W(w) e^{i psi_l Z} |0>,
W(w) = e^{i arccos(w) X}, where they can be taken symmetric (psi_j = psi_{l-j});
R = S Z W S^dagger with S = diag(1, i) turns one form into the other exactly.
The real part is taken by averaging the branches +phi and -phi (a one-qubit
linear combination that shares every call to the block encoding).
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property, lru_cache

import numpy as np

from . import _backend, linalg
from .blockenc import BlockEncoding, OracleCostModel, encode_system
from .constants import (
    FILTER_GRID_PER_DEGREE,
    FILTER_MAX_HALF_DEGREE,
    PHASE_MAX_ITER,
    PHASE_NEWTON_TOL,
    PHASE_RESIDUAL_TOL,
    QSP_ORACLE_TOL,
)
from .errors import DegreeOverflowError, InputValidationError, ParityError, PhaseSolveError
from .problem import AugmentedSystem

# --------------------------------------------------------------------------- filter


def _y(w, delta):
    return -1.0 + 2.0 * (w * w - delta * delta) / (1.0 - delta * delta)


def _a0(delta: float) -> float:
    """arccosh|y0| (analytically 2 artanh(delta)), via the same float path as _y(0)."""
    return float(np.arccosh(-_y(0.0, delta)))


def _filter_values(k: int, delta: float, w) -> np.ndarray:
    """R_k(w; delta) without forming T_k(y0), which overflows for large k."""
    w = np.asarray(w, dtype=float)
    if k == 0:
        return np.ones_like(w)
    y = _y(w, delta)
    a0 = _a0(delta)
    ay = np.abs(y)
    out = np.empty_like(y)
    inside = ay <= 1.0
    # |T_k(y0)| = cosh(k a0); write 1/cosh(k a0) = 2 e^{-k a0} / (1 + e^{-2 k a0})
    inv_t0 = 2.0 * math.exp(-k * a0) / (1.0 + math.exp(-2.0 * k * a0))
    sign0 = -1.0 if k % 2 else 1.0
    out[inside] = np.cos(k * np.arccos(y[inside])) * inv_t0 * sign0
    a = np.arccosh(ay[~inside])
    a0 = np.float64(a0)
    # ratio cosh(k a) / cosh(k a0), signs of y and y0 agree here (both < -1)
    out[~inside] = np.exp(k * (a - a0)) * (1.0 + np.exp(-2.0 * k * a)) / (1.0 + np.exp(-2.0 * k * a0))
    return out


def filter_sup_bound(k: int, delta: float) -> float:
    """1/|T_k(y0)|, the exact maximum of |R_k| over delta <= |w| <= 1."""
    a0 = _a0(delta)
    return 2.0 * math.exp(-k * a0) / (1.0 + math.exp(-2.0 * k * a0))


def _cheb_coeffs_even(k: int, delta: float) -> np.ndarray:
    """Chebyshev coefficients (in w) of R_k via an FFT-based cosine transform."""
    n = 2 * k
    if n == 0:
        return np.ones(1)
    theta = np.pi * np.arange(n + 1) / n
    vals = _filter_values(k, delta, np.cos(theta))
    ext = np.concatenate([vals, vals[-2:0:-1]])
    c = np.fft.rfft(ext).real[: n + 1] / n
    c[0] *= 0.5
    c[n] *= 0.5
    c[1::2] = 0.0
    return c


def _certify_grid(k: int, delta: float) -> np.ndarray:
    pts = max(FILTER_GRID_PER_DEGREE * max(k, 1), 64)
    n_int = max(int(math.ceil(pts * (1.0 - delta))), 16)
    return np.linspace(delta, 1.0, n_int + 1)


def grid_sup(k: int, delta: float) -> float:
    """max |R_k| over the certification grid on [delta, 1] (R_k is even in w)."""
    return float(np.max(np.abs(_filter_values(k, delta, _certify_grid(k, delta)))))


@dataclass(frozen=True, eq=False)
class FilterPolynomial:
    k: int
    delta: float
    sup_error: float

    @property
    def degree(self) -> int:
        return 2 * self.k

    @cached_property
    def coeffs(self) -> np.ndarray:
        return _cheb_coeffs_even(self.k, self.delta)

    def __call__(self, w):
        v = _filter_values(self.k, self.delta, w)
        return float(v) if v.ndim == 0 else v

    def report(self) -> dict:
        return {"k": self.k, "delta": self.delta, "sup_error": self.sup_error}


def make_filter(k: int, delta: float) -> FilterPolynomial:
    if not 0.0 < delta < 1.0:
        raise InputValidationError(f"delta must lie in (0, 1), got {delta}")
    if k < 0:
        raise InputValidationError("half-degree must be non-negative")
    return FilterPolynomial(int(k), float(delta), grid_sup(k, delta))


def build_filter(delta: float, epsilon: float, max_k: int = FILTER_MAX_HALF_DEGREE) -> FilterPolynomial:
    """Smallest k whose grid-certified suppression on [delta, 1] is at most epsilon."""
    if not 0.0 < delta < 1.0:
        raise InputValidationError(f"delta must lie in (0, 1), got {delta}")
    if not 0.0 < epsilon < 1.0:
        raise InputValidationError(f"epsilon must lie in (0, 1), got {epsilon}")
    lo, hi = 0, 1
    while grid_sup(hi, delta) > epsilon:
        lo, hi = hi, 2 * hi
        if lo > max_k:
            raise DegreeOverflowError(
                f"suppression {epsilon:g} at gap {delta:g} needs k > {max_k}"
            )
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if grid_sup(mid, delta) <= epsilon:
            hi = mid
        else:
            lo = mid
    if hi > max_k:
        raise DegreeOverflowError(f"suppression {epsilon:g} at gap {delta:g} needs k = {hi} > {max_k}")
    return make_filter(hi, delta)


# --------------------------------------------------------------------------- phases


@dataclass(frozen=True, eq=False)
class PhaseFactorSequence:
    phases: np.ndarray  # (phi_1, ..., phi_l)
    target: FilterPolynomial | None
    residual: float
    iterations: int = 0
    reduced: np.ndarray = field(default=None, repr=False)  # symmetric half of psi

    @property
    def l(self) -> int:
        return len(self.phases)

    def to_json(self) -> str:
        return json.dumps([float(p) for p in self.phases])


def _full_from_reduced(red: np.ndarray) -> np.ndarray:
    return np.concatenate([red, red[-2::-1]])


def psi_to_phi(psi) -> np.ndarray:
    """Reflection-free phases (psi_0..psi_l) to the l phases of the R-form product."""
    psi = np.asarray(psi, dtype=float)
    l = len(psi) - 1
    if l == 0:
        return np.zeros(0)
    if l % 2:
        raise ParityError("only even-degree sequences are supported")
    phi = psi[:-1] - np.pi / 2
    phi[0] = psi[0] - np.pi / 2 + psi[-1] + (l // 2) * np.pi
    return phi


def qsp_scalar(phases, w) -> np.ndarray:
    """<0| e^{i phi_1 Z} R(w) ... e^{i phi_l Z} R(w) |0> for an array of w."""
    w = np.asarray(w, dtype=float)
    s = np.sqrt(np.clip(1.0 - w * w, 0.0, None))
    # column vector acted on from the right end inwards
    u0 = np.ones_like(w, dtype=complex)
    u1 = np.zeros_like(w, dtype=complex)
    for phi in reversed(np.asarray(phases, dtype=float)):
        u0, u1 = w * u0 + s * u1, s * u0 - w * u1
        u0, u1 = np.exp(1j * phi) * u0, np.exp(-1j * phi) * u1
    return u0


def _newton_phases(target_values, x, k, tol, max_iter):
    """Newton on the k+1 symmetric parameters so that Re P(x_j) = target at k+1 nodes."""
    kern = _backend.kernels
    d = 2 * k
    red = np.zeros(k + 1)
    red[0] = np.pi / 4
    best = (np.inf, red.copy())
    stall = 0
    for it in range(1, max_iter + 1):
        P, D = kern.qsp_gradient(_full_from_reduced(red), x)
        F = P.real - target_values
        err = float(np.max(np.abs(F)))
        if err < best[0] * 0.999:
            best = (err, red.copy())
            stall = 0
        else:
            stall += 1
        if err < tol or stall >= 8:
            break
        J = D[:, : k + 1].copy()
        J[:, :k] += D[:, d : k : -1]
        try:
            step = np.linalg.solve(J, F)
        except np.linalg.LinAlgError:
            break
        red = red - step
    return best[1], best[0], it


def solve_phases_for(target, degree: int, tol: float = PHASE_NEWTON_TOL, max_iter: int = PHASE_MAX_ITER):
    """Phases realizing an even real polynomial ``target`` (callable on [-1, 1]) of given degree.

    Returns (phi, psi, residual_on_check_grid, iterations). No acceptance test applied.
    """
    if degree % 2:
        raise ParityError(f"degree {degree} is odd; only even targets are supported")
    if degree == 0:
        return np.zeros(0), np.zeros(1), 0.0, 0
    k = degree // 2
    j = np.arange(1, k + 2)
    x = np.cos((2 * j - 1) * np.pi / (4 * (k + 1)))
    red, _, iters = _newton_phases(np.asarray(target(x), dtype=float), x, k, tol, max_iter)
    psi = _full_from_reduced(red)
    phi = psi_to_phi(psi)
    m = max(4 * degree, 50)
    grid = np.cos((2 * np.arange(1, m + 1) - 1) * np.pi / (2 * m))
    resid = float(np.max(np.abs(qsp_scalar(phi, grid).real - target(grid))))
    return phi, psi, resid, iters


@lru_cache(maxsize=64)
def _cached_phases(k: int, delta: float):
    poly = make_filter(k, delta)
    return solve_phases_for(poly, poly.degree)


def solve_phases(poly: FilterPolynomial, tol: float = PHASE_RESIDUAL_TOL) -> PhaseFactorSequence:
    phi, psi, resid, iters = _cached_phases(poly.k, poly.delta)
    if not resid <= tol:
        raise PhaseSolveError(
            f"phase solve for k={poly.k}, delta={poly.delta:g} stalled at residual {resid:.3e}",
            residual=resid,
            phases=phi,
        )
    return PhaseFactorSequence(phi.copy(), poly, resid, iters, psi[: poly.k + 1].copy())


# --------------------------------------------------------------------------- application


def apply_qsp(
    enc: BlockEncoding,
    phases: PhaseFactorSequence,
    state,
    model: OracleCostModel | None = None,
) -> np.ndarray:
    """(<0| x I) U_phi (|0> x I) state, real part taken over the +/- phi branches.

    ``state`` may be a vector or a matrix whose columns are states. Each U_B call
    acts on both branches at once and is charged once to ``model``.
    """
    phis = np.asarray(phases.phases if isinstance(phases, PhaseFactorSequence) else phases, dtype=float)
    l = len(phis)
    if l % 2:
        raise ParityError(f"phase sequence has odd length {l}")
    state = np.asarray(state, dtype=complex)
    vec = state.ndim == 1
    X = state[:, None] if vec else state
    n = enc.n
    if X.shape[0] != n:
        raise InputValidationError(f"state dimension {X.shape[0]} != encoded dimension {n}")
    if l == 0:
        return state.copy()
    m = X.shape[1]
    # columns: [branch +phi | branch -phi]; rows: [ancilla 0 ; ancilla 1]
    top = np.hstack([X, X])
    bot = np.zeros_like(top)
    U = enc.U
    sign = np.concatenate([np.ones(m), -np.ones(m)])
    for phi in reversed(phis):
        top, bot = U[:n, :n] @ top + U[:n, n:] @ bot, U[n:, :n] @ top + U[n:, n:] @ bot
        e = np.exp(1j * phi * sign)
        top = top * e
        bot = bot * e.conj()
    if model is not None:
        model.charge_block_encoding_use(l)
    out = 0.5 * (top[:, :m] + top[:, m:])
    return out[:, 0] if vec else out


def direct_filter_apply(sys_or_matrix, poly: FilterPolynomial, state, alpha: float | None = None) -> np.ndarray:
    """R_k(B/alpha) state by the scaled three-term Chebyshev recurrence (no QSP).

    With Y = -I + 2 (X^2 - delta^2) / (1 - delta^2) and u_j = T_j(Y) v / T_j(y0),
    u_{j+1} = (2 Y u_j - u_{j-1} / rho_{j-1}) / rho_j,  rho_j = T_{j+1}(y0) / T_j(y0),
    which stays bounded although T_j(y0) grows geometrically.
    """
    if isinstance(sys_or_matrix, AugmentedSystem):
        X = sys_or_matrix.B / (alpha if alpha is not None else sys_or_matrix.alpha)
    else:
        X = np.asarray(sys_or_matrix, dtype=complex) / (1.0 if alpha is None else alpha)
    v = np.asarray(state, dtype=complex)
    k, d = poly.k, poly.delta
    if k == 0:
        return v.copy()
    scale = 2.0 / (1.0 - d * d)
    shift = -1.0 - scale * d * d

    def Y(u):
        return scale * (X @ (X @ u)) + shift * u

    y0 = -(1.0 + d * d) / (1.0 - d * d)
    u_prev = v
    u = Y(v) / y0
    rho_prev = y0  # T_1 / T_0
    for _ in range(1, k):
        rho = 2.0 * y0 - 1.0 / rho_prev
        u_prev, u = u, (2.0 * Y(u) - u_prev / rho_prev) / rho
        rho_prev = rho
    return u


# --------------------------------------------------------------------------- pipeline


@dataclass(eq=False)
class QefResult:
    output_state: np.ndarray
    success_probability: float
    fidelity_vs_target: float
    degree_used: int
    query_count: dict
    filter: FilterPolynomial
    phase_residual: float | None
    used_fallback: bool = False
    oracle_deviation: float | None = None

    def to_dict(self) -> dict:
        return {
            "degree_used": self.degree_used,
            "success_probability": self.success_probability,
            "fidelity_vs_target": self.fidelity_vs_target,
            "query_count": dict(self.query_count),
            "filter": self.filter.report(),
            "phase_residual": self.phase_residual,
            "used_fallback": self.used_fallback,
            "oracle_deviation": self.oracle_deviation,
        }


def filter_gap(sys: AugmentedSystem) -> float:
    """Certified lower bound on the nonzero |eigenvalues| of B/alpha: (1/kappa)/alpha."""
    return sys.delta_star / sys.alpha


def qef_solve(
    sys: AugmentedSystem,
    epsilon: float,
    model: OracleCostModel | None = None,
    check_oracle: bool = True,
    allow_fallback: bool = True,
) -> QefResult:
    """Filter the initial state |1> = (0, ..., 0, 1) onto the null eigenvector of B."""
    poly = build_filter(filter_gap(sys), epsilon)
    if model is None:
        model = OracleCostModel(sys.C, sys.inst.sparsity)
    psi0 = sys.initial_state
    model.oracle_b1()
    model.oracle_b()
    used_fallback = False
    resid = None
    try:
        seq = solve_phases(poly)
        resid = seq.residual
        enc = encode_system(sys.B, sys.alpha)
        out = apply_qsp(enc, seq, psi0, model)
    except PhaseSolveError as exc:
        if not allow_fallback:
            raise
        used_fallback = True
        resid = exc.residual
        out = direct_filter_apply(sys, poly, psi0)
        model.charge_block_encoding_use(poly.degree)
    deviation = None
    if check_oracle and not used_fallback:
        deviation = float(np.max(np.abs(out - direct_filter_apply(sys, poly, psi0))))
    p = float(np.vdot(out, out).real)
    state = linalg.normalize(out)
    last = state[-1]
    if abs(last) > 0:
        state = state * (abs(last) / last)
    fid = linalg.fidelity(state, sys.target_state)
    return QefResult(
        output_state=state,
        success_probability=min(p, 1.0),
        fidelity_vs_target=fid,
        degree_used=poly.degree,
        query_count=model.snapshot(),
        filter=poly,
        phase_residual=resid,
        used_fallback=used_fallback,
        oracle_deviation=deviation,
    )


def oracle_agrees(result: QefResult) -> bool:
    return result.oracle_deviation is None or result.oracle_deviation <= QSP_ORACLE_TOL
