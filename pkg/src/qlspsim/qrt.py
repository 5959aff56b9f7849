"""Resonant-transition solver.

A probe qubit with splitting omega is weakly coupled (strength c) to the
register. The register Hamiltonian is B on the probe-|0> branch and
epsilon0 |1><1| (on the initial register state |1> = e_{2N+1}) on the probe-|1>
branch. With omega = -epsilon0 the state |1>|1> is degenerate with
|0>|v_{N+1}> and the two are coupled with strength c d1, so after
t = pi / (2 c d1) the probe has flipped and the register holds v_{N+1}.

State layout: index = probe * n + r, with n = 2N + 1 and probe |0> first.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .errors import InputValidationError, NoDecayError
from .problem import AugmentedSystem, decompose_solution

SIGMA_Z = np.diag([1.0, -1.0]).astype(complex)
SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
P0 = np.diag([1.0, 0.0]).astype(complex)
P1 = np.diag([0.0, 1.0]).astype(complex)


@dataclass(frozen=True)
class QrtConfig:
    c: float
    t: float
    omega: float = 1.0
    epsilon0: float = -1.0
    max_rounds: int = 10
    rng_seed: int = 0

    def validate(self, sys: AugmentedSystem | None = None) -> None:
        if not math.isclose(self.omega, -self.epsilon0, rel_tol=0, abs_tol=1e-15):
            raise InputValidationError(f"off resonance: omega = {self.omega}, epsilon0 = {self.epsilon0}")
        if not self.c > 0:
            raise InputValidationError(f"coupling must be positive, got {self.c}")
        if sys is not None and not self.c < sys.delta_star:
            raise InputValidationError(f"coupling {self.c} is not below the gap bound {sys.delta_star}")
        if self.t < 0 or self.max_rounds < 1:
            raise InputValidationError("need t >= 0 and max_rounds >= 1")


def coupling_for(delta_star: float, eps_leak: float) -> float:
    """c = delta* min(1/2, sqrt(eps_leak)/2): the leakage bound is then at most eps_leak."""
    return delta_star * min(0.5, math.sqrt(eps_leak) / 2.0)


def make_config(
    sys: AugmentedSystem, eps_leak: float, d1_est: float, seed: int = 0, max_rounds: int | None = None
) -> QrtConfig:
    if not 0 < d1_est <= 1:
        raise InputValidationError(f"d1 estimate must lie in (0, 1], got {d1_est}")
    c = coupling_for(sys.delta_star, eps_leak)
    t = math.pi / (2.0 * c * d1_est)
    if max_rounds is None:
        p = math.sin(c * t * d1_est) ** 2
        max_rounds = max(1, math.ceil(10.0 / max(p, 1e-12)))
    return QrtConfig(c=c, t=t, max_rounds=max_rounds, rng_seed=seed)


def free_hamiltonian(sys: AugmentedSystem, cfg: QrtConfig) -> np.ndarray:
    """H0 = -(omega/2) sigma_z x I + epsilon0 |1><1| x |1><1| + |0><0| x B."""
    n = sys.B.shape[0]
    one = np.zeros((n, n), dtype=complex)
    one[-1, -1] = 1.0
    return -0.5 * cfg.omega * np.kron(SIGMA_Z, np.eye(n)) + cfg.epsilon0 * np.kron(P1, one) + np.kron(P0, sys.B)


def build_hamiltonian(sys: AugmentedSystem, cfg: QrtConfig) -> np.ndarray:
    n = sys.B.shape[0]
    if sys.B.shape != (n, n) or n != 2 * sys.N + 1:
        raise InputValidationError(f"dilation has shape {sys.B.shape}, expected {(2 * sys.N + 1,) * 2}")
    return free_hamiltonian(sys, cfg) + cfg.c * np.kron(SIGMA_X, np.eye(n))


def initial_state(sys: AugmentedSystem) -> np.ndarray:
    """|1>|1>: probe excited, register on its last basis vector."""
    n = 2 * sys.N + 1
    psi = np.zeros(2 * n, dtype=complex)
    psi[2 * n - 1] = 1.0
    return psi


def evolve_once(H, cfg: QrtConfig, state, eig: linalg.EigResult | None = None) -> np.ndarray:
    if eig is None:
        eig = linalg.eig_hermitian(H)
    return linalg.evolve(eig, cfg.t, state)


def make_rng(seed: int) -> np.random.Generator:
    """Counter-based generator, so a run is a pure function of its seed."""
    return np.random.Generator(np.random.Philox(seed))


def measure_probe(state, rng: np.random.Generator):
    """Born-rule readout of the probe. Returns (outcome, collapsed normalized state)."""
    state = np.asarray(state, dtype=complex)
    n = len(state) // 2
    p0 = float(np.vdot(state[:n], state[:n]).real)
    p1 = float(np.vdot(state[n:], state[n:]).real)
    total = p0 + p1
    outcome = 0 if rng.random() * total < p0 else 1
    collapsed = np.zeros_like(state)
    if outcome == 0:
        collapsed[:n] = state[:n] / math.sqrt(p0)
    else:
        collapsed[n:] = state[n:] / math.sqrt(p1)
    return outcome, collapsed


def leakage_bound(sys: AugmentedSystem, cfg: QrtConfig, d1: float) -> float:
    """4 c^2 (1 - d1^2) / sigma_N^2."""
    return float(4.0 * cfg.c**2 * (1.0 - d1 * d1) / sys.sigma[-1] ** 2)


def rabi_transition_probability(c: float, d1: float, E: float, t: float) -> float:
    g2 = 4.0 * c * c * (1.0 - d1 * d1)
    omega_r2 = g2 + E * E
    if omega_r2 == 0:
        return 0.0
    return g2 / omega_r2 * math.sin(0.5 * t * math.sqrt(omega_r2)) ** 2


def error_hamiltonian(c: float, d1: float, E: float) -> np.ndarray:
    """Two-level model on {|1>|1>, |0>|phi>} with detuning E."""
    g = c * math.sqrt(max(1.0 - d1 * d1, 0.0))
    return np.array([[-0.5, g], [g, -0.5 + E]], dtype=complex)


def simulate_error_transition(c: float, d1: float, E: float, t: float) -> float:
    U = linalg.expm_i(error_hamiltonian(c, d1, E), t)
    return float(abs(U[1, 0]) ** 2)


def estimate_qrt_queries(cfg: QrtConfig, alpha: float, epsilon: float, s: int) -> int:
    """s (alpha t + ln(1/eps) / ln(e + ln(1/eps) / (alpha t))), rounded up."""
    if min(alpha, epsilon, s, cfg.t) <= 0:
        raise InputValidationError("alpha, epsilon, s and t must all be positive")
    at = alpha * cfg.t
    L = math.log(1.0 / epsilon)
    return int(math.ceil(s * (at + L / math.log(math.e + L / at))))


def hamiltonian_norm_bound(sys: AugmentedSystem, cfg: QrtConfig) -> float:
    return 0.5 * abs(cfg.omega) + abs(cfg.epsilon0) + sys.alpha + cfg.c


@dataclass(eq=False)
class QrtRunRecord:
    rounds: int
    probe_outcomes: list
    final_state: np.ndarray
    decay_probability_estimate: float
    predicted_p: float
    error_budget: float
    fidelity: float
    d1: float
    config: QrtConfig = field(repr=False, default=None)

    @property
    def register_state(self) -> np.ndarray:
        n = len(self.final_state) // 2
        reg = self.final_state[:n] if self.probe_outcomes[-1] == 0 else self.final_state[n:]
        return linalg.normalize(reg)

    def to_dict(self) -> dict:
        return {
            "rounds": self.rounds,
            "outcomes": list(self.probe_outcomes),
            "p_pred": self.predicted_p,
            "p_emp": self.decay_probability_estimate,
            "leakage_bound": self.error_budget,
            "fidelity": self.fidelity,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


class QrtSession:
    """Cached eigendata of H for one (system, config) pair."""

    def __init__(self, sys: AugmentedSystem, cfg: QrtConfig):
        cfg.validate(sys)
        self.sys = sys
        self.cfg = cfg
        self.H = build_hamiltonian(sys, cfg)
        self.eig = linalg.eig_hermitian(self.H)

    def state_at(self, t, state=None):
        psi = initial_state(self.sys) if state is None else state
        return linalg.evolve(self.eig, t, psi)

    def populations(self, times, target=None):
        """(decay probability, off-target population on the probe-|0> branch) at each time."""
        n = 2 * self.sys.N + 1
        v = self.sys.target_state if target is None else target
        psi0 = initial_state(self.sys)
        U = self.eig.eigenvectors
        coef = U.conj().T @ psi0
        times = np.atleast_1d(np.asarray(times, dtype=float))
        states = (U[None, :, :] * np.exp(-1j * np.outer(times, self.eig.eigenvalues))[:, None, :]) @ coef
        reg0 = states[:, :n]
        p0 = np.sum(np.abs(reg0) ** 2, axis=1)
        on_target = np.abs(reg0 @ v.conj()) ** 2
        return p0, np.clip(p0 - on_target, 0.0, None)


def qrt_solve(sys: AugmentedSystem, cfg: QrtConfig, session: QrtSession | None = None) -> QrtRunRecord:
    """Evolve and measure until the probe reads 0 or ``cfg.max_rounds`` is reached."""
    session = session or QrtSession(sys, cfg)
    rng = make_rng(cfg.rng_seed)
    d1 = decompose_solution(sys).d1
    n = 2 * sys.N + 1
    state = initial_state(sys)
    outcomes = []
    p_first = None
    for _ in range(cfg.max_rounds):
        state = session.state_at(cfg.t, state)
        if p_first is None:
            p_first = float(np.vdot(state[:n], state[:n]).real)
        bit, state = measure_probe(state, rng)
        outcomes.append(bit)
        if bit == 0:
            break
    fid = linalg.fidelity(state[:n], sys.target_state) if outcomes[-1] == 0 else 0.0
    record = QrtRunRecord(
        rounds=len(outcomes),
        probe_outcomes=outcomes,
        final_state=state,
        decay_probability_estimate=p_first,
        predicted_p=math.sin(cfg.c * cfg.t * d1) ** 2,
        error_budget=leakage_bound(sys, cfg, d1),
        fidelity=fid,
        d1=d1,
        config=cfg,
    )
    if outcomes[-1] != 0:
        raise NoDecayError(f"probe did not decay in {cfg.max_rounds} rounds", record)
    return record
