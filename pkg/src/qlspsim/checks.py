"""Batched invariant suite run by ``qlspsim verify`` on one instance."""
from __future__ import annotations

import math

import numpy as np

from . import linalg, qrt, qsp
from .blockenc import OracleCostModel, encode_system
from .constants import ENCODING_TOL, QSP_ORACLE_TOL
from .problem import LseInstance, augment, classical_solve, decompose_solution, spectral_checks


def check_instance(inst: LseInstance, beta: float | None = None, epsilon: float = 1e-6, seed: int = 0) -> dict:
    """name -> bool for every structural check on ``inst`` at the given beta."""
    if beta is None:
        beta = min(max(float(np.linalg.norm(classical_solve(inst.A, inst.b))), 1.0), inst.kappa)
    sys = augment(inst, beta)
    out = {f"problem.{k}": bool(v) for k, v in spectral_checks(inst, sys).items()}

    enc = encode_system(sys.B, sys.alpha)
    out["blockenc.block"] = bool(np.max(np.abs(enc.block() * sys.alpha - sys.B)) <= ENCODING_TOL)
    out["blockenc.unitary"] = linalg.unitarity_defect(enc.U) <= ENCODING_TOL
    out["blockenc.alpha_le_2"] = sys.alpha <= 2.0 + 1e-12 if beta >= 1 else True
    model = OracleCostModel(sys.C, inst.sparsity)
    out["blockenc.oracle_rebuild"] = bool(np.array_equal(model.rebuild(), sys.C))

    gap = qsp.filter_gap(sys)
    poly = qsp.build_filter(gap, epsilon)
    out["qsp.filter_at_zero"] = poly(0.0) == 1.0
    out["qsp.filter_suppression"] = poly.sup_error <= epsilon
    nz = np.abs(sys.eig_B().eigenvalues) / sys.alpha
    nz = nz[nz > gap * 0.5]
    out["qsp.spectrum_suppressed"] = bool(np.all(np.abs(poly(nz)) <= epsilon))
    small = qsp.make_filter(min(poly.k, 8), gap)
    seq = qsp.solve_phases(small)
    rng = np.random.default_rng(seed)
    z = rng.normal(size=enc.n) + 1j * rng.normal(size=enc.n)
    dev = np.max(np.abs(qsp.apply_qsp(enc, seq, z) - qsp.direct_filter_apply(sys, small, z)))
    out["qsp.apply_matches_direct"] = bool(dev <= QSP_ORACLE_TOL * max(1.0, np.linalg.norm(z)))

    d1 = decompose_solution(sys).d1
    cfg = qrt.make_config(sys, 1e-2, d1, seed=seed)
    H0 = qrt.free_hamiltonian(sys, cfg)
    n = 2 * sys.N + 1
    top = qrt.initial_state(sys)
    bottom = np.concatenate([sys.target_state, np.zeros(n)])
    e_top = np.vdot(top, H0 @ top).real
    e_bot = np.vdot(bottom, H0 @ bottom).real
    out["qrt.resonance"] = abs(e_top + 0.5) <= 1e-12 and abs(e_bot + 0.5) <= 1e-9
    sess = qrt.QrtSession(sys, cfg)
    times = np.linspace(0.0, cfg.t, 64)
    p0, leak = sess.populations(times)
    bound = qrt.leakage_bound(sys, cfg, d1)
    out["qrt.leakage"] = bool(np.all(leak <= bound))
    out["qrt.decay"] = bool(abs(p0[-1] - math.sin(cfg.c * cfg.t * d1) ** 2) <= bound + 0.01)
    return out
