"""Classical simulator for solving A x = b through the null singular vector of
the augmented matrix (A | b/beta), by eigenstate filtering or resonant transition.
"""
from ._backend import BACKEND
from .driver import SolveReport, calibrate_beta, estimate_d1, extract_solution, solve
from .problem import AugmentedSystem, LseInstance, augment, classical_solve, decompose_solution, generate_instance
from .qrt import QrtConfig, qrt_solve
from .qsp import FilterPolynomial, build_filter, qef_solve, solve_phases

__all__ = [
    "BACKEND",
    "AugmentedSystem",
    "FilterPolynomial",
    "LseInstance",
    "QrtConfig",
    "SolveReport",
    "augment",
    "build_filter",
    "calibrate_beta",
    "classical_solve",
    "decompose_solution",
    "estimate_d1",
    "extract_solution",
    "generate_instance",
    "qef_solve",
    "qrt_solve",
    "solve",
    "solve_phases",
]
__version__ = "0.1.0"
