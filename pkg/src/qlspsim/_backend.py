"""Kernel selection: compiled extension when importable, numpy fallback otherwise.

Set ``QLSPSIM_PURE_PYTHON=1`` before import to force the fallback.
"""
import os

from . import _pykernels

python_kernels = _pykernels
compiled_kernels = None

if os.environ.get("QLSPSIM_PURE_PYTHON") != "1":
    try:
        from . import _kernels as compiled_kernels  # type: ignore[no-redef]
    except ImportError:
        compiled_kernels = None

kernels = compiled_kernels if compiled_kernels is not None else python_kernels
BACKEND = "cython" if compiled_kernels is not None else "python"


def use(name):
    """Switch the active kernel set at runtime ("cython" or "python")."""
    global kernels, BACKEND
    if name == "python":
        kernels, BACKEND = python_kernels, "python"
    elif name == "cython":
        if compiled_kernels is None:
            raise ImportError("compiled kernels are not built")
        kernels, BACKEND = compiled_kernels, "cython"
    else:
        raise ValueError(f"unknown backend {name!r}")
