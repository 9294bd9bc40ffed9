"""Kernel backend selection.

Two implementations share one contract: the compiled ``_core`` extension and
the numpy/LAPACK module ``_fallback``. The default mode, ``auto``, uses the
compiled kernels for matrices of dimension up to ``AUTO_MAX_DIM`` and the
BLAS-backed fallback above it (see ``benchmarks/bench_kernels.py``). Without
a compiled build every mode except ``cython`` resolves to the fallback.
"""
import importlib

from tcplda import _fallback

try:
    from tcplda import _core
except ImportError:  # extension not built
    _core = None

AUTO_MAX_DIM = 32
MODES = ("auto", "cython", "python")

_mode = "auto"


def available():
    """Names of the kernel modules importable in this process."""
    return [m.NAME for m in (_core, _fallback) if m is not None]


def mode():
    return _mode


def use(name):
    """Select ``"auto"``, ``"cython"`` or ``"python"``; returns the previous mode."""
    global _mode
    if name not in MODES:
        raise ValueError(f"unknown backend {name!r}; choose from {MODES}")
    if name == "cython" and _core is None:
        raise ImportError("compiled kernels are not built; run `pip install -e .`")
    previous, _mode = _mode, name
    return previous


def kernels(dim=None):
    """Kernel module for matrices of dimension ``dim``."""
    if _core is None or _mode == "python":
        return _fallback
    if _mode == "cython" or dim is None or dim <= AUTO_MAX_DIM:
        return _core
    return _fallback


def reload():
    """Re-try importing the compiled module (after an in-place build)."""
    global _core
    try:
        _core = importlib.import_module("tcplda._core")
    except ImportError:
        _core = None
    return available()
