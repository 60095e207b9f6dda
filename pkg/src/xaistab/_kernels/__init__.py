"""Hot tree kernels with a compiled core and a numpy fallback.

The compiled extension is used when it imports; set ``XAISTAB_KERNELS=python``
to force the fallback, or call :func:`set_backend` at runtime.  Callers
must look functions up through this module (``_kernels.apply(...)``) so a
backend switch takes effect.
"""

from __future__ import annotations

import os

from xaistab._kernels import _fallback

SQUARED, FRIEDMAN, ABSOLUTE, POISSON = 0, 1, 2, 3

try:
    from xaistab._kernels import _ckernels
except ImportError:  # extension not built
    _ckernels = None

BACKENDS = ("compiled", "python")
_active = None


def available() -> list[str]:
    return [name for name in BACKENDS if name == "python" or _ckernels is not None]


def backend() -> str:
    return _active


def set_backend(name: str) -> str:
    """Activate ``name`` ('compiled' or 'python'); returns the previous backend."""
    global _active, find_best_split, apply, explain
    if name not in BACKENDS:
        raise ValueError(f"unknown kernel backend {name!r}; expected one of {BACKENDS}")
    if name == "compiled" and _ckernels is None:
        raise ImportError("compiled kernels are not built; reinstall with Cython available")
    module = _ckernels if name == "compiled" else _fallback
    previous = _active
    find_best_split = module.find_best_split
    apply = module.apply
    explain = module.explain
    _active = name
    return previous


set_backend(os.environ.get("XAISTAB_KERNELS", "compiled" if _ckernels is not None else "python"))
