"""Counting-kernel backends and runtime backend selection.

Two interchangeable implementations of the per-event counting pipeline:
a compiled extension (_fast, built from Cython) and a vectorized numpy
fallback.  Both take the same arguments and return identical integer
counts; the extension exists purely for speed.

Selection order:
  1. the BELLMC_BACKEND environment variable, if set to "compiled" or
     "numpy" (aliases: "fast"/"cython", "python"/"fallback");
  2. otherwise the compiled extension when the build produced it;
  3. otherwise the numpy fallback.

set_backend() switches at runtime (used by tests and benchmarks).
"""

from __future__ import annotations

import os
import warnings

from . import numpy_backend

try:
    from . import _fast
except ImportError:
    _fast = None

_ALIASES = {
    "compiled": "compiled",
    "fast": "compiled",
    "cython": "compiled",
    "numpy": "numpy",
    "python": "numpy",
    "fallback": "numpy",
}


def _resolve(name: str) -> str:
    canonical = _ALIASES.get(name.strip().lower())
    if canonical is None:
        raise ValueError(
            f"unknown backend {name!r}; expected 'compiled' or 'numpy'"
        )
    return canonical


def _module_for(canonical: str):
    if canonical == "compiled":
        return _fast
    return numpy_backend


def _initial_backend():
    requested = os.environ.get("BELLMC_BACKEND", "")
    if requested:
        try:
            canonical = _resolve(requested)
        except ValueError:
            warnings.warn(
                f"BELLMC_BACKEND={requested!r} not recognized; using automatic selection",
                RuntimeWarning,
                stacklevel=2,
            )
        else:
            module = _module_for(canonical)
            if module is not None:
                return module
            warnings.warn(
                "BELLMC_BACKEND requested the compiled kernel but the extension "
                "is not built; falling back to the numpy backend",
                RuntimeWarning,
                stacklevel=2,
            )
    return _fast if _fast is not None else numpy_backend


_active = _initial_backend()


def backend_name() -> str:
    """Name of the active backend: 'compiled' or 'numpy'."""
    return _active.NAME


def available_backends() -> tuple[str, ...]:
    names = ["numpy"]
    if _fast is not None:
        names.insert(0, "compiled")
    return tuple(names)


def set_backend(name: str) -> str:
    """Switch the active backend; returns the previous backend's name."""
    global _active
    canonical = _resolve(name)
    module = _module_for(canonical)
    if module is None:
        raise RuntimeError(
            "compiled kernel extension is not available in this installation"
        )
    previous = _active.NAME
    _active = module
    return previous


def pair_counts(*args):
    return _active.pair_counts(*args)


def qm_counts(*args):
    return _active.qm_counts(*args)


# analysis helpers are only needed in vectorized form; they always come from
# the numpy backend regardless of the counting backend in use
fold_arrays = numpy_backend.fold_arrays
eval_probs = numpy_backend.eval_probs
