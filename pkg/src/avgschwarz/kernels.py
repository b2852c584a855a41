"""Backend selection for the assembly loops.

The compiled extension is used when it was built; otherwise, or when
``AVGSCHWARZ_PURE_PYTHON`` is set to a non-empty value other than ``0``,
the numpy implementation is used.  Both expose the same functions.
"""
import os

from ._ext import _kernels_py as python_backend

compiled_backend = None
try:
    from ._ext import _kernels as compiled_backend
except ImportError:  # extension not built
    pass

_force_python = os.environ.get("AVGSCHWARZ_PURE_PYTHON", "") not in ("", "0")

if compiled_backend is not None and not _force_python:
    backend = compiled_backend
    BACKEND = "cython"
else:
    backend = python_backend
    BACKEND = "python"

p1_stiffness_triplets = backend.p1_stiffness_triplets
p1_load = backend.p1_load
