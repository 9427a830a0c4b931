"""Backend selection for the search kernels.

The compiled extension is used when it was built; otherwise (or when the
environment variable ``MORSELAB_PURE_PYTHON`` is set to a non-empty value
other than ``0``) the pure-Python fallback is used.  Both give identical
results.
"""
import os

from . import _pykernels

_force_python = os.environ.get("MORSELAB_PURE_PYTHON", "") not in ("", "0")

try:
    if _force_python:
        raise ImportError("pure Python backend requested")
    from . import _kernels as _compiled
except ImportError:
    _compiled = None

BACKEND = "cython" if _compiled is not None else "python"
witness_search = (_compiled or _pykernels).witness_search
python_witness_search = _pykernels.witness_search
compiled_witness_search = _compiled.witness_search if _compiled is not None else None
