"""Kernel backend selection.

The compiled ``_ckernels`` extension is used when it imports; otherwise the
numpy implementation in ``_pykernels`` is used. Setting
``QFEATURE_PURE_PYTHON=1`` forces the numpy path.
"""
import importlib
import os

from . import _pykernels


def load(name=None):
    """Return a kernel module by name ("c" or "python"); default is auto."""
    if name == "python":
        return _pykernels
    if name == "c":
        return importlib.import_module("qfeature._ckernels")
    if os.environ.get("QFEATURE_PURE_PYTHON") == "1":
        return _pykernels
    try:
        return importlib.import_module("qfeature._ckernels")
    except ImportError:
        return _pykernels


def available():
    """Names of the backends that can be loaded in this environment."""
    names = ["python"]
    try:
        importlib.import_module("qfeature._ckernels")
    except ImportError:
        return names
    return ["c"] + names


kernels = load()
NAME = "python" if kernels is _pykernels else "c"
