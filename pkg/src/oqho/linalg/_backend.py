"""Kernel backend selection.

The compiled extension is preferred when it imports; otherwise the
pure-Python module is used. :func:`set_backend` switches explicitly.
"""

from __future__ import annotations

from types import ModuleType

from . import _kernels_py

try:
    from . import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None

_active: ModuleType = _compiled if _compiled is not None else _kernels_py


def available() -> list[str]:
    names = ["python"]
    if _compiled is not None:
        names.insert(0, "compiled")
    return names


def kernels() -> ModuleType:
    return _active


def current() -> str:
    return _active.BACKEND_NAME


def get(name: str) -> ModuleType:
    if name == "python":
        return _kernels_py
    if name == "compiled":
        if _compiled is None:
            raise ImportError("compiled kernels are not built; run `pip install -e .`")
        return _compiled
    raise ValueError(f"unknown backend {name!r}")


def set_backend(name: str) -> str:
    """Activate ``"compiled"`` or ``"python"``; returns the previous name."""
    global _active
    previous = _active.BACKEND_NAME
    _active = get(name)
    return previous
