"""Kernel backend selection: compiled extension when built, else pure Python.

Both backends implement the same two functions with identical semantics, so
switching never changes results, only speed. Tests and the benchmark switch
explicitly via set_backend().
"""

from __future__ import annotations

from . import _kernels_py

_BACKENDS = {"pure": _kernels_py}

try:
    from . import _kernels_c

    _BACKENDS["compiled"] = _kernels_c
except ImportError:  # extension not built; pure fallback is fine
    _kernels_c = None

_active = "compiled" if "compiled" in _BACKENDS else "pure"


def available_backends() -> list[str]:
    return sorted(_BACKENDS)


def active_backend() -> str:
    return _active


def set_backend(name: str) -> None:
    global _active
    if name not in _BACKENDS:
        raise ValueError(f"backend {name!r} not available "
                         f"(have {available_backends()})")
    _active = name


def kernels():
    return _BACKENDS[_active]
