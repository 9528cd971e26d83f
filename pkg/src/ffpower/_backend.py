"""Kernel backend selection.

The compiled extension is used when it imports; otherwise the pure-Python
fallback. Set ``FFPOWER_BACKEND=python`` to force the fallback.
"""

import os
import types

from . import _fallback

KIND_FRACTION = _fallback.KIND_FRACTION
KIND_TABLE = _fallback.KIND_TABLE


def _load_compiled():
    try:
        from . import _kernels
    except ImportError:
        return None
    return _kernels


_compiled = _load_compiled()


def get_backend(name: str) -> types.ModuleType:
    """Return the kernel module for ``name`` in {"compiled", "python"}."""
    if name == "python":
        return _fallback
    if name == "compiled":
        if _compiled is None:
            raise ImportError("compiled kernels are not built; run `pip install -e .`")
        return _compiled
    raise ValueError(f"unknown backend {name!r}")


def available_backends() -> list[str]:
    return ["compiled", "python"] if _compiled is not None else ["python"]


if os.environ.get("FFPOWER_BACKEND", "").lower() == "python" or _compiled is None:
    BACKEND = "python"
else:
    BACKEND = "compiled"

kernels = get_backend(BACKEND)
simulate = kernels.simulate
bellman = kernels.bellman
