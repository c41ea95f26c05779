"""Select the Lotka-Volterra stepping kernel.

The compiled extension is used when it imports; set ``KOLMO_BACKEND=python``
to force the pure-Python fallback.
"""
import os

from . import _lvkernel_py

try:
    from . import _lvkernel as _compiled
except ImportError:  # extension not built
    _compiled = None

BACKENDS = {"python": _lvkernel_py}
if _compiled is not None:
    BACKENDS["compiled"] = _compiled

_requested = os.environ.get("KOLMO_BACKEND", "").strip().lower()
if _requested and _requested not in ("python", "compiled"):
    raise ImportError(f"KOLMO_BACKEND must be 'python' or 'compiled', got {_requested!r}")
if _requested == "compiled" and _compiled is None:
    raise ImportError("KOLMO_BACKEND=compiled but the extension is not built")

NAME = _requested or ("compiled" if _compiled is not None else "python")
kernel = BACKENDS[NAME]


def get(name=None):
    """Kernel module by name (default: the active one)."""
    if name is None:
        return kernel
    try:
        return BACKENDS[name]
    except KeyError:
        raise ValueError(f"backend {name!r} unavailable; have {sorted(BACKENDS)}") from None
