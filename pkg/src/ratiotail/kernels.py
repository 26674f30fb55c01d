"""Backend selection for the sampling kernel.

The compiled extension is used when it imports; setting the environment
variable ``RATIOTAIL_PURE_PYTHON=1`` forces the numpy fallback.
"""

import os

from . import _kernels_py

try:
    if os.environ.get("RATIOTAIL_PURE_PYTHON", "") not in ("", "0"):
        raise ImportError("pure-python backend requested")
    from . import _kernels as _compiled
except ImportError:
    _compiled = None

BACKEND = "compiled" if _compiled is not None else "python"
_active = _compiled if _compiled is not None else _kernels_py


def available_backends():
    return ("compiled", "python") if _compiled is not None else ("python",)


def get_backend(name=None):
    """Kernel module by name (``"compiled"`` or ``"python"``), default active."""
    if name is None:
        return _active
    if name == "python":
        return _kernels_py
    if name == "compiled":
        if _compiled is None:
            raise ImportError("compiled kernels are not built")
        return _compiled
    raise ValueError(f"unknown backend {name!r}")


def conditional_quantile(family, param, atom_ratio, atom_fw, atom_gw, y, u):
    return _active.conditional_quantile(family, param, atom_ratio, atom_fw, atom_gw, y, u)
