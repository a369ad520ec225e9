"""Backend selection for the hot kernels.

The compiled ``_ckernels`` extension is used when it imports; otherwise the
numpy fallback in ``_pykernels`` takes over.  Setting ``EQUIMESH_PURE_PYTHON=1``
forces the fallback.
"""
import os

from . import _pykernels

BACKEND = "python"
_impl = _pykernels

if os.environ.get("EQUIMESH_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as _impl  # noqa: F811
        BACKEND = "cython"
    except ImportError:
        pass

nodal_metric = _impl.nodal_metric
half_fluxes = _impl.half_fluxes
lu_factor = _impl.lu_factor
lu_solve = _impl.lu_solve


def backends():
    """Return the available kernel modules keyed by name."""
    out = {"python": _pykernels}
    try:
        from . import _ckernels
        out["cython"] = _ckernels
    except ImportError:
        pass
    return out


def use(name):
    """Switch the module-level kernels to backend ``name``; returns the previous name."""
    global BACKEND, nodal_metric, half_fluxes, lu_factor, lu_solve
    mods = backends()
    if name not in mods:
        raise ValueError(f"backend {name!r} not available, have {sorted(mods)}")
    prev = BACKEND
    m = mods[name]
    nodal_metric, half_fluxes, lu_factor, lu_solve = m.nodal_metric, m.half_fluxes, m.lu_factor, m.lu_solve
    BACKEND = name
    return prev
