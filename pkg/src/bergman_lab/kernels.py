"""Backend selection for the hot kernels.

The compiled extension is used when it imports; set ``BERGMAN_LAB_PURE=1``
to force the numpy fallback. ``BACKEND`` names the active one.
"""
from __future__ import annotations

import os

from . import _kernels_py

_pure = _kernels_py
_compiled = None

if not os.environ.get("BERGMAN_LAB_PURE"):
    try:
        from . import _ckernels as _compiled  # type: ignore[no-redef]
    except ImportError:
        _compiled = None

_active = _compiled if _compiled is not None else _pure
BACKEND = "cython" if _compiled is not None else "numpy"


def available_backends():
    return {"numpy": _pure, **({"cython": _compiled} if _compiled is not None else {})}


def get_backend(name=None):
    if name is None:
        return _active
    try:
        return available_backends()[name]
    except KeyError:
        raise ValueError(f"backend {name!r} not available") from None


def mobius_transport(centers, nodes):
    return _active.mobius_transport(centers, nodes)


def holo_eval(points, mono_coef, mono_exp, poles, ker_coef, ker_pole, ker_b,
              ker_logscale, want_grad=True):
    return _active.holo_eval(points, mono_coef, mono_exp, poles, ker_coef,
                             ker_pole, ker_b, ker_logscale, want_grad)


def projection_sum(zs, ws, coeffs, zeta, lam):
    return _active.projection_sum(zs, ws, coeffs, zeta, lam)


def greedy_separated(cands, tanh2_sep):
    return _active.greedy_separated(cands, tanh2_sep)
