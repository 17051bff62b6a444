"""Kernel dispatch: compiled implementation when built and applicable,
pure Python otherwise.  Set TRAPVER_PURE=1 to force the pure kernels."""

from __future__ import annotations

import os

from . import pure as _pure

_impl = None
if os.environ.get("TRAPVER_PURE", "").lower() not in ("1", "true", "yes"):
    try:
        from . import _native as _impl
    except ImportError:
        _impl = None

BACKEND = "native" if _impl is not None else "pure"


def enumerate_traps(nplaces, pres, posts):
    if _impl is not None and nplaces <= 63:
        return _impl.enumerate_traps(nplaces, pres, posts)
    return _pure.enumerate_traps(nplaces, pres, posts)


def enumerate_one_invariants(nplaces, pres, posts, m0):
    if _impl is not None and nplaces <= 63:
        return _impl.enumerate_one_invariants(nplaces, pres, posts, m0)
    return _pure.enumerate_one_invariants(nplaces, pres, posts, m0)


def bfs_reach(nplaces, pres, posts, m0, cap):
    if _impl is not None and nplaces <= 64:
        return _impl.bfs_reach(nplaces, pres, posts, m0, cap)
    return _pure.bfs_reach(nplaces, pres, posts, m0, cap)
