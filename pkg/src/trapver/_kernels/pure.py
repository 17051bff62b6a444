"""Pure-Python oracle kernels over bit-mask place sets.

Markings and place sets are Python ints, one bit per place.  The
compiled twin in _native.pyx mirrors these signatures for nets of at
most 64 places; this module has no size limit and is the reference
implementation."""

from __future__ import annotations


def enumerate_traps(nplaces, pres, posts):
    """All nonempty traps: subsets W with, for every transition,
    W meets the preset only if W meets the postset."""
    ntr = len(pres)
    out = []
    for w in range(1, 1 << nplaces):
        ok = True
        for t in range(ntr):
            if (w & pres[t]) and not (w & posts[t]):
                ok = False
                break
        if ok:
            out.append(w)
    return out


def enumerate_one_invariants(nplaces, pres, posts, m0):
    """Subsets W holding exactly one initial token such that every
    transition either moves one token through W (|pre ∩ W| =
    |post ∩ W| ≤ 1) or consumes at least two W-places (and can never
    fire while W carries a single token)."""
    ntr = len(pres)
    out = []
    for w in range(1, 1 << nplaces):
        if (w & m0).bit_count() != 1:
            continue
        ok = True
        for t in range(ntr):
            a = (w & pres[t]).bit_count()
            if a >= 2:
                continue
            if a != (w & posts[t]).bit_count():
                ok = False
                break
        if ok:
            out.append(w)
    return out


def bfs_reach(nplaces, pres, posts, m0, cap):
    """Breadth-first reachability.  Returns (markings in visit order,
    one_safety_violated, truncated).  A violation is a firing that
    produces a token on a place already carrying one it did not
    consume."""
    ntr = len(pres)
    seen = {m0}
    order = [m0]
    violated = False
    truncated = False
    qi = 0
    while qi < len(order):
        if len(order) > cap:
            truncated = True
            break
        m = order[qi]
        qi += 1
        for t in range(ntr):
            pre = pres[t]
            if (m & pre) != pre:
                continue
            left = m & ~pre
            if left & posts[t]:
                violated = True
            m2 = left | posts[t]
            if m2 not in seen:
                seen.add(m2)
                order.append(m2)
    return order, violated, truncated
