# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled twins of the pure kernels for nets of at most 64 places.

Same signatures and results as trapver._kernels.pure; the subset
enumerations run the 2^p loop in C."""

from cpython cimport array
import array

from libc.stdint cimport uint64_t


cdef extern from *:
    int __builtin_popcountll(unsigned long long) nogil


def enumerate_traps(int nplaces, pres, posts):
    if nplaces > 63:
        raise ValueError("native kernel is limited to 63 places")
    cdef array.array pa = array.array('Q', pres)
    cdef array.array qa = array.array('Q', posts)
    cdef uint64_t[::1] P = pa
    cdef uint64_t[::1] Q = qa
    cdef Py_ssize_t ntr = len(pres)
    cdef uint64_t w
    cdef uint64_t lim = (<uint64_t> 1) << nplaces
    cdef Py_ssize_t t
    cdef bint ok
    out = []
    for w in range(1, lim):
        ok = True
        for t in range(ntr):
            if (w & P[t]) != 0 and (w & Q[t]) == 0:
                ok = False
                break
        if ok:
            out.append(w)
    return out


def enumerate_one_invariants(int nplaces, pres, posts, unsigned long long m0):
    if nplaces > 63:
        raise ValueError("native kernel is limited to 63 places")
    cdef array.array pa = array.array('Q', pres)
    cdef array.array qa = array.array('Q', posts)
    cdef uint64_t[::1] P = pa
    cdef uint64_t[::1] Q = qa
    cdef Py_ssize_t ntr = len(pres)
    cdef uint64_t w
    cdef uint64_t lim = (<uint64_t> 1) << nplaces
    cdef Py_ssize_t t
    cdef int a
    cdef bint ok
    out = []
    for w in range(1, lim):
        if __builtin_popcountll(w & m0) != 1:
            continue
        ok = True
        for t in range(ntr):
            a = __builtin_popcountll(w & P[t])
            if a >= 2:
                continue
            if a != __builtin_popcountll(w & Q[t]):
                ok = False
                break
        if ok:
            out.append(w)
    return out


def bfs_reach(int nplaces, pres, posts, unsigned long long m0, long cap):
    if nplaces > 64:
        raise ValueError("native kernel is limited to 64 places")
    cdef array.array pa = array.array('Q', pres)
    cdef array.array qa = array.array('Q', posts)
    cdef uint64_t[::1] P = pa
    cdef uint64_t[::1] Q = qa
    cdef Py_ssize_t ntr = len(pres)
    cdef uint64_t m, m2, left, pre
    cdef Py_ssize_t t, qi = 0
    cdef bint violated = False
    cdef bint truncated = False
    seen = {m0}
    order = [m0]
    while qi < len(order):
        if len(order) > cap:
            truncated = True
            break
        m = order[qi]
        qi += 1
        for t in range(ntr):
            pre = P[t]
            if (m & pre) != pre:
                continue
            left = m & ~pre
            if left & Q[t]:
                violated = True
            m2 = left | Q[t]
            if m2 not in seen:
                seen.add(m2)
                order.append(m2)
    return order, violated, truncated
