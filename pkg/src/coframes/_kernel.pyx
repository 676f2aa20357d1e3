# cython: language_level=3
# cython: boundscheck=False
# cython: wraparound=False
"""Compiled twin of the polynomial kernel.

Same five functions and the same canonical-dict contract as _kernel_py;
coefficients stay Fraction objects, the win is loop mechanics.  ratpoly
imports this module when the extension was built and silently falls back
to the pure twin otherwise.
"""

from fractions import Fraction

BACKEND = "cython"

_ZERO = Fraction(0)


cdef inline tuple _eadd(tuple e1, tuple e2):
    cdef Py_ssize_t i, n = len(e1)
    cdef list tmp = [None] * n
    for i in range(n):
        tmp[i] = e1[i] + e2[i]
    return tuple(tmp)


def add(dict p, dict q):
    """Sum of two polynomials."""
    cdef dict out = dict(p)
    for e, c in q.items():
        s = out.get(e)
        if s is None:
            out[e] = c
        else:
            s = s + c
            if s:
                out[e] = s
            else:
                del out[e]
    return out


def sub(dict p, dict q):
    """Difference p - q."""
    cdef dict out = dict(p)
    for e, c in q.items():
        s = out.get(e)
        if s is None:
            out[e] = -c
        else:
            s = s - c
            if s:
                out[e] = s
            else:
                del out[e]
    return out


def mul(dict p, dict q):
    """Product of two polynomials."""
    if not p or not q:
        return {}
    cdef dict out = {}
    cdef list qitems = list(q.items())
    cdef Py_ssize_t j, m = len(qitems)
    cdef tuple e1, e2, e
    for e1, c1 in p.items():
        for j in range(m):
            e2, c2 = <tuple>qitems[j]
            e = _eadd(e1, e2)
            c = c1 * c2
            s = out.get(e)
            if s is None:
                out[e] = c
            else:
                s = s + c
                if s:
                    out[e] = s
                else:
                    del out[e]
    return out


def scale(dict p, c):
    """Product of a polynomial with a constant."""
    if not c:
        return {}
    cdef dict out = {}
    for e, v in p.items():
        out[e] = c * v
    return out


def diff(dict p, Py_ssize_t i):
    """Partial derivative with respect to variable i."""
    cdef dict out = {}
    cdef tuple e, e2
    cdef Py_ssize_t k
    for e, c in p.items():
        k = e[i]
        if k:
            e2 = e[:i] + (k - 1,) + e[i + 1:]
            out[e2] = c * k
    return out
