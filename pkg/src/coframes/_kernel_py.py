"""Pure Python twin of the polynomial kernel.

A polynomial is a dict mapping exponent tuples to nonzero Fraction
coefficients.  The zero polynomial is the empty dict.  Every function here
returns a canonical dict: no zero coefficients are ever stored.  The compiled
twin in _kernel.pyx implements the same five functions with the same
semantics; ratpoly picks one of the two at import time.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Dict, Tuple

Exponent = Tuple[int, ...]
PolyDict = Dict[Exponent, Fraction]

BACKEND = "pure"


def add(p: PolyDict, q: PolyDict) -> PolyDict:
    """Sum of two polynomials."""
    out = dict(p)
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


def sub(p: PolyDict, q: PolyDict) -> PolyDict:
    """Difference p - q."""
    out = dict(p)
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


def mul(p: PolyDict, q: PolyDict) -> PolyDict:
    """Product of two polynomials."""
    if not p or not q:
        return {}
    out: PolyDict = {}
    for e1, c1 in p.items():
        for e2, c2 in q.items():
            e = tuple(a + b for a, b in zip(e1, e2))
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


def scale(p: PolyDict, c: Fraction) -> PolyDict:
    """Product of a polynomial with a constant."""
    if not c:
        return {}
    return {e: c * v for e, v in p.items()}


def diff(p: PolyDict, i: int) -> PolyDict:
    """Partial derivative with respect to variable i."""
    out: PolyDict = {}
    for e, c in p.items():
        k = e[i]
        if k:
            e2 = e[:i] + (k - 1,) + e[i + 1:]
            out[e2] = c * k
    return out
