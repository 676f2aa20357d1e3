"""Exact sparse polynomials over the rationals.

A Poly is a dict mapping exponent tuples (one slot per variable) to nonzero
Fraction coefficients; the empty dict is zero.  All arithmetic is exact.  The
hot kernel (add, sub, mul, scale, diff) lives in a compiled extension when one
was built, with a pure Python twin as fallback; everything else is defined
here on top of it.

JSON form of a Poly:

    {"nvars": n, "terms": [{"exps": [e1, ..., en], "num": "3", "den": "2"}]}

Numerators and denominators are decimal strings so arbitrary precision
survives any JSON reader.  Terms are sorted by exponent tuple, so equal
polynomials serialize to identical bytes.
"""

from __future__ import annotations

import os
import random
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

if os.environ.get("COFRAMES_BACKEND", "") == "pure":
    from . import _kernel_py as _impl
else:
    try:
        from . import _kernel as _impl  # type: ignore[attr-defined]
    except ImportError:
        from . import _kernel_py as _impl

Rational = Fraction
Exponent = Tuple[int, ...]
Poly = Dict[Exponent, Fraction]

BACKEND: str = _impl.BACKEND

add = _impl.add
sub = _impl.sub
mul = _impl.mul
scale = _impl.scale
diff = _impl.diff

ZERO: Poly = {}


def zero() -> Poly:
    return {}


def const(c, nvars: int) -> Poly:
    """Constant polynomial in nvars variables."""
    c = Fraction(c)
    if not c:
        return {}
    return {(0,) * nvars: c}


def var(i: int, nvars: int) -> Poly:
    """The coordinate monomial x_i."""
    e = [0] * nvars
    e[i] = 1
    return {tuple(e): Fraction(1)}


def monomial(exps: Sequence[int], c) -> Poly:
    c = Fraction(c)
    if not c:
        return {}
    return {tuple(exps): c}


def neg(p: Poly) -> Poly:
    return {e: -c for e, c in p.items()}


def ppow(p: Poly, k: int) -> Poly:
    """p raised to a nonnegative integer power."""
    if k < 0:
        raise ValueError("negative power")
    out: Optional[Poly] = None
    for _ in range(k):
        out = p if out is None else mul(out, p)
    if out is None:
        raise ValueError("ppow needs nvars context for k = 0; use const")
    return out


def is_zero(p: Poly) -> bool:
    return not p


def is_constant(p: Poly) -> bool:
    return not p or (len(p) == 1 and not any(next(iter(p))))


def constant_value(p: Poly) -> Fraction:
    """Value of a constant polynomial."""
    if not p:
        return Fraction(0)
    if not is_constant(p):
        raise ValueError("polynomial is not constant")
    return next(iter(p.values()))


def degree(p: Poly) -> int:
    """Total degree; -1 for the zero polynomial."""
    if not p:
        return -1
    return max(sum(e) for e in p)


def weighted_degree(p: Poly, weights: Sequence[int]) -> int:
    """Max weighted degree of the terms; -1 for zero."""
    if not p:
        return -1
    return max(sum(w * k for w, k in zip(weights, e)) for e in p)


def is_weighted_homogeneous(p: Poly, weights: Sequence[int]) -> bool:
    degs = {sum(w * k for w, k in zip(weights, e)) for e in p}
    return len(degs) <= 1


def weighted_part(p: Poly, weights: Sequence[int], d: int) -> Poly:
    """Terms whose weighted degree equals d."""
    return {e: c for e, c in p.items()
            if sum(w * k for w, k in zip(weights, e)) == d}


def evaluate(p: Poly, point: Sequence[Fraction]) -> Fraction:
    """Exact value at a rational point."""
    total = Fraction(0)
    for e, c in p.items():
        v = c
        for x, k in zip(point, e):
            if k:
                v = v * x ** k
        total += v
    return total


def evaluate_partial(p: Poly, values: Dict[int, Fraction]) -> Poly:
    """Substitute rational values for some variables, keeping the rest."""
    out: Poly = {}
    for e, c in p.items():
        v = c
        e2 = list(e)
        for i, x in values.items():
            if e[i]:
                v = v * x ** e[i]
            e2[i] = 0
        if v:
            t = tuple(e2)
            s = out.get(t)
            if s is None:
                out[t] = v
            else:
                s = s + v
                if s:
                    out[t] = s
                else:
                    del out[t]
    return out


def nvars_of(p: Poly) -> Optional[int]:
    for e in p:
        return len(e)
    return None


def pdiv_exact(p: Poly, q: Poly) -> Poly:
    """Exact division p / q; raises if q does not divide p.

    Division is by the lex-leading term of q, as in the single-divisor case
    of multivariate reduction.  When p is a multiple of q this terminates
    with zero remainder; a nonzero remainder raises ValueError.
    """
    if not q:
        raise ZeroDivisionError("division by zero polynomial")
    if not p:
        return {}
    lead = max(q)
    lc = q[lead]
    rem = dict(p)
    quot: Poly = {}
    while rem:
        e = max(rem)
        d = tuple(a - b for a, b in zip(e, lead))
        if any(k < 0 for k in d):
            raise ValueError("inexact polynomial division")
        c = rem[e] / lc
        quot[d] = c
        rem = sub(rem, mul({d: c}, q))
    return quot


def pstr(p: Poly, names: Optional[Sequence[str]] = None) -> str:
    """Readable rendering, mostly for reports and error messages."""
    if not p:
        return "0"
    parts: List[str] = []
    for e in sorted(p, reverse=True):
        c = p[e]
        factors = []
        for i, k in enumerate(e):
            if k == 0:
                continue
            nm = names[i] if names else "x%d" % (i + 1)
            factors.append(nm if k == 1 else "%s^%d" % (nm, k))
        body = "*".join(factors)
        if not body:
            parts.append(str(c))
        elif c == 1:
            parts.append(body)
        elif c == -1:
            parts.append("-" + body)
        else:
            parts.append("%s*%s" % (c, body))
    out = parts[0]
    for t in parts[1:]:
        out += t if t.startswith("-") else "+" + t
    return out


def poly_to_json(p: Poly, nvars: int) -> dict:
    terms = []
    for e in sorted(p):
        c = p[e]
        terms.append({"exps": list(e), "num": str(c.numerator),
                      "den": str(c.denominator)})
    return {"nvars": nvars, "terms": terms}


def poly_from_json(obj: dict) -> Poly:
    n = int(obj["nvars"])
    out: Poly = {}
    for t in obj["terms"]:
        e = tuple(int(k) for k in t["exps"])
        if len(e) != n:
            raise ValueError("exponent length does not match nvars")
        c = Fraction(int(t["num"]), int(t["den"]))
        if c:
            out[e] = out.get(e, Fraction(0)) + c
            if not out[e]:
                del out[e]
    return out


def random_poly(rng: random.Random, nvars: int, max_degree: int,
                terms: int = 4, coeff_bound: int = 5) -> Poly:
    """Seeded random polynomial with small rational coefficients."""
    out: Poly = {}
    for _ in range(terms):
        d = rng.randint(0, max_degree)
        e = [0] * nvars
        for _ in range(d):
            e[rng.randrange(nvars)] += 1
        num = rng.randint(-coeff_bound, coeff_bound)
        den = rng.randint(1, 3)
        c = Fraction(num, den)
        if not c:
            continue
        t = tuple(e)
        s = out.get(t, Fraction(0)) + c
        if s:
            out[t] = s
        else:
            out.pop(t, None)
    return out
