"""Randomized invariants, driven by hypothesis with seeded generators.

Each property runs a couple hundred cases.  The generators stay small on
purpose: two-term coefficients and low polynomial degree keep a single
case in the millisecond range while still exercising every code path.
"""

import itertools
import math
import random

from hypothesis import HealthCheck, given, settings, strategies as st

import coframes.ratpoly as rp
from coframes.forms import (change_basis, exterior_d, form_scale, form_sub,
                            form_zero, wedge)
from coframes.models import builtin_model, change_rows
from coframes.operators import named_complex
from coframes.pages import Page0

from conftest import model, random_unipotent

SMALL = ["engel4", "contact5", "dl_5", "g2_5"]
WIDE = SMALL + ["dist3in6"]

PROP = settings(max_examples=200, derandomize=True, deadline=None,
                suppress_health_check=[HealthCheck.too_slow])


def rand_form(rng, nvars, degree, terms=2, deg=2):
    f = form_zero(nvars, degree)
    idxs = list(itertools.combinations(range(nvars), degree))
    for _ in range(terms):
        idx = idxs[rng.randrange(len(idxs))]
        f.add_term(idx, rp.random_poly(rng, nvars, deg, terms=2))
    return f


@PROP
@given(st.integers(0, len(WIDE) - 1), st.integers(0, 10 ** 6))
def test_d_squared_zero(which, seed):
    m = model(WIDE[which])
    rng = random.Random(seed)
    p = rng.randrange(0, m.nvars - 1)
    a = rand_form(rng, m.nvars, p, deg=3)
    assert exterior_d(exterior_d(a)).is_zero()


@PROP
@given(st.integers(0, len(SMALL) - 1), st.integers(0, 10 ** 6))
def test_d_leibniz(which, seed):
    m = model(SMALL[which])
    rng = random.Random(seed)
    p = rng.randrange(0, m.nvars - 1)
    q = rng.randrange(0, m.nvars - p)
    a = rand_form(rng, m.nvars, p)
    b = rand_form(rng, m.nvars, q)
    lhs = exterior_d(wedge(a, b))
    rhs = form_sub(wedge(exterior_d(a), b),
                   form_scale(wedge(a, exterior_d(b)), (-1) ** (p + 1)))
    assert form_sub(lhs, rhs).is_zero()


@PROP
@given(st.integers(0, len(WIDE) - 1), st.integers(0, 10 ** 6))
def test_basis_round_trip(which, seed):
    m = model(WIDE[which])
    rng = random.Random(seed)
    p = rng.randrange(0, m.nvars + 1)
    a = rand_form(rng, m.nvars, p)
    back = change_basis(change_basis(a, m, "coframe"), m, "coordinate")
    assert form_sub(back, a).is_zero()


@PROP
@given(st.integers(0, len(SMALL) - 1), st.integers(0, 10 ** 6))
def test_cell_column_sums_binomial(which, seed):
    base = builtin_model(SMALL[which])
    rng = random.Random(seed)
    m = change_rows(base, random_unipotent(base, rng), "changed")
    page = Page0(m)
    for p, total in page.degree_dims().items():
        assert total == math.comb(m.nvars, p)
    assert page.dims() == Page0(base).dims()


class _LiftSetup:
    handle = None
    deeper = None

    @classmethod
    def get(cls):
        if cls.handle is None:
            res = named_complex(builtin_model("engel4"), "bgg")
            h = res.operators[1]
            page0 = h.page1.page0
            cls.handle = h
            cls.deeper = [key for key, c in page0.cells.items()
                          if key[0] == h.source.degree
                          and c.weight > max(h.source.weights)
                          + h.source.degree]
        return cls.handle, cls.deeper


@PROP
@given(st.integers(0, 10 ** 6))
def test_lift_independence(seed):
    h, deeper = _LiftSetup.get()
    m = model("engel4")
    rng = random.Random(seed)
    coeffs = [rp.random_poly(rng, m.nvars, 2, terms=2)
              for _ in range(h.source.rank)]
    base = h.apply(coeffs)
    key = deeper[rng.randrange(len(deeper))]
    cell = h.page1.page0.cells[key]
    extra = form_zero(m.nvars, h.source.degree, m.basis_tag)
    extra.add_term(cell.basis[rng.randrange(len(cell.basis))],
                   rp.random_poly(rng, m.nvars, 2, terms=2))
    assert h.apply(coeffs, lift_extra=extra) == base
