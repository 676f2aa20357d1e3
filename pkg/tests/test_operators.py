"""Derived operators: ladders, orders, traces, named constructions."""

import random

import pytest

from coframes import ratpoly as rp
from coframes.forms import form_zero
from coframes.operators import (GradedSection, build_rs_complex,
                                derive_operator, measure_order,
                                named_complex, random_section)

from conftest import model, page1

_COMPLEXES = {}

# Ranks and measured orders of every named complex, frozen from this
# engine; the contact5, g2_5, and symplectic entries are also published
# tables.
GOLDEN = {
    ("contact5", "bgg"): ([1, 4, 5, 5, 4, 1], [1, 1, 2, 1, 1]),
    ("engel4", "bgg"): ([1, 2, 2, 2, 1], [1, 3, 3, 1]),
    ("g2_5", "bgg"): ([1, 2, 3, 3, 2, 1], [1, 3, 2, 3, 1]),
    ("g2_5", "ambient"): ([1, 2, 7, 10, 5, 1], [1, 3, 1, 1, 1]),
    ("g2_5", "basic"): ([1, 2, 6, 9, 5, 1], [1, 3, 1, 1, 1]),
    ("dl_5", "bgg"): ([1, 3, 6, 6, 3, 1], [1, 2, 1, 2, 1]),
    ("dist3in6", "bgg"): ([1, 3, 8, 12, 8, 3, 1], [1, 2, 2, 2, 2, 1]),
    ("elliptic7", "bgg"): ([1, 4, 11, 14, 14, 11, 4, 1],
                           [1, 2, 2, 2, 2, 2, 1]),
    ("hyperbolic7", "bgg"): ([1, 4, 11, 14, 14, 11, 4, 1],
                             [1, 2, 2, 2, 2, 2, 1]),
    ("symplectic4", "rs"): ([1, 4, 5, 5, 4, 1], [1, 1, 2, 1, 1]),
}


def complex_for(name, variant):
    key = (name, variant)
    if key not in _COMPLEXES:
        if name == "symplectic4":
            _COMPLEXES[key] = build_rs_complex(2)
        else:
            _COMPLEXES[key] = named_complex(model(name), variant)
    return _COMPLEXES[key]


@pytest.mark.parametrize("name,variant", sorted(GOLDEN))
def test_ranks_and_orders_frozen(name, variant):
    res = complex_for(name, variant)
    ranks, orders = GOLDEN[(name, variant)]
    assert res.ranks() == ranks
    assert res.orders(random.Random(7)) == orders


def test_g2_basic_bundle_ranks():
    res = complex_for("g2_5", "basic")
    assert res.nodes[2].rank == 6
    assert res.nodes[3].rank == 9


def test_rumin_middle_operator_order_two():
    res = complex_for("contact5", "bgg")
    h = res.operators[2]
    assert measure_order(h, random.Random(3)) == 2


def test_engel_p_order_and_trace_recipe():
    m = model("engel4")
    p1 = page1("engel4")
    P = derive_operator(m, (1, 0), (2, 1), page1=p1)
    rng = random.Random(3)
    gen = [rp.random_poly(rng, 4, 2, terms=4) for _ in range(P.source.rank)]
    P.apply(gen, record_trace=True)
    killed = [(s.via_cell, s.killed) for s in P.trace]
    # first correction removes the omega2^omega3 component, the second the
    # omega1^omega2 component (0-based pairs (2,3) then (1,2))
    assert killed[0] == ((1, 1), [(2, 3)])
    assert killed[1] == ((1, 2), [(1, 2)])
    assert measure_order(P, random.Random(5)) == 2


def test_engel_s_order_three():
    m = model("engel4")
    S = derive_operator(m, (2, 1), (3, 3), page1=page1("engel4"))
    assert measure_order(S, random.Random(5)) == 3


def test_five_var_e_order_three():
    res = complex_for("g2_5", "bgg")
    assert measure_order(res.operators[1], random.Random(5)) == 3


def test_order_equals_weight_gap_on_six_and_seven_var():
    for name in ("dist3in6", "elliptic7"):
        res = complex_for(name, "bgg")
        rng = random.Random(11)
        for h in res.operators:
            # node weights are total coframe weights; the measured order is
            # the largest jump any component realizes
            gap = max(h.target.weights) - min(h.source.weights)
            assert measure_order(h, rng) == gap


def test_composition_zero_quick(each_model):
    res = complex_for(each_model.name, "bgg")
    rng = random.Random(23)
    for k in range(len(res.operators) - 1):
        sec = random_section(res.nodes[k], rng, max_degree=2)
        mid = res.operators[k].apply(sec)
        out = res.operators[k + 1].apply(mid)
        assert all(not p for p in out)


def test_lift_independence():
    res = complex_for("g2_5", "bgg")
    h = res.operators[1]
    m = model("g2_5")
    page0 = h.page1.page0
    rng = random.Random(5)
    deeper = [key for key, c in page0.cells.items()
              if key[0] == h.source.degree
              and c.weight > max(h.source.weights) + h.source.degree]
    for _ in range(10):
        coeffs = [rp.random_poly(rng, m.nvars, 3, terms=3)
                  for _ in range(h.source.rank)]
        base = h.apply(coeffs)
        key = deeper[rng.randrange(len(deeper))]
        cell = page0.cells[key]
        extra = form_zero(m.nvars, h.source.degree, m.basis_tag)
        extra.add_term(cell.basis[rng.randrange(len(cell.basis))],
                       rp.random_poly(rng, m.nvars, 2, terms=2))
        assert h.apply(coeffs, lift_extra=extra) == base


def test_constants_are_killed_by_first_operator(each_model):
    res = complex_for(each_model.name, "bgg")
    out = res.operators[0].apply([rp.const(5, each_model.nvars)])
    assert all(not p for p in out)


def test_rs_complex_shape():
    res = complex_for("symplectic4", "rs")
    assert [n.rank for n in res.nodes] == [1, 4, 5, 5, 4, 1]
    rng = random.Random(3)
    for k in range(len(res.operators) - 1):
        sec = random_section(res.nodes[k], rng, max_degree=2)
        out = res.operators[k + 1].apply(res.operators[k].apply(sec))
        assert all(not p for p in out)


def test_graded_section_json_roundtrip():
    rng = random.Random(31)
    res = complex_for("engel4", "bgg")
    sec = GradedSection("engel4", "bgg", 1,
                        random_section(res.nodes[1], rng))
    blob = sec.to_json(4)
    assert blob["cell"] == 1
    back = GradedSection.from_json(blob)
    assert back.node == sec.node
    assert back.coeffs == sec.coeffs


def test_derive_operator_between_named_cells():
    m = model("engel4")
    T = derive_operator(m, (2, 2), (3, 3), page1=page1("engel4"))
    assert measure_order(T, random.Random(7)) == 1
