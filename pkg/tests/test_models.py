"""Geometry models: structure verification, Levi data, orbit classes."""

import json
import random
import time
from fractions import Fraction

import pytest

from coframes import ratpoly as rp
from coframes.models import (builtin_model, builtin_names, change_rows,
                             coframe_d, levi_apply, levi_form,
                             model_from_json, model_to_json, orbit_invariant,
                             split_by_cell_weight, splitting_shift,
                             symplectic_data, verify_structure)
from coframes.forms import exterior_d, form_sub, one_form

from conftest import model, random_unipotent


def test_builtin_names_count():
    assert len(builtin_names()) == 7


def test_structure_suite_all_models(each_model):
    rep = verify_structure(each_model)
    assert rep.diag_ok and rep.det_ok and rep.inverse_ok
    assert rep.weight_homogeneous
    assert all(c["holds"] for c in rep.congruences)
    assert rep.congruences, "every builtin declares congruences"


def test_structure_suite_under_a_second():
    t0 = time.monotonic()
    for name in builtin_names():
        assert verify_structure(builtin_model(name)).ok
    assert time.monotonic() - t0 < 1.0


def test_coframe_d_is_coordinate_d_in_disguise(each_model):
    m = each_model
    rng = random.Random(3)
    from coframes.forms import change_basis, form_zero
    for _ in range(5):
        f = form_zero(m.nvars, 1, m.basis_tag)
        i = rng.randrange(m.nvars)
        f.add_term((i,), rp.random_poly(rng, m.nvars, 2, terms=3))
        d1 = change_basis(coframe_d(m, f), m, "coordinate")
        d2 = exterior_d(change_basis(f, m, "coordinate"))
        assert form_sub(d1, d2).is_zero()


def test_split_by_cell_weight_partitions(each_model):
    m = each_model
    rng = random.Random(5)
    from coframes.forms import form_zero
    f = form_zero(m.nvars, 2, m.basis_tag)
    for _ in range(6):
        i, j = rng.randrange(m.nvars), rng.randrange(m.nvars)
        if i == j:
            continue
        f.add_term((min(i, j), max(i, j)),
                   rp.random_poly(rng, m.nvars, 2, terms=2))
    parts = split_by_cell_weight(m, f)
    acc = form_zero(m.nvars, 2, m.basis_tag)
    for w, piece in parts.items():
        assert w >= 2
        for idx in piece.terms:
            assert sum(m.weights[k] for k in idx) == w
        for idx, p in piece.terms.items():
            acc.add_term(idx, p)
    assert acc == f


def test_levi_form_constant_on_builtins(each_model):
    rep = levi_form(each_model)
    if not rep.vertical:
        pytest.skip("no vertical covectors")
    assert rep.constant


def test_levi_apply_matches_depth2_congruences(each_model):
    m = each_model
    horiz = set(m.selectors.get("horizontal", ()))
    by_index = {c.index: c for c in m.congruences}
    checked = 0
    for a in m.selectors.get("depth2", ()):
        cong = by_index.get(a)
        if cong is None:
            continue
        if not all(set(idx) <= horiz for idx in cong.rhs.terms):
            continue
        va = one_form(m.nvars, a, m.basis_tag)
        assert form_sub(levi_apply(m, va), cong.rhs).is_zero()
        checked += 1
    assert checked, "every builtin has a horizontal depth-2 congruence"


def test_orbit_invariant_classifies_both_seven_var_models():
    e = orbit_invariant(model("elliptic7"))
    h = orbit_invariant(model("hyperbolic7"))
    assert e.kind == "elliptic" and e.inertia == (3, 0, 0)
    assert h.kind == "hyperbolic" and h.inertia == (1, 2, 0)
    assert e.levi_injective and h.levi_injective


@pytest.mark.parametrize("name", ["elliptic7", "hyperbolic7"])
def test_orbit_invariant_unipotent_invariance(name):
    m = model(name)
    base = orbit_invariant(m)
    rng = random.Random(13)
    for t in range(5):
        m2 = change_rows(m, random_unipotent(m, rng), "%s_u%d" % (name, t))
        rep = orbit_invariant(m2)
        assert rep.kind == base.kind
        assert rep.inertia == base.inertia


def test_orbit_invariant_rejects_wrong_shape():
    with pytest.raises(ValueError):
        orbit_invariant(model("dist3in6"))


def test_splitting_shift_validates_rows():
    m = model("dist3in6")
    with pytest.raises(ValueError):
        splitting_shift(m, {(0, 3): rp.const(1, m.nvars)})
    shifted = splitting_shift(m, {(3, 0): rp.var(4, m.nvars)})
    rep = verify_structure(shifted)
    assert all(c["holds"] for c in rep.congruences)


def test_change_rows_requires_unimodular():
    m = model("engel4")
    n = m.nvars
    emat = [[rp.const(2 if i == j else 0, n) for j in range(n)]
            for i in range(n)]
    with pytest.raises(ValueError):
        change_rows(m, emat, "bad")


def test_symplectic_data():
    data = symplectic_data(2)
    alpha, jform = data["alpha"], data["J"]
    assert form_sub(exterior_d(alpha), jform).is_zero()
    assert exterior_d(jform).is_zero()


def test_model_json_roundtrip(each_model):
    m = each_model
    blob = model_to_json(m)
    text = json.dumps(blob, sort_keys=True)
    back = model_from_json(json.loads(text))
    assert back.nvars == m.nvars
    assert back.weights == m.weights
    assert back.coframe == m.coframe
    assert len(back.congruences) == len(m.congruences)
    for c1, c2 in zip(back.congruences, m.congruences):
        assert c1.index == c2.index
        assert c1.rhs == c2.rhs
        assert c1.mod == c2.mod
    assert verify_structure(back).ok
