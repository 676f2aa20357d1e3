"""Splitting normalization: obstructions, shift action, certificates."""

import random

import pytest

from coframes import ratpoly as rp
from coframes.models import splitting_shift, verify_structure
from coframes.pages import check_function_linear
from coframes.splitting import (certify_two_adapted, normalize_splitting,
                                obstruction, obstruction_hom, perturb,
                                shift_action_rank)

from conftest import model

SPLIT_MODELS = ("dist3in6", "elliptic7", "hyperbolic7")

# The shift action moves the whole 6-dimensional symmetric target for the
# six-variable model; for the seven-variable models only a rank-8 image
# inside the 20-dimensional trace-free target is reachable.
ACTION_RANKS = {"dist3in6": 6, "elliptic7": 8, "hyperbolic7": 8}


@pytest.mark.parametrize("name", SPLIT_MODELS)
def test_builtin_obstruction_vanishes(name):
    assert obstruction(model(name)).is_zero


@pytest.mark.parametrize("name", SPLIT_MODELS)
def test_shift_action_rank_frozen(name):
    assert shift_action_rank(model(name)) == ACTION_RANKS[name]


def test_obstruction_rejects_other_shapes():
    with pytest.raises(KeyError):
        obstruction(model("engel4"))


@pytest.mark.parametrize("name", SPLIT_MODELS)
def test_normalize_round_trips_injected_perturbations(name):
    m = model(name)
    rng = random.Random(41)
    for trial in range(3):
        shifted, shifts = perturb(m, rng, max_degree=2, npairs=3)
        assert not obstruction(shifted).is_zero
        rep = normalize_splitting(shifted)
        assert rep.obstruction_zero
        assert rep.residual is None
        assert obstruction(rep.normalized).is_zero


def test_normalize_is_identity_on_builtins():
    for name in SPLIT_MODELS:
        rep = normalize_splitting(model(name))
        assert rep.obstruction_zero
        assert rep.iterations == 0
        assert rep.shifts == []


def test_two_adapted_certificate_dist3in6():
    cert = certify_two_adapted(model("dist3in6"))
    assert cert.weight3_ok
    assert cert.residual_zero
    assert cert.ok


def test_two_adapted_survives_normalized_perturbation():
    m = model("dist3in6")
    rng = random.Random(43)
    shifted, _ = perturb(m, rng, max_degree=1, npairs=2)
    rep = normalize_splitting(shifted)
    assert rep.obstruction_zero
    cert = certify_two_adapted(rep.normalized)
    assert cert.ok


@pytest.mark.parametrize("name", SPLIT_MODELS)
def test_obstruction_hom_function_linear(name):
    m = model(name)
    fn, inputs = obstruction_hom(m)
    mults = [rp.var(0, m.nvars),
             rp.add(rp.const(2, m.nvars), rp.var(m.nvars - 1, m.nvars))]
    ok, failures = check_function_linear(fn, inputs, mults)
    assert ok, failures


def test_shifted_model_keeps_congruences_mod_vertical():
    m = model("dist3in6")
    shifted = splitting_shift(m, {(3, 0): rp.var(4, m.nvars)})
    rep = verify_structure(shifted)
    assert all(c["holds"] for c in rep.congruences)
    vert = set(m.selectors["vertical"])
    for cg in shifted.congruences:
        assert vert <= set(cg.mod)


def test_normalize_reports_iterations_bounded():
    m = model("elliptic7")
    rng = random.Random(47)
    shifted, _ = perturb(m, rng, max_degree=3, npairs=4)
    rep = normalize_splitting(shifted, max_iter=6)
    assert rep.obstruction_zero
    assert rep.iterations <= 6
