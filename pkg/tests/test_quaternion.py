import random
from fractions import Fraction

import pytest

from obstrukt.quaternion import AlgebraDescriptor, real_positivity_certificate, verify_brauer_membership
from obstrukt.surface import enumerate_fiber


def test_algebra_invariants(algebra):
    assert algebra.c == Fraction(-7)
    assert algebra.F.degree == 4 and algebra.G.degree == 4
    assert algebra.F.is_integral() and algebra.G.is_integral()
    assert algebra.log["F_nonzero"] == 66
    assert algebra.log["condition3_residual"] < 1e-100
    assert len(algebra.log["modular_checks"]) == 3


def test_algebra_is_stable_under_precision(algebra):
    lo, hi = algebra.log["precisions"]
    assert hi == 2 * lo


def test_membership(algebra, curve, delta, model):
    rep = verify_brauer_membership(algebra, curve, delta, model)
    assert rep.verified
    assert rep.checks["G_is_square"]
    assert rep.checks["F_zero_lines_are_N1_N2_lines"]
    assert len(rep.zero_lines_F) == 16


def test_real_place_positive(algebra, curve, delta, model):
    cert = real_positivity_certificate(algebra, curve, delta, model)
    assert cert["certified"]
    assert float(cert["kappa"]) > 0
    assert cert["conjugacy_residual"] < 1e-100


def test_json_round_trip(algebra):
    doc = algebra.to_json()
    back = AlgebraDescriptor.from_json(doc)
    assert back.F == algebra.F and back.G == algebra.G and back.c == algebra.c
    with pytest.raises(ValueError):
        AlgebraDescriptor.from_json({"c": "0", "F": doc["F"], "G": doc["G"]})
    with pytest.raises(ValueError):
        AlgebraDescriptor.from_json({"c": "-7", "F": doc["F"][:5], "G": doc["G"]})


@pytest.mark.parametrize("p", [11, 13])
def test_F_not_identically_zero_mod_p(algebra, model, p):
    pts = enumerate_fiber(model, p).points
    vals = [algebra.F.eval_mod(x, p) for x in random.Random(p).sample(pts, 30)]
    assert any(vals)
