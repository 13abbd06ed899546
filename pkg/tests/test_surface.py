import random

import pytest

from obstrukt import data
from obstrukt.surface import (
    NotSmoothError,
    ProjPoint,
    bad_primes,
    brute_force_fiber,
    build_quadrics,
    enumerate_fiber,
    explore_lift_tree,
    lift_smooth_point,
)


def test_constructed_model_matches_printed_span(model, printed_model):
    assert len(model.forms) == 3
    assert all(f.degree == 2 and f.is_integral() for f in model.forms)
    assert model.same_span(printed_model)


def test_printed_delta_gives_same_span(curve, printed_delta, model):
    # a rational rescaling of delta does not move the span
    assert build_quadrics(curve, printed_delta).same_span(model)


def test_span_detects_a_different_model(curve, model):
    from obstrukt.etale import EtaleElement

    other = build_quadrics(curve, EtaleElement.from_coeffs([1, 2, 0, 0, 0, 0], curve))
    assert not other.same_span(model)


@pytest.mark.parametrize("p", [3, 5, 7, 11, 13])
def test_fiber_matches_brute_force(printed_model, p):
    rep = enumerate_fiber(printed_model, p)
    assert sorted(rep.points) == brute_force_fiber(printed_model, p)
    assert len(rep.smooth) + len(rep.singular) == rep.total


def test_fiber_mod_7(printed_model):
    rep = enumerate_fiber(printed_model, 7)
    assert rep.total == 71
    assert [ProjPoint(x, 7).coords for x in rep.singular] == [ProjPoint((3, 6, 3, 1, 2, 1), 7).coords]


def test_fiber_mod_3_all_singular(printed_model):
    rep = enumerate_fiber(printed_model, 3)
    assert rep.total == 40
    assert not rep.smooth


@pytest.mark.parametrize("p", [5, 11, 13])
def test_smooth_lifts_solve_forms(printed_model, p):
    rep = enumerate_fiber(printed_model, p)
    rng = random.Random(p)
    for x in rng.sample(rep.smooth, 5):
        lifted = lift_smooth_point(printed_model, ProjPoint(x, p), 8)
        assert printed_model.contains(lifted.coords, p**8)
        assert lifted.reduce(1) == ProjPoint(x, p)


def test_singular_point_refuses_hensel(printed_model):
    with pytest.raises(NotSmoothError):
        lift_smooth_point(printed_model, ProjPoint((3, 6, 3, 1, 2, 1), 7), 4)


def test_lift_tree_counts_are_consistent(printed_model):
    tree = explore_lift_tree(printed_model, ProjPoint((3, 6, 3, 1, 2, 1), 7), 2)
    assert tree.sizes[0] == 1
    assert all(printed_model.contains(x, 7**2) for x in tree.survivors)


def test_bad_primes_union(model, curve, delta):
    rep = bad_primes(model, data.FLAGSHIP_BAD_PRIMES, 13, curve, delta, certified=True)
    assert set(data.FLAGSHIP_BAD_PRIMES) <= set(rep.primes)
    assert rep.method == "certified-hints"
    assert "singular fibre point" in rep.sources[7]
    assert bad_primes(model, None, 7).method == "heuristic"
