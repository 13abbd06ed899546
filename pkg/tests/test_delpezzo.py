import random

import pytest

from obstrukt.arith import Poly
from obstrukt.delpezzo import (
    DP4Model,
    beta_norm_is_square,
    build_dp4,
    double_cover,
    odd_degree_model,
    preimage_count,
    quadratic_part,
    transfer_delta,
)
from obstrukt.surface import brute_force_fiber, enumerate_fiber


@pytest.fixture(scope="module")
def odd(curve):
    return odd_degree_model(curve, -1)


@pytest.fixture(scope="module")
def beta(delta, odd):
    return transfer_delta(delta, odd)


@pytest.fixture(scope="module")
def W(odd, beta):
    return build_dp4(odd, beta)


def test_odd_model_factors(odd):
    expected = Poly([1, -7, 7]) * Poly([1, -3, -4, 16])
    assert odd.g == expected
    assert odd.scalar == 1
    assert [int(c) for c in odd.g.coeffs] == [1, -10, 24, 23, -140, 112]


def test_round_trip(curve, odd):
    assert odd.round_trip() == curve.f


def test_rejects_non_roots(curve):
    with pytest.raises(ValueError):
        odd_degree_model(curve, 2)
    with pytest.raises(ValueError):
        odd_degree_model(Poly([1, 1]) * Poly([1, 1]) * Poly([1, 0, 0, 0, 1]), -1)


def test_beta_norm_square(odd, beta):
    assert beta_norm_is_square(beta, odd)
    assert beta.degree <= 4


def test_dp4_shape(W):
    assert isinstance(W, DP4Model)
    assert len(W.forms) == 2 and W.nvars == 5
    assert all(f.is_integral() for f in W.forms)


@pytest.mark.parametrize("p", [11, 13])
def test_cover_lands_on_W(model, odd, beta, W, p):
    V = enumerate_fiber(model, p)
    rng = random.Random(p)
    for q in rng.sample(V.points, 25):
        s = double_cover(q, odd, p)
        assert W.contains(s, p)
        assert quadratic_part(beta, s, odd, p).degree <= 2


@pytest.mark.parametrize("p", [11, 13])
def test_point_count_identity(model, odd, beta, W, p):
    V = enumerate_fiber(model, p)
    Wp = enumerate_fiber(W, p)
    assert sorted(Wp.points) == brute_force_fiber(W, p)
    assert sum(preimage_count(beta, s, odd, p) for s in Wp.points) == V.total
