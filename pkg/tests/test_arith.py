import random
from fractions import Fraction
from itertools import product

import pytest
from cypari import pari

from obstrukt.arith import (
    Form,
    IntMatrix,
    Poly,
    discriminant,
    elementary_divisors,
    factor_mod_p,
    format_rat,
    is_padic_square,
    legendre,
    parse_rat,
    resultant,
    roots_mod_p,
    smith_normal_form,
    sqrt_mod,
    unit_part,
    valuation,
)


def _mul(A, B):
    return [[sum(A[i][k] * B[k][j] for k in range(len(B))) for j in range(len(B[0]))] for i in range(len(A))]


def _det(M):
    return int(pari.matdet(pari.matrix(len(M), len(M), [x for r in M for x in r])))


@pytest.mark.parametrize("seed", range(25))
def test_snf_transforms_are_unimodular(seed):
    rng = random.Random(seed)
    m, n = rng.randint(1, 6), rng.randint(1, 6)
    rows = [[rng.randint(-9, 9) for _ in range(n)] for _ in range(m)]
    U, S, V = smith_normal_form(IntMatrix(rows))
    assert abs(_det(U.tolist())) == 1
    assert abs(_det(V.tolist())) == 1
    assert _mul(_mul(U.tolist(), rows), V.tolist()) == S.tolist()
    diag = [S[i, i] for i in range(min(m, n))]
    assert all(S[i, j] == 0 for i in range(m) for j in range(n) if i != j)
    nz = [d for d in diag if d]
    assert all(b % a == 0 for a, b in zip(nz, nz[1:]))
    assert sorted(nz) == elementary_divisors(IntMatrix(rows))


def test_parse_rat_names_field():
    assert parse_rat("-7/2956") == Fraction(-7, 2956)
    with pytest.raises(ValueError, match="delta\\[2\\]"):
        parse_rat("1/0", "delta[2]")
    with pytest.raises(ValueError, match="f"):
        parse_rat(1.5, "f")
    assert format_rat(Fraction(6, 3)) == "2"


def test_resultant_is_product_over_roots():
    a = Poly.from_roots([1, 2, 3])
    b = Poly.from_roots([5, -1])
    expected = 1
    for r in (1, 2, 3):
        expected *= b(r)
    assert resultant(a, b) == expected


def test_discriminant_detects_repeated_roots():
    assert discriminant(Poly.from_roots([1, 1, 2])) == 0
    assert discriminant(Poly([-2, 0, 1])) == 8


@pytest.mark.parametrize("p", [3, 5, 7, 11, 13])
def test_factor_mod_p_matches_pari(p):
    rng = random.Random(p)
    for _ in range(10):
        coeffs = [rng.randint(-20, 20) for _ in range(6)] + [1]
        f = Poly(coeffs)
        fac = pari.factormod(pari.Pol(list(reversed(coeffs))), p)
        degrees = sorted((int(pari.poldegree(g)), int(e)) for g, e in zip(fac[0], fac[1]))
        assert sorted((g.degree, m) for g, m in factor_mod_p(f, p)) == degrees
        assert roots_mod_p(f, p) == [x for x in range(p) if Fraction(f(x)) % p == 0]


@pytest.mark.parametrize("p", [3, 5, 7, 13, 83])
def test_sqrt_mod_lifts(p):
    for a in range(1, p):
        r = sqrt_mod(a, p, 4)
        if legendre(a, p) == 1:
            assert (int(r) ** 2 - a) % p**4 == 0
        else:
            assert r is None


def test_padic_square_classes():
    assert is_padic_square(-7, 2)
    assert not is_padic_square(-7, 3)
    assert is_padic_square(-7, 739)
    assert not is_padic_square(-7, 7)
    assert is_padic_square(Fraction(49, 4), 5)
    assert valuation(Fraction(7**3, 5), 7) == 3
    assert unit_part(Fraction(7**3 * 2, 5), 7) == Fraction(2, 5)


def test_form_vector_round_trip():
    rng = random.Random(1)
    vec = [rng.randint(-5, 5) for _ in range(21)]
    f = Form.from_vector(vec, 2, 6)
    assert f.to_vector() == vec
    g = Form.from_matrix(f.matrix())
    assert g.to_vector() == vec
    for pt in product(range(2), repeat=6):
        assert f.eval_mod(pt, 101) == int(f(pt)) % 101
