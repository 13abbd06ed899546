import random
from fractions import Fraction

import numpy as np
import pytest

from obstrukt.arith import unit_part, valuation
from obstrukt.local import (
    CONCLUSION,
    HALF,
    INF,
    ZERO,
    InvariantProfile,
    certify,
    hilbert_symbol,
    place,
    read_symbol,
    relevant_places,
    symbol_sum,
)

PRIMES = (2, 3, 5, 7, 11, 13)


def _normalise(a: int, p: int) -> int:
    """Strip even powers of p: the square class is unchanged and v_p(a) becomes 0 or 1."""
    v = valuation(a, p)
    return int(Fraction(a) / p ** (2 * (v // 2)))


def _soluble(a: int, b: int, p: int) -> bool:
    """Naive test for a nonzero Q_p-zero of x^2 - a y^2 - b z^2.

    With valuations in {0, 1} a primitive zero has y or z a unit, so after
    scaling it is enough to try y = 1 with z free, and z = 1 with y in pZ_p.
    Such a zero modulo p^k lifts once k = 3 (odd p) or k = 5 (p = 2).
    """
    a, b = _normalise(a, p), _normalise(b, p)
    k = 5 if p == 2 else 3
    m = p**k
    r = np.arange(m, dtype=np.int64)
    squares = np.zeros(m, dtype=bool)
    squares[(r * r) % m] = True
    rhs1 = (a + b * r * r) % m
    yp = r[r % p == 0]
    rhs2 = (a * yp * yp + b) % m
    return bool(squares[rhs1].any() or squares[rhs2].any())


def test_product_formula_random_pairs():
    rng = random.Random(7)
    for _ in range(1000):
        a = rng.choice([-1, 1]) * rng.randint(1, 10**6)
        b = rng.choice([-1, 1]) * rng.randint(1, 10**6)
        if rng.random() < 0.3:
            a = Fraction(a, rng.randint(1, 1000))
        assert symbol_sum(a, b) == 0


@pytest.mark.parametrize("p", PRIMES)
def test_symbol_matches_brute_force(p):
    for a in range(-20, 21):
        for b in range(-20, 21):
            if a == 0 or b == 0:
                continue
            expected = ZERO if _soluble(a, b, p) else HALF
            assert hilbert_symbol(a, b, p) == expected, (a, b, p)


def test_symbol_at_infinity():
    assert hilbert_symbol(-1, -1, INF) == HALF
    assert hilbert_symbol(-1, 3, "inf") == ZERO
    assert hilbert_symbol(-7, -5, "oo") == HALF


def test_symbol_identities():
    rng = random.Random(3)
    for _ in range(200):
        a, b = rng.randint(1, 500) * rng.choice([-1, 1]), rng.randint(1, 500) * rng.choice([-1, 1])
        for v in relevant_places(a, b):
            assert hilbert_symbol(a, b, v) == hilbert_symbol(b, a, v)
            assert hilbert_symbol(a, -a, v) == 0
            assert hilbert_symbol(a, b * 9, v) == hilbert_symbol(a, b, v)


def test_place_rejects_composites():
    assert place("83") == 83
    assert place("∞") == INF
    with pytest.raises(ValueError):
        place(15)


@pytest.mark.parametrize(
    "value,p,inv",
    [
        (7**5 * 2, 7, ZERO),
        (3**5 * 2, 3, HALF),
        (5, 5, HALF),
    ],
)
def test_read_symbol(value, p, inv):
    got, v, unit = read_symbol(-7, value, 12, p)
    assert got == inv
    assert v == valuation(value, p)
    assert unit % p == unit_part(Fraction(value), p) % p


def _profile(place, values, status="proved-constant"):
    return InvariantProfile(str(place), frozenset(Fraction(x) for x in values), status, [], [])


def test_certify_obstructed_with_cancelling_pairs():
    profiles = [_profile(3, ["1/2"]), _profile(5, ["1/2"]), _profile(7, [0]), _profile(61, ["1/2"]), _profile("inf", [0])]
    cert = certify({}, {}, profiles, displayed_places=("3", "7", "inf"))
    assert cert.verdict == "obstructed"
    assert cert.total == HALF
    doc = cert.to_json()
    assert doc["conclusion"] == CONCLUSION
    assert doc["display_check"]["agrees"]
    assert doc["display_check"]["nonzero_places_outside_display"] == ["5", "61"]


def test_certify_inconclusive_names_place():
    cert = certify({}, {}, [_profile(3, ["1/2"]), _profile(83, [0, "1/2"])])
    assert cert.verdict == "inconclusive"
    assert any("83" in r for r in cert.reasons)
    cert = certify({}, {}, [_profile(3, ["1/2"]), _profile(2, [0], status="incomplete")])
    assert cert.verdict == "inconclusive"


def test_certify_not_obstructed():
    assert certify({}, {}, [_profile(3, ["1/2"]), _profile(5, ["1/2"])]).verdict == "not-obstructed"
    assert certify({}, {}, [], rational_point=[1, 0, 0, 0, 0, 0]).verdict == "not-obstructed"


def test_profile_json_round_trip():
    pr = _profile(83, [0])
    assert InvariantProfile.from_json(pr.to_json()) == pr
