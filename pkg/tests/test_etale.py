from fractions import Fraction

import pytest
from cypari import pari

from obstrukt import data
from obstrukt.etale import (
    CheckNotRequired,
    Curve,
    NotSplitError,
    component_values,
    ddagger_report,
    delta_scalar_for_hint,
    eligible_twist_primes,
    family_report,
    is_rational_square,
    norm_to_base,
    selmer_local_eligibility,
    square_class_at_rational_roots,
    squarefree_part,
)


def _independently_eligible(p: int) -> bool:
    for g in data.FAMILY_POLYS:
        fac = pari.factormod(pari.Pol(list(reversed(g))), p)
        if any(int(pari.poldegree(h)) != 1 for h in fac[0]) or any(int(e) != 1 for e in fac[1]):
            return False
    return all(int(pari.kronecker(a, p)) == 1 for a in data.FAMILY_RESIDUES)


def test_flagship_polynomial(curve):
    assert [int(c) for c in curve.f.coeffs] == [10, -47, -12, 39, -11, -4, 1]
    assert ddagger_report(curve).verdict == "true (sufficient)"
    assert ddagger_report(Curve(curve.f)).verdict == "undecided"


def test_norm_of_delta_is_a_square(delta, printed_delta):
    assert is_rational_square(norm_to_base(delta))
    # scaling by a rational changes the norm by a sixth power
    assert is_rational_square(norm_to_base(printed_delta))


def test_square_class_exposes_the_printed_scalar(delta, printed_delta):
    value, cls = square_class_at_rational_roots(delta)[Fraction(-1)]
    assert cls == -7
    _, printed_cls = square_class_at_rational_roots(printed_delta)[Fraction(-1)]
    assert printed_cls != -7
    s = delta_scalar_for_hint(printed_delta, -7)
    assert s == Fraction(2965, 2956)
    assert squarefree_part(printed_delta.rep(-1) * s) == -7


def test_squarefree_part():
    assert squarefree_part(Fraction(-20692, 2965)) == squarefree_part(-20692 * 2965)
    assert squarefree_part(72) == 2
    assert squarefree_part(Fraction(1, 9)) == 1


def test_eligible_primes_reverify():
    found = list(eligible_twist_primes(20000))
    assert found == [17383, 18433]
    for p in found:
        assert _independently_eligible(p)
    for p in (3, 7, 17, 739, 17389):
        assert p not in found


def test_smallest_eligible_all_square(delta):
    comps = component_values(delta, 17383)
    assert len(comps) == 6
    assert all(c.verdict == "square" for c in comps)


def test_component_values_needs_splitting(delta):
    with pytest.raises(NotSplitError):
        component_values(delta, 5)
    with pytest.raises(ValueError):
        component_values(delta, 2)


def test_family_report_for_twist(curve, delta):
    twisted = curve.twist(17383)
    reps = {str(r.place): r for r in family_report(twisted, delta)}
    assert set(reps) == {"inf", "2", "7", "739", "17383"}
    assert reps["17383"].overall == "eligible"
    assert reps["inf"].note == "inherited"
    assert reps["7"].overall == "eligible"


def test_untwisted_family_report_inherits(curve, delta):
    assert all(r.note == "inherited" for r in family_report(curve, delta))


def test_check_not_required(curve, delta):
    with pytest.raises(CheckNotRequired):
        selmer_local_eligibility(curve, delta, 5)
