"""Flagship inputs: the curve, its Selmer representative and the printed model."""

from fractions import Fraction

# f = (x^2 - 5x + 1)(x^3 - 7x + 10)(x + 1), coefficients ascending
FLAGSHIP_FACTORS = (
    (1, -5, 1),
    (10, -7, 0, 1),
    (1, 1),
)

# delta as printed: -7/2965 * (377x^5 - 706x^4 - 5200x^3 + 2061x^2 - 9086x - 12308)
_P = (-12308, -9086, 2061, -5200, -706, 377)
FLAGSHIP_DELTA_PRINTED = tuple(Fraction(-7, 2965) * c for c in _P)
# the scalar consistent with delta(-1) = -7 and delta(r1) a square in Q(r1)
FLAGSHIP_DELTA = tuple(Fraction(-7, 2956) * c for c in _P)
FLAGSHIP_C = Fraction(-7)

# the three printed quadrics, lexicographic monomial order a0^2, a0a1, ..., a5^2
FLAGSHIP_QUADRICS = (
    (-377, -1604, -4310, -9600, -14130, -24100, -2155, -9600, -14130, -24100, 3002,
     -7065, -24100, 3002, -3752, 1501, -3752, 380254, 190127, 505356, 2697585),
    (353, 1053, 3820, 12135, 16210, 49701, 1910, 12135, 16210, 49701, -7880,
     8105, 49701, -7880, 197631, -3940, 197631, -507830, -253915, 1686873, -2233480),
    (1300, 6321, 17920, 34505, 63708, 62335, 8960, 34505, 63708, 62335, 90560,
     31854, 62335, 90560, -243597, 45280, -243597, -202262, -101131, -3623209, -1919025),
)

FLAGSHIP_BAD_PRIMES = (2, 3, 7, 83, 739)

# twist family: primes splitting completely in the splitting field of these
# polynomials, with 2 and -739 quadratic residues
FAMILY_POLYS = (
    (49, -35, 1),
    (250047, 0, 7938, 0, -126, 0, 1),
)
FAMILY_RESIDUES = (2, -739)
FAMILY_REQUIRED_PLACES = ("inf", 2, 7, 739)


def flagship_curve_json(printed: bool = True) -> dict:
    """Curve/delta input document for the flagship, optionally with the printed delta."""
    from .arith import Poly, format_rat

    f = Poly([1])
    for fac in FLAGSHIP_FACTORS:
        f = f * Poly(fac)
    delta = FLAGSHIP_DELTA_PRINTED if printed else FLAGSHIP_DELTA
    return {
        "f": [format_rat(c) for c in f.coeffs],
        "factors": [[format_rat(c) for c in fac] for fac in FLAGSHIP_FACTORS],
        "delta": [format_rat(c) for c in delta],
        "c": format_rat(FLAGSHIP_C),
    }


def flagship_model_json() -> dict:
    doc = flagship_curve_json(printed=True)
    doc["quadrics"] = [list(q) for q in FLAGSHIP_QUADRICS]
    doc["hints"] = list(FLAGSHIP_BAD_PRIMES)
    return doc
