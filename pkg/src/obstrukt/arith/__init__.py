"""Exact and modular arithmetic used throughout the package."""

from fractions import Fraction as Rat

from .ball import Ball, poly_root_balls, rational_reconstruct
from .forms import Form, monomial_index, monomials
from .intmat import (
    IntMatrix,
    echelon_rows,
    elementary_divisors,
    integer_kernel,
    smith_normal_form,
    solve_integer,
)
from .padic import (
    PadicInt,
    hensel_root,
    is_padic_square,
    is_square_2adic,
    legendre,
    sqrt_mod,
    unit_part,
    valuation,
)
from .primes import is_prime, prime_factors, primes_up_to
from .poly import NEG_INF, Poly, discriminant, factor_mod_p, reduce_mod, resultant, roots_mod_p, splits_completely


def parse_rat(text, field: str = "value") -> Rat:
    """Parse "num/den" (or an integer) strictly, naming the field on failure."""
    if isinstance(text, int):
        return Rat(text)
    if not isinstance(text, str):
        raise ValueError(f"{field}: expected a rational string, got {type(text).__name__}")
    try:
        return Rat(text.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"{field}: malformed rational {text!r} ({exc})") from None


def format_rat(q) -> str:
    q = Rat(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


__all__ = [
    "Rat",
    "Ball",
    "poly_root_balls",
    "rational_reconstruct",
    "Form",
    "monomials",
    "monomial_index",
    "IntMatrix",
    "echelon_rows",
    "elementary_divisors",
    "integer_kernel",
    "smith_normal_form",
    "solve_integer",
    "PadicInt",
    "hensel_root",
    "is_padic_square",
    "is_square_2adic",
    "legendre",
    "sqrt_mod",
    "unit_part",
    "valuation",
    "NEG_INF",
    "Poly",
    "discriminant",
    "factor_mod_p",
    "reduce_mod",
    "resultant",
    "roots_mod_p",
    "splits_completely",
    "is_prime",
    "prime_factors",
    "primes_up_to",
    "parse_rat",
    "format_rat",
]
