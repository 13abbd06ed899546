"""JSON documents read and written by the command line.

Rationals travel as "num/den" strings; forms as coefficient lists in
lexicographic monomial order.  Every parse error names the offending field.
"""

from __future__ import annotations

import hashlib
import json
from fractions import Fraction
from pathlib import Path
from typing import Any

from .arith import Form, Poly, format_rat, monomials, parse_rat
from .cohomology import AutElement, SubgroupSpec, closure
from .delpezzo import DP4Model
from .etale import Curve, EtaleElement
from .lines import Divisor
from .quaternion import AlgebraDescriptor
from .surface import QuadricModel


class InputError(ValueError):
    """A document that does not match its format; the message names the field."""


def read_json(path: str | Path) -> Any:
    text = Path(path).read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None


def dumps(doc: Any) -> str:
    return json.dumps(doc, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def write_json(path: str | Path, doc: Any) -> str:
    """Write canonically (sorted keys) and return the sha256 of the bytes."""
    data = dumps(doc).encode()
    Path(path).write_bytes(data)
    return hashlib.sha256(data).hexdigest()


def sha256_file(path: str | Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _rat_list(doc: dict, key: str, length: int | None = None) -> list[Fraction]:
    if key not in doc:
        raise InputError(f"missing field '{key}'")
    vals = doc[key]
    if not isinstance(vals, list):
        raise InputError(f"{key}: expected a list")
    if length is not None and len(vals) != length:
        raise InputError(f"{key}: expected {length} entries, got {len(vals)}")
    try:
        return [parse_rat(v, f"{key}[{i}]") for i, v in enumerate(vals)]
    except ValueError as exc:
        raise InputError(str(exc)) from None


def _int_rows(doc: dict, key: str, rows: int, width: int) -> list[list[int]]:
    if key not in doc:
        raise InputError(f"missing field '{key}'")
    vals = doc[key]
    if not isinstance(vals, list) or len(vals) != rows:
        raise InputError(f"{key}: expected {rows} lists")
    out = []
    for i, row in enumerate(vals):
        if not isinstance(row, list) or len(row) != width:
            raise InputError(f"{key}[{i}]: expected {width} integers")
        for j, x in enumerate(row):
            if isinstance(x, bool) or not isinstance(x, int):
                raise InputError(f"{key}[{i}][{j}]: expected an integer, got {x!r}")
        out.append([int(x) for x in row])
    return out


# --- curve and delta ---------------------------------------------------------------


def curve_from_json(doc: dict) -> tuple[Curve, EtaleElement | None]:
    """Curve (with factors and twist n) and delta, if present."""
    if not isinstance(doc, dict):
        raise InputError("curve document must be a JSON object")
    f = _rat_list(doc, "f", 7)
    factors = None
    if "factors" in doc:
        if not isinstance(doc["factors"], list):
            raise InputError("factors: expected a list of coefficient lists")
        factors = tuple(Poly(_rat_list({"factors": fac}, "factors")) for fac in doc["factors"])
    n = 1
    if "n" in doc:
        try:
            n = int(str(doc["n"]))
        except ValueError:
            raise InputError(f"n: expected a positive integer string, got {doc['n']!r}") from None
        if n < 1:
            raise InputError("n: must be positive")
    try:
        curve = Curve(Poly(f), factors, n)
    except ValueError as exc:
        raise InputError(f"f: {exc}") from None
    delta = None
    if "delta" in doc:
        try:
            delta = EtaleElement.from_coeffs(_rat_list(doc, "delta", 6), curve)
        except ValueError as exc:
            raise InputError(f"delta: {exc}") from None
    return curve, delta


def curve_to_json(curve: Curve, delta: EtaleElement | None = None) -> dict:
    doc: dict = {"f": [format_rat(curve.f[i]) for i in range(7)]}
    if curve.factors:
        doc["factors"] = [[format_rat(c) for c in g.coeffs] for g in curve.factors]
    if delta is not None:
        doc["delta"] = [format_rat(delta.rep[i]) for i in range(6)]
    if curve.n != 1:
        doc["n"] = str(curve.n)
    return doc


# --- quadric models ------------------------------------------------------------------


def model_from_json(doc: dict) -> QuadricModel:
    rows = _int_rows(doc, "quadrics", 3, len(monomials(2, 6)))
    try:
        return QuadricModel.from_vectors(rows, doc.get("provenance", "user-supplied"))
    except ValueError as exc:
        raise InputError(f"quadrics: {exc}") from None


def model_to_json(model: QuadricModel) -> dict:
    return {"quadrics": model.vectors(), "provenance": model.provenance}


def dp4_from_json(doc: dict) -> DP4Model:
    rows = _int_rows(doc, "quadrics", 2, len(monomials(2, 5)))
    try:
        return DP4Model.from_vectors(rows, doc.get("provenance", "user-supplied"))
    except ValueError as exc:
        raise InputError(f"quadrics: {exc}") from None


def dp4_to_json(model: DP4Model) -> dict:
    return {"quadrics": model.vectors(), "provenance": model.provenance}


# --- algebra, subgroups, divisors -------------------------------------------------------


def algebra_from_json(doc: dict) -> AlgebraDescriptor:
    try:
        return AlgebraDescriptor.from_json(doc)
    except (ValueError, TypeError) as exc:
        raise InputError(f"algebra: {exc}") from None


def subgroup_from_json(doc, name: str = "") -> SubgroupSpec:
    gens = doc.get("generators", doc) if isinstance(doc, dict) else doc
    if not isinstance(gens, list):
        raise InputError("subgroup: expected a list of generators")
    try:
        return closure([AutElement.from_json(g) for g in gens], name)
    except (ValueError, TypeError, AttributeError) as exc:
        raise InputError(f"subgroup: {exc}") from None


def subgroup_to_json(H: SubgroupSpec) -> dict:
    return {"name": H.name, "order": H.order, "generators": H.to_json()}


def divisor_from_json(doc: dict) -> Divisor:
    try:
        return Divisor.from_json(doc)
    except (ValueError, TypeError) as exc:
        raise InputError(f"divisor: {exc}") from None


def form_from_vector(vec, degree: int, nvars: int = 6) -> Form:
    return Form.from_vector([int(x) for x in vec], degree, nvars)


def parse_hints(text: str | None) -> list[int] | None:
    """"2,3,7" -> [2, 3, 7]."""
    if text is None or text == "":
        return None
    try:
        return sorted({int(x) for x in str(text).replace(" ", "").split(",") if x})
    except ValueError:
        raise InputError(f"--hints: expected comma-separated primes, got {text!r}") from None


__all__ = [
    "InputError",
    "read_json",
    "write_json",
    "dumps",
    "sha256_file",
    "curve_from_json",
    "curve_to_json",
    "model_from_json",
    "model_to_json",
    "dp4_from_json",
    "dp4_to_json",
    "algebra_from_json",
    "subgroup_from_json",
    "subgroup_to_json",
    "divisor_from_json",
    "parse_hints",
]
