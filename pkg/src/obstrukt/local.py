"""Local invariants of the quaternion algebra (c, F/G) on V and the certificate.

inv_v of (c, F/G) at a point P is the Hilbert symbol [c, F(P)/G(P)]_v, and
since G is the square of a quadric it equals [c, F(P)]_v whenever G(P) != 0.
Symbols take values in {0, 1/2} (additive notation).
"""

from __future__ import annotations

import logging
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from typing import Iterable, Sequence

import mpmath
from cypari import pari
from mpmath import mp

from .arith import Form, format_rat, is_padic_square, legendre, prime_factors, unit_part, valuation
from .cells import analyse_cells
from .surface import (
    FiberReport,
    ProjPoint,
    QuadricModel,
    enumerate_fiber,
    explore_lift_tree,
    lift_smooth_point,
)

log = logging.getLogger(__name__)

INF = "inf"
HALF = Fraction(1, 2)
ZERO = Fraction(0)
# largest prime whose fibre we are prepared to enumerate point by point
ENUMERATION_LIMIT = 2000


# --- Hilbert symbols ------------------------------------------------------------


def place(v) -> str | int:
    """Normalise a place: a prime as int, the real place as "inf"."""
    if isinstance(v, str) and v.strip().lower() in ("inf", "oo", "infinity", "∞", "r"):
        return INF
    p = int(v)
    if p < 2 or not pari.isprime(p):
        raise ValueError(f"{v!r} is not a place of Q")
    return p


def _unit_residue(u: Fraction, mod: int) -> int:
    return u.numerator * pow(u.denominator, -1, mod) % mod


def hilbert_parts(alpha: int, u: int, beta: int, w: int, p: int) -> Fraction:
    """[p^alpha u, p^beta w]_p from valuations and unit residues.

    u and w are taken modulo p for odd p and modulo 8 for p = 2.
    """
    if p == 2:
        u, w = u % 8, w % 8
        if u % 2 == 0 or w % 2 == 0:
            raise ValueError("unit residues must be odd")
        eps = lambda x: ((x - 1) // 2) % 2  # noqa: E731
        omega = lambda x: ((x * x - 1) // 8) % 2  # noqa: E731
        e = (eps(u) * eps(w) + alpha * omega(w) + beta * omega(u)) % 2
        return HALF if e else ZERO
    lu, lw = legendre(u, p), legendre(w, p)
    if lu == 0 or lw == 0:
        raise ValueError("unit residues must be prime to p")
    s = (-1) ** (alpha * beta * ((p - 1) // 2)) * lu**beta * lw**alpha
    return HALF if s < 0 else ZERO


def hilbert_symbol(a, b, v) -> Fraction:
    """[a, b]_v in {0, 1/2}: 1/2 exactly when x^2 - a y^2 - b z^2 has no nonzero zero over Q_v."""
    a, b = Fraction(a), Fraction(b)
    if a == 0 or b == 0:
        raise ValueError("Hilbert symbol needs nonzero arguments")
    v = place(v)
    if v == INF:
        return HALF if a < 0 and b < 0 else ZERO
    mod = 8 if v == 2 else v
    alpha, beta = valuation(a, v), valuation(b, v)
    return hilbert_parts(alpha, _unit_residue(unit_part(a, v), mod), beta, _unit_residue(unit_part(b, v), mod), v)


def relevant_places(a, b) -> list:
    """Places where [a, b]_v can be nonzero: 2, infinity and primes dividing a or b."""
    ps = {2}
    for x in (a, b):
        ps.update(prime_factors(x))
    return sorted(ps) + [INF]


def symbol_sum(a, b) -> Fraction:
    """Sum of [a, b]_v over all places, reduced mod 1 (0 by the product formula)."""
    return sum((hilbert_symbol(a, b, v) for v in relevant_places(a, b)), ZERO) % 1


# --- profiles and certificates --------------------------------------------------------------


def _fmt(x: Fraction) -> str:
    return format_rat(Fraction(x))


@dataclass
class InvariantProfile:
    """Achievable invariants at one place, with the evidence behind them.

    status is one of proved-constant, sampled, incomplete or vacuous.
    """

    place: str
    values: frozenset
    status: str
    evidence: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    @property
    def singleton(self) -> bool:
        return len(self.values) == 1

    @property
    def value(self) -> Fraction:
        if not self.singleton:
            raise ValueError(f"place {self.place} has {len(self.values)} achievable invariants")
        return next(iter(self.values))

    def to_json(self) -> dict:
        return {
            "place": str(self.place),
            "set": [_fmt(x) for x in sorted(self.values)],
            "status": self.status,
            "evidence": self.evidence,
            "notes": self.notes,
        }

    @classmethod
    def from_json(cls, doc: dict) -> "InvariantProfile":
        return cls(
            str(doc["place"]),
            frozenset(Fraction(x) for x in doc["set"]),
            doc["status"],
            list(doc.get("evidence", [])),
            list(doc.get("notes", [])),
        )


@dataclass
class CandidateReport:
    """Primes that can carry a nonzero invariant outside the bad set."""

    norms: list
    support: list[int]
    bad: list[int]
    analysed: list[int]
    skipped: list[int]

    def to_json(self) -> dict:
        return {
            "slice_norm_numerators": [str(n) for _, n in self.norms],
            "slices": [v for v, _ in self.norms],
            "common_support": self.support,
            "bad_primes": self.bad,
            "analysed": self.analysed,
            "skipped_c_square": self.skipped,
        }

    @property
    def new(self) -> list[int]:
        """Analysed primes that are not bad primes."""
        return [p for p in self.analysed if p not in self.bad]


def candidate_primes(
    model: QuadricModel,
    F: Form,
    c,
    bad: Iterable[int] = (),
    count: int = 3,
    seed: int = 0,
) -> CandidateReport:
    """Primes dividing N(F(P)) for slice points P of every slice, plus bad primes.

    The intersection of prime supports over slices is taken as the support of
    the gcd of the numerators; denominators come from the t0 = 1
    normalisation of each slice and are discarded.  Primes where c is a
    local square carry invariant 0 and are dropped.
    """
    from .slices import slice_norms

    norms = slice_norms(model, F, count, seed)
    g = 0
    for _, n in norms:
        g = gcd(g, abs(n.numerator))
    support = [] if g in (0, 1) else sorted(int(q) for q in pari.factor(g)[0])
    bad = sorted(set(int(p) for p in bad))
    every = sorted(set(support) | set(bad))
    analysed = [p for p in every if not is_padic_square(c, p)]
    skipped = [p for p in every if is_padic_square(c, p)]
    log.info("slice support %s, analysed %s", support, analysed)
    return CandidateReport([(v, n.numerator) for v, n in norms], support, bad, analysed, skipped)


# --- evaluation at lifted points ------------------------------------------------------------


def _need(p: int) -> int:
    # digits of the unit needed to read a symbol: mod p, or mod 8 at 2
    return 3 if p == 2 else 1


def read_symbol(c, value: int, precision: int, p: int):
    """Symbol [c, F(P)]_p from F(P) known modulo p^precision, or None if undecided.

    F(P + p^N y) = F(P) mod p^N, so the valuation v is exact once v < N and
    the unit is known modulo p^(N - v).
    """
    mod = p**precision
    value %= mod
    if value == 0:
        return None, None, None
    v = valuation(value, p)
    if v + _need(p) > precision:
        return None, v, None
    unit = (value // p**v) % (8 if p == 2 else p)
    c = Fraction(c)
    alpha = valuation(c, p)
    cu = _unit_residue(unit_part(c, p), 8 if p == 2 else p)
    return hilbert_parts(alpha, cu, v, unit, p), v, unit


def _point_entry(P: ProjPoint, value: int, v, unit, inv, how: str) -> dict:
    return {
        "point": list(P.coords),
        "precision": P.k,
        "F_mod": str(value % P.p**P.k),
        "valuation": v,
        "unit": unit,
        "inv": None if inv is None else _fmt(inv),
        "rule": how,
    }


def evaluate_smooth(model: QuadricModel, F: Form, c, P: Sequence[int], p: int, precision: int = 12, max_precision: int = 96):
    """Symbol at one Hensel lift of a smooth F_p-point (Bright's rule: constant above it).

    When F vanishes to the working precision on the canonical lift, other
    lifts through the p^2 classes above the point are tried.
    """
    base = ProjPoint(tuple(P), p)
    starts = [base]
    tried = 0
    N = precision
    while N <= max_precision:
        for start in starts:
            lift = lift_smooth_point(model, start, N)
            value = F.eval_mod(list(lift.coords), p**N)
            inv, v, unit = read_symbol(c, value, N, p)
            tried += 1
            if inv is not None:
                return inv, _point_entry(lift, value, v, unit, inv, "bright-smooth-lift")
        if len(starts) == 1:
            tree = explore_lift_tree(model, base, 2)
            starts = [ProjPoint(x, p, 2) for x in tree.survivors[:8]]
        N *= 2
    return None, {"point": list(base.coords), "rule": "bright-smooth-lift", "undecided_after": tried}


def find_point(model: QuadricModel, p: int, seed: int = 0) -> tuple[int, ...]:
    """A smooth F_p-point: enumeration for small p, slice eigenvectors otherwise."""
    if p <= 50:
        rep = enumerate_fiber(model, p)
        if not rep.smooth:
            raise LookupError(f"no smooth F_{p}-point")
        return rep.smooth[0]
    from .slices import point_mod_p

    return point_mod_p(model, p, seed=seed)


def invariant_profile(
    model: QuadricModel,
    c,
    F: Form,
    p: int,
    bad: bool = False,
    lift_depth: int = 12,
    seed: int = 0,
    fiber: FiberReport | None = None,
    cell_depth: int = 10,
) -> InvariantProfile:
    """Achievable set of [c, F(P)]_p over P in V(Q_p).

    Decision tree: c a square in Q_p gives {0}; at a good prime the
    invariant is constant, so one smooth point decides it; at a bad prime
    every smooth F_p-point is lifted once and the normalized points above
    each singular F_p-point are split into cells on which F has constant
    valuation and leading residue.
    """
    c = Fraction(c)
    name = str(p)
    if is_padic_square(c, p):
        return InvariantProfile(name, frozenset({ZERO}), "proved-constant", [{"rule": "c-square", "c": _fmt(c)}])
    if not bad:
        P = find_point(model, p, seed)
        inv, entry = evaluate_smooth(model, F, c, P, p, lift_depth)
        if inv is None:
            return InvariantProfile(name, frozenset({ZERO, HALF}), "incomplete", [entry], ["F undecided at the lift"])
        entry["rule"] = "good-reduction-constant"
        return InvariantProfile(name, frozenset({inv}), "proved-constant", [entry])
    if p > ENUMERATION_LIMIT:
        return InvariantProfile(name, frozenset({ZERO, HALF}), "incomplete", [], [f"fibre at {p} too large to enumerate"])
    if p == 2:
        return InvariantProfile(name, frozenset({ZERO, HALF}), "incomplete", [], ["cell analysis reads units mod 2 only"])
    fiber = fiber or enumerate_fiber(model, p)
    values: set[Fraction] = set()
    evidence: list = []
    notes: list = []
    complete = True
    for P in fiber.smooth:
        inv, entry = evaluate_smooth(model, F, c, P, p, lift_depth)
        evidence.append(entry)
        if inv is None:
            complete = False
        else:
            values.add(inv)
    for P in fiber.singular:
        base = ProjPoint(tuple(P), p)
        tree = explore_lift_tree(model, base, 2)
        if tree.dead:
            evidence.append({"point": list(P), "rule": "singular-no-lift", "depth": 2, "sizes": tree.sizes})
            continue
        rep = analyse_cells(model, F, base, max_depth=cell_depth)
        entry = {"point": list(P), "rule": "singular-cells", "cells": rep.to_json(), "inv": []}
        alpha = valuation(c, p)
        cu = _unit_residue(unit_part(c, p), p)
        for v, u in sorted(rep.leaves):
            inv = hilbert_parts(alpha, cu, v, u, p)
            values.add(inv)
            entry["inv"].append([v, u, _fmt(inv)])
        if not rep.complete:
            complete = False
            notes.append(f"{rep.unresolved} unresolved cells above {tuple(P)}")
        evidence.append(entry)
    if not complete:
        values |= {ZERO, HALF}
        return InvariantProfile(name, frozenset(values), "incomplete", evidence, notes)
    if not values:
        return InvariantProfile(name, frozenset({ZERO}), "vacuous", evidence, ["no Q_p-points found"])
    return InvariantProfile(name, frozenset(values), "proved-constant", evidence, notes)


# --- the real place ------------------------------------------------------------------


def real_points(model: QuadricModel, count: int = 8, seed: int = 0, dps: int = 40, tries: int = 200) -> list[list]:
    """Real points of V by Gauss-Newton from random real starts."""
    rng = random.Random(seed)
    forms = model.forms
    grads = [q.gradient() for q in forms]
    out = []
    with mp.workdps(dps):
        tol = mp.mpf(10) ** (-(dps - 8))
        for _ in range(tries):
            if len(out) >= count:
                break
            x = mpmath.matrix([mp.mpf(rng.uniform(-1, 1)) for _ in range(model.nvars)])
            for _ in range(100):
                xs = list(x)
                val = mpmath.matrix([q(xs) for q in forms])
                if mpmath.norm(val) < tol:
                    break
                J = mpmath.matrix([[g(xs) for g in gr] for gr in grads])
                try:
                    step = J.T * mpmath.lu_solve(J * J.T, val)
                except ZeroDivisionError:
                    break
                x = x - step
                x = x / mpmath.norm(x)
            xs = list(x)
            if max(abs(q(xs)) for q in forms) < mp.mpf(10) ** (-(dps // 2)):
                out.append(xs)
    return out


def _signed_relative(F: Form, pt) -> float:
    val, size = mp.mpf(0), mp.mpf(0)
    for e, coef in F.terms.items():
        t = mp.mpf(int(coef))
        for x, m in zip(pt, e):
            if m:
                t = t * x**m
        val += t
        size += abs(t)
    return float(val / size)


def real_invariant(
    model: QuadricModel,
    c,
    F: Form,
    positivity: dict | None = None,
    samples: int = 8,
    seed: int = 0,
) -> InvariantProfile:
    """inv_oo of (c, F/G): sign of F on V(R) when c < 0.

    Sampling gives the signs found at real points.  A positivity
    certificate (F a positive multiple of N1 conj(N1) on V(R)) makes F >= 0
    everywhere, so the locally constant invariant is 0 on the dense set
    F > 0 and hence everywhere.
    """
    c = Fraction(c)
    if c > 0:
        return InvariantProfile(INF, frozenset({ZERO}), "proved-constant", [{"rule": "c-positive"}])
    pts = real_points(model, samples, seed)
    if not pts:
        return InvariantProfile(INF, frozenset({ZERO}), "vacuous", [], ["no real point found"])
    evidence = []
    signs = set()
    for pt in pts:
        with mp.workdps(40):
            r = _signed_relative(F, pt)
        if abs(r) < 1e-25:
            evidence.append({"rule": "real-sample", "point": [mpmath.nstr(x, 12) for x in pt], "relative_F": r, "sign": 0})
            continue
        signs.add(1 if r > 0 else -1)
        evidence.append({"rule": "real-sample", "point": [mpmath.nstr(x, 12) for x in pt], "relative_F": r, "sign": 1 if r > 0 else -1})
    values = frozenset(HALF if s < 0 else ZERO for s in signs) or frozenset({ZERO, HALF})
    if positivity is not None:
        evidence.append({"rule": "norm-form-positivity", **positivity})
        if positivity.get("certified") and values == {ZERO}:
            return InvariantProfile(INF, values, "proved-constant", evidence)
    return InvariantProfile(INF, values, "sampled", evidence)


# --- certificate ----------------------------------------------------------------------------


CONCLUSION = "Sh(Q, Jac C)[2] ≠ 0 witnessed"


@dataclass
class ObstructionCertificate:
    model: dict
    algebra: dict
    profiles: list[InvariantProfile]
    total: Fraction | None
    verdict: str
    reasons: list = field(default_factory=list)
    display_check: dict | None = None
    extra: dict = field(default_factory=dict)

    @property
    def conclusion(self) -> str | None:
        return CONCLUSION if self.verdict == "obstructed" else None

    def to_json(self) -> dict:
        doc = {
            "model": self.model,
            "algebra": self.algebra,
            "profiles": [p.to_json() for p in self.profiles],
            "sum": None if self.total is None else _fmt(self.total),
            "verdict": self.verdict,
            "reasons": self.reasons,
        }
        if self.conclusion:
            doc["conclusion"] = self.conclusion
        if self.display_check is not None:
            doc["display_check"] = self.display_check
        doc.update(self.extra)
        return doc


def certify(
    model_doc: dict,
    algebra_doc: dict,
    profiles: Sequence[InvariantProfile],
    displayed_places: Iterable[str] | None = None,
    rational_point: Sequence | None = None,
    extra: dict | None = None,
) -> ObstructionCertificate:
    """Fold the per-place profiles into a verdict.

    obstructed: every profile a proved singleton and the total is 1/2.
    not-obstructed: every profile a singleton with total 0, or a rational point.
    inconclusive otherwise, naming the offending places.  When the places
    of a reference display are given, the certificate records whether the
    invariants outside them cancel.
    """
    profiles = list(profiles)
    extra = dict(extra or {})
    if rational_point is not None:
        return ObstructionCertificate(
            model_doc, algebra_doc, profiles, None, "not-obstructed", ["rational point supplied"], None, extra
        )
    reasons = []
    for pr in profiles:
        if not pr.singleton:
            reasons.append(f"place {pr.place}: achievable set {[_fmt(x) for x in sorted(pr.values)]}")
        elif pr.status in ("incomplete", "sampled"):
            reasons.append(f"place {pr.place}: status {pr.status}")
    total = None
    if all(pr.singleton for pr in profiles):
        total = sum((pr.value for pr in profiles), ZERO) % 1
    if reasons:
        verdict = "inconclusive"
    else:
        verdict = "obstructed" if total == HALF else "not-obstructed"
    check = None
    if displayed_places is not None and total is not None:
        shown = {str(x) for x in displayed_places}
        shown_sum = sum((pr.value for pr in profiles if pr.place in shown), ZERO) % 1
        hidden = [pr.place for pr in profiles if pr.place not in shown and pr.value != 0]
        check = {
            "displayed_places": sorted(shown),
            "displayed_sum": _fmt(shown_sum),
            "total": _fmt(total),
            "nonzero_places_outside_display": hidden,
            "agrees": shown_sum == total,
            "note": (
                f"{len(hidden)} places outside the display carry 1/2 and cancel in pairs"
                if hidden and shown_sum == total
                else ("places outside the display change the total" if hidden else "display complete")
            ),
        }
    return ObstructionCertificate(model_doc, algebra_doc, profiles, total, verdict, reasons, check, extra)


# --- orchestration -----------------------------------------------------------------------------


def _profile_job(args):
    model, c, F, p, bad, lift_depth, seed = args
    return invariant_profile(model, c, F, p, bad=bad, lift_depth=lift_depth, seed=seed)


def all_profiles(
    model: QuadricModel,
    c,
    F: Form,
    candidates: CandidateReport,
    lift_depth: int = 12,
    seed: int = 0,
    threads: int = 1,
    positivity: dict | None = None,
) -> list[InvariantProfile]:
    """Profiles at every analysed prime, the skipped primes and the real place, in a fixed order."""
    jobs = [(model, c, F, p, p in candidates.bad, lift_depth, seed) for p in candidates.analysed]
    if threads > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=threads) as ex:
            found = list(ex.map(_profile_job, jobs))
    else:
        found = [_profile_job(j) for j in jobs]
    skipped = [
        InvariantProfile(str(p), frozenset({ZERO}), "proved-constant", [{"rule": "c-square", "c": _fmt(Fraction(c))}])
        for p in candidates.skipped
    ]
    finite = sorted(found + skipped, key=lambda pr: int(pr.place))
    return finite + [real_invariant(model, c, F, positivity, seed=seed)]


# --- replay ------------------------------------------------------------------------------------


def replay_certificate(doc: dict, model: QuadricModel, F: Form, c) -> list[str]:
    """Independent re-check of the point evidence; returns a list of problems (empty when sound)."""
    problems = []
    for pr in doc["profiles"]:
        if pr["place"] == INF:
            continue
        p = int(pr["place"])
        for e in pr["evidence"]:
            if "F_mod" not in e:
                continue
            N = e["precision"]
            mod = p**N
            if not model.contains(e["point"], mod):
                problems.append(f"{p}: {e['point']} is not on V mod {p}^{N}")
                continue
            value = F.eval_mod(e["point"], mod)
            if str(value) != e["F_mod"]:
                problems.append(f"{p}: F value mismatch at {e['point']}")
                continue
            inv, _, _ = read_symbol(c, value, N, p)
            if inv is None or _fmt(inv) != e["inv"]:
                problems.append(f"{p}: symbol mismatch at {e['point']}")
    return problems


__all__ = [
    "INF",
    "InvariantProfile",
    "CandidateReport",
    "ObstructionCertificate",
    "hilbert_symbol",
    "hilbert_parts",
    "symbol_sum",
    "relevant_places",
    "read_symbol",
    "candidate_primes",
    "evaluate_smooth",
    "find_point",
    "invariant_profile",
    "real_points",
    "real_invariant",
    "certify",
    "all_profiles",
    "replay_certificate",
]
