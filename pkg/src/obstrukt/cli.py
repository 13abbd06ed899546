"""obstrukt command line: build, lattice, cohomology, algebra, invariants, certify, family, dp4.

Each stage writes <out>/<stage>.json tagged with a key derived from its
inputs, so a later run with the same inputs reuses it.  Every run writes
<out>/manifest.<subcommand>.json, also on failure.

certify exits 0 (obstructed), 2 (not-obstructed) or 3 (inconclusive); any
stage failure exits 1 and names the stage.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import platform
import sys
import time
from dataclasses import asdict, dataclass, field, fields
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable

from . import __version__, data
from .io import (
    InputError,
    curve_from_json,
    curve_to_json,
    dp4_to_json,
    model_from_json,
    model_to_json,
    parse_hints,
    read_json,
    sha256_file,
    subgroup_to_json,
    write_json,
)

log = logging.getLogger("obstrukt")

EXIT = {"obstructed": 0, "not-obstructed": 2, "inconclusive": 3}
STAGE_FAILURE = 1
SUBCOMMANDS = ("build", "lattice", "cohomology", "algebra", "invariants", "certify", "family", "dp4")
FLAGSHIP_DISPLAY = ("3", "7", "83", "inf")


class StageError(RuntimeError):
    def __init__(self, stage: str, message: str):
        super().__init__(message)
        self.stage = stage


# --- configuration ----------------------------------------------------------------


@dataclass
class RunConfig:
    input: str | None = None
    model: str | None = None
    out: str = "obstrukt-out"
    precision: int = 128
    prime_bound: int | None = None
    lift_depth: int = 12
    seed: int = 0
    threads: int = 1
    hints: list[int] | None = None

    def __post_init__(self):
        for name in ("precision", "lift_depth", "threads"):
            if getattr(self, name) < 1:
                raise InputError(f"--{name.replace('_', '-')}: must be positive")
        if self.prime_bound is not None and self.prime_bound < 1:
            raise InputError("--prime-bound: must be positive")
        if self.seed < 0:
            raise InputError("--seed: must be nonnegative")

    @classmethod
    def from_mapping(cls, doc: dict) -> "RunConfig":
        """Strict parse: unknown keys are rejected."""
        names = {f.name for f in fields(cls)}
        unknown = sorted(set(doc) - names)
        if unknown:
            raise InputError(f"config: unknown keys {unknown}")
        doc = dict(doc)
        if isinstance(doc.get("hints"), str):
            doc["hints"] = parse_hints(doc["hints"])
        return cls(**doc)


@dataclass
class RunManifest:
    subcommand: str
    inputs: dict = field(default_factory=dict)
    versions: dict = field(default_factory=dict)
    config: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)
    outputs: dict = field(default_factory=dict)
    stages_reused: list = field(default_factory=list)
    status: str = "running"
    exit_code: int | None = None
    error: str | None = None


def _versions() -> dict:
    import cypari
    import mpmath
    import numpy

    return {
        "obstrukt": __version__,
        "python": platform.python_version(),
        "numpy": numpy.__version__,
        "mpmath": mpmath.__version__,
        "cypari": getattr(cypari, "__version__", "unknown"),
    }


def _setup_logging() -> None:
    level = os.environ.get("OBSTRUKT_LOG", "WARNING").strip().upper()
    if level.isdigit():
        lvl = int(level)
    else:
        lvl = getattr(logging, level, logging.WARNING)
    logging.basicConfig(level=lvl, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)


# --- run context ---------------------------------------------------------------------


def _key(*parts: Any) -> str:
    return hashlib.sha256(json.dumps(parts, sort_keys=True, default=str).encode()).hexdigest()[:16]


class Run:
    """Inputs, stage cache and manifest for one invocation."""

    def __init__(self, cfg: RunConfig, subcommand: str):
        self.cfg = cfg
        self.out = Path(cfg.out)
        self.out.mkdir(parents=True, exist_ok=True)
        self.manifest = RunManifest(subcommand, versions=_versions(), config=asdict(cfg))
        self.input_doc: dict | None = None
        self.model_doc: dict | None = None
        self._loaded = False

    # inputs
    def load(self) -> None:
        if self._loaded:
            return
        self._loaded = True
        for attr, path in (("input_doc", self.cfg.input), ("model_doc", self.cfg.model)):
            if path is None:
                continue
            if not Path(path).exists():
                raise InputError(f"{path}: no such file")
            self.manifest.inputs[str(path)] = sha256_file(path)
            doc = read_json(path)
            if not isinstance(doc, dict):
                raise InputError(f"{path}: expected a JSON object")
            setattr(self, attr, doc)

    # stage cache
    def stage(self, name: str, key: str, compute: Callable[[], dict], filename: str | None = None) -> dict:
        path = self.out / f"{filename or name}.json"
        if path.exists():
            try:
                old = json.loads(path.read_text())
            except json.JSONDecodeError:
                old = None
            if isinstance(old, dict) and old.get("stage_key") == key:
                self.manifest.stages_reused.append(name)
                self.manifest.outputs[str(path)] = sha256_file(path)
                return old
        t = time.perf_counter()
        try:
            doc = compute()
        except StageError:
            raise
        except Exception as exc:  # surfaced as a stage failure
            log.debug("stage %s failed", name, exc_info=True)
            raise StageError(name, f"{type(exc).__name__}: {exc}") from exc
        self.manifest.timings[name] = round(time.perf_counter() - t, 3)
        doc["stage_key"] = key
        self.manifest.outputs[str(path)] = write_json(path, doc)
        return doc

    def write_manifest(self) -> None:
        path = self.out / f"manifest.{self.manifest.subcommand}.json"
        write_json(path, asdict(self.manifest))


# --- stages --------------------------------------------------------------------------


def stage_build(run: Run) -> dict:
    from .etale import delta_scalar_for_hint, ddagger_report, norm_to_base, square_class_at_rational_roots, squarefree_part
    from .surface import build_quadrics

    try:
        run.load()
    except InputError as exc:
        raise StageError("build", str(exc)) from None
    inp, mdoc = run.input_doc or {}, run.model_doc
    if mdoc is None and "quadrics" in inp:
        mdoc = inp
    key = _key("build", run.manifest.inputs)

    def compute() -> dict:
        report: dict = {}
        curve = delta = None
        if "f" in inp:
            curve, delta = curve_from_json(inp)
            report["ddagger"] = ddagger_report(curve).verdict
        hint_c = inp.get("c")
        if delta is not None:
            report["delta_norm"] = str(norm_to_base(delta))
            roots = square_class_at_rational_roots(delta)
            if roots and hint_c is not None:
                from .arith import parse_rat

                c_hint = parse_rat(hint_c, "c")
                r = sorted(roots)[0]
                value, cls = roots[r]
                check = {"root": str(r), "delta_at_root": str(value), "class": cls, "expected_class": squarefree_part(c_hint)}
                if cls != squarefree_part(c_hint):
                    s = delta_scalar_for_hint(delta, c_hint)
                    delta = delta.scale(s)
                    check["mismatch"] = True
                    check["rescaled_by"] = str(s)
                    check["note"] = "delta rescaled by a rational to match the supplied c; the surface is unchanged"
                else:
                    check["mismatch"] = False
                report["delta_check"] = check
        built = build_quadrics(curve, delta) if delta is not None else None
        raw = model_from_json(mdoc) if mdoc is not None else None
        if raw is None and built is None:
            raise InputError("need a raw model ('quadrics') or a curve with 'delta'")
        if raw is not None and built is not None:
            same = raw.same_span(built)
            report["span_check"] = {
                "spans_agree": same,
                "note": "constructed and supplied models span the same forms" if same else "constructed model differs from the supplied quadrics; using the supplied model",
            }
        model = raw if raw is not None else built
        doc = model_to_json(model)
        doc["report"] = report
        if curve is not None:
            doc["curve"] = curve_to_json(curve, delta)
        hints = run.cfg.hints if run.cfg.hints is not None else inp.get("hints", (mdoc or {}).get("hints"))
        if hints is not None:
            doc["hints"] = [int(h) for h in hints]
        point = inp.get("rational_point", (mdoc or {}).get("rational_point"))
        if point is not None:
            pt = [Fraction(str(x)) for x in point]
            if not any(pt) or not model.contains(pt):
                raise InputError("rational_point: not a point of the model")
            doc["rational_point"] = [str(x) for x in pt]
        return doc

    return run.stage("build", key, compute, filename="model")


def _model_and_curve(model_doc: dict):
    from .surface import QuadricModel

    model = QuadricModel.from_vectors(model_doc["quadrics"], model_doc.get("provenance", "user-supplied"))
    curve = delta = None
    if "curve" in model_doc:
        curve, delta = curve_from_json(model_doc["curve"])
    return model, curve, delta


def _is_flagship(model) -> bool:
    from .surface import QuadricModel

    return model.same_span(QuadricModel.from_vectors(data.FLAGSHIP_QUADRICS))


def stage_lattice(run: Run) -> dict:
    def compute() -> dict:
        from .cohomology import all_aut_elements, even_subgroup_order, is_faithful
        from .lines import gram_and_rank

        lat = gram_and_rank()
        els = all_aut_elements()
        return {
            "rank": lat.rank,
            "gram": lat.gram.tolist(),
            "aut_order": len(els),
            "aut_faithful": is_faithful(els),
            "even_subgroup_order": even_subgroup_order(),
        }

    return run.stage("lattice", _key("lattice"), compute)


def stage_cohomology(run: Run, model_doc: dict | None = None) -> dict:
    curve_doc = (model_doc or {}).get("curve")

    def compute() -> dict:
        from .cohomology import coset_divisor_table, distinguished_class, galois_containment, h1_lattice, h12, h48, h96, trivial_group

        groups = {}
        for H in (h96(), h48(), h12(), trivial_group()):
            res = h1_lattice(H)
            groups[H.name] = {
                "order": H.order,
                "H1": res.describe(),
                "invariants": res.invariants,
                "free_rank": res.free_rank,
                "generators": subgroup_to_json(H)["generators"],
            }
        dc = distinguished_class()
        table = coset_divisor_table()
        doc = {
            "groups": groups,
            "distinguished_class": {
                "divisor": dc["divisor"].to_json(),
                "class": dc["class"],
                "fixed_by": dc["fixed"],
                "negated_by": dc["negated"],
            },
            "coset_table": [{"representative": g.to_json(), "divisor": D.to_json()} for g, D in table.items()],
        }
        if curve_doc is not None:
            curve, delta = curve_from_json(curve_doc)
            if delta is not None:
                H = galois_containment(curve, delta)
                doc["galois_containment"] = H if isinstance(H, str) else H.name
        return doc

    return run.stage("cohomology", _key("cohomology", curve_doc), compute)


def stage_algebra(run: Run, model_doc: dict) -> dict:
    key = _key("algebra", model_doc["quadrics"], model_doc.get("curve"), run.cfg.precision)

    def compute() -> dict:
        from .quaternion import build_algebra, real_positivity_certificate, verify_brauer_membership

        model, curve, delta = _model_and_curve(model_doc)
        if curve is None or delta is None:
            raise InputError("the algebra needs the curve and delta (give --input with f and delta)")
        desc = build_algebra(curve, delta, model, precision=run.cfg.precision)
        report = verify_brauer_membership(desc, curve, delta, model)
        if not report.verified:
            raise RuntimeError(f"membership check failed: {report.checks}")
        doc = desc.to_json()
        doc["membership"] = report.to_json()
        doc["real_positivity"] = real_positivity_certificate(desc, curve, delta, model)
        return doc

    return run.stage("algebra", key, compute)


def stage_invariants(run: Run, model_doc: dict, algebra_doc: dict) -> dict:
    cfg = run.cfg
    hints = model_doc.get("hints")
    bound = cfg.prime_bound or 13
    key = _key("invariants", model_doc["quadrics"], algebra_doc["F"], algebra_doc["c"], hints, bound, cfg.lift_depth, cfg.seed)

    def compute() -> dict:
        from .io import algebra_from_json
        from .local import all_profiles, candidate_primes
        from .surface import bad_primes

        model, curve, delta = _model_and_curve(model_doc)
        desc = algebra_from_json(algebra_doc)
        bad = bad_primes(model, hints, bound, curve, delta, certified=hints is not None)
        cand = candidate_primes(model, desc.F, desc.c, bad.primes, seed=cfg.seed)
        profiles = all_profiles(
            model, desc.c, desc.F, cand, cfg.lift_depth, cfg.seed, cfg.threads, algebra_doc.get("real_positivity")
        )
        return {
            "bad_primes": {"primes": bad.primes, "method": bad.method, "sources": {str(k): v for k, v in bad.sources.items()}},
            "candidates": cand.to_json(),
            "profiles": [p.to_json() for p in profiles],
        }

    return run.stage("invariants", key, compute)


def stage_certify(run: Run) -> tuple[dict, str]:
    from .local import InvariantProfile, certify

    model_doc = stage_build(run)
    lat = stage_lattice(run)
    if lat["rank"] != 17:
        raise StageError("lattice", f"line lattice has rank {lat['rank']}")
    model, _, _ = _model_and_curve(model_doc)
    display = FLAGSHIP_DISPLAY if _is_flagship(model) else None
    mjson = {k: model_doc[k] for k in ("quadrics", "provenance") if k in model_doc}
    mjson["report"] = model_doc.get("report", {})
    if "rational_point" in model_doc:
        cert = certify(mjson, {}, [], rational_point=model_doc["rational_point"])
        doc = cert.to_json()
        doc["rational_point"] = model_doc["rational_point"]
        return doc, cert.verdict
    coh = stage_cohomology(run, model_doc)
    if coh["groups"]["H96"]["invariants"] != [2]:
        raise StageError("cohomology", "H^1(H96, Z^17) is not Z/2")
    alg = stage_algebra(run, model_doc)
    inv = stage_invariants(run, model_doc, alg)
    profiles = [InvariantProfile.from_json(p) for p in inv["profiles"]]
    algebra = {k: alg[k] for k in ("c", "F", "G", "log")}
    cert = certify(
        mjson,
        algebra,
        profiles,
        displayed_places=display,
        extra={"candidates": inv["candidates"], "bad_primes": inv["bad_primes"]},
    )
    return cert.to_json(), cert.verdict


def stage_family(run: Run) -> dict:
    from .etale import component_values, eligible_twist_primes, family_report, twist_prime_report

    run.load()
    inp = run.input_doc
    if inp is not None and "f" in inp:
        curve, delta = curve_from_json(inp)
    else:
        curve, delta = curve_from_json(data.flagship_curve_json(printed=False))
    bound = run.cfg.prime_bound or 1000
    primes = []
    for p in eligible_twist_primes(bound):
        rep = twist_prime_report(p)
        print(f"eligible {p}", flush=True)
        primes.append({"p": p, "evidence": _jsonable(rep)})
    doc: dict = {"bound": bound, "eligible": primes}
    if primes and delta is not None:
        p0 = primes[0]["p"]
        comps = component_values(delta, p0)
        doc["smallest"] = {"p": p0, "components": [c.verdict for c in comps], "all_square": all(c.verdict == "square" for c in comps)}
    if delta is not None:
        reps = family_report(curve, delta)
        doc["twist"] = {
            "n": curve.n,
            "places": [{"place": str(r.place), "components": list(r.components), "overall": r.overall, "note": r.note} for r in reps],
            "summary": "inherited everywhere" if all(r.note == "inherited" for r in reps) else "see places",
        }
    return doc


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, (str, int, float, bool)) or x is None:
        return x
    return str(x)


def stage_dp4(run: Run) -> dict:
    import random

    from .delpezzo import beta_norm_is_square, build_dp4, double_cover, odd_degree_model, preimage_count, transfer_delta
    from .surface import enumerate_fiber

    model_doc = stage_build(run)
    model, curve, delta = _model_and_curve(model_doc)
    if curve is None or delta is None:
        raise StageError("dp4", "the Del Pezzo bridge needs the curve and delta")

    def compute() -> dict:
        roots = [-g.coeffs[0] / g.coeffs[1] for g in curve.factors or () if g.degree == 1]
        if not roots:
            raise ValueError("f has no rational root in its factor list")
        a = roots[0]
        odd = odd_degree_model(curve, a)
        beta = transfer_delta(delta, odd)
        W = build_dp4(odd, beta)
        checks = []
        rng = random.Random(run.cfg.seed)
        for p in (11, 13):
            V = enumerate_fiber(model, p)
            Wf = enumerate_fiber(W, p)
            sample = rng.sample(V.points, min(20, len(V.points)))
            on_w = all(W.contains(double_cover(q, odd, p), p) for q in sample)
            total = sum(preimage_count(beta, s, odd, p) for s in Wf.points)
            checks.append({"p": p, "V_points": V.total, "W_points": Wf.total, "sample_images_on_W": on_w, "preimage_total": total, "count_identity": total == V.total})
        doc = dp4_to_json(W)
        doc.update({"odd_model": odd.to_json(), "beta": [str(x) for x in beta.coeffs], "beta_norm_square": beta_norm_is_square(beta, odd), "cover_checks": checks})
        return doc

    return run.stage("dp4", _key("dp4", model_doc.get("curve"), run.cfg.seed), compute)


# --- entry point ------------------------------------------------------------------------


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", help="curve/delta JSON (may also carry quadrics, hints, c)")
    common.add_argument("--model", help="raw QuadricModel JSON")
    common.add_argument("--out", help="output directory (default obstrukt-out)")
    common.add_argument("--precision", type=int, help="starting decimal precision for the algebra")
    common.add_argument("--prime-bound", type=int, dest="prime_bound", help="bad-prime scan bound / family search bound")
    common.add_argument("--lift-depth", type=int, dest="lift_depth", help="p-adic precision of Hensel lifts")
    common.add_argument("--seed", type=int, help="random seed (slices, point search, real sampling)")
    common.add_argument("--threads", type=int, help="worker processes for per-place analysis")
    common.add_argument("--hints", help='bad-prime hints, e.g. "2,3,7,83,739"')
    common.add_argument("--config", help="JSON file with any of the above settings")
    ap = argparse.ArgumentParser(prog="obstrukt", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    for name in SUBCOMMANDS:
        sub.add_parser(name, parents=[common])
    return ap


def _config(ns: argparse.Namespace) -> RunConfig:
    doc: dict = {}
    if ns.config:
        raw = read_json(ns.config)
        if not isinstance(raw, dict):
            raise InputError(f"{ns.config}: expected a JSON object")
        doc.update(raw)
    for f in fields(RunConfig):
        v = getattr(ns, f.name, None)
        if v is not None:
            doc[f.name] = parse_hints(v) if f.name == "hints" else v
    return RunConfig.from_mapping(doc)


def main(argv: list[str] | None = None) -> int:
    _setup_logging()
    ns = _parser().parse_args(argv)
    try:
        cfg = _config(ns)
    except (InputError, TypeError) as exc:
        print(f"stage config failed: {exc}", file=sys.stderr)
        return STAGE_FAILURE
    run = Run(cfg, ns.command)
    code = 0
    try:
        code = _dispatch(run, ns.command)
        run.manifest.status = "ok"
    except StageError as exc:
        print(f"stage {exc.stage} failed: {exc}", file=sys.stderr)
        run.manifest.status = "failed"
        run.manifest.error = f"{exc.stage}: {exc}"
        code = STAGE_FAILURE
    except InputError as exc:
        stage = "build" if ns.command != "family" else "family"
        print(f"stage {stage} failed: {exc}", file=sys.stderr)
        run.manifest.status = "failed"
        run.manifest.error = f"{stage}: {exc}"
        code = STAGE_FAILURE
    finally:
        run.manifest.exit_code = code
        run.write_manifest()
    return code


def _dispatch(run: Run, command: str) -> int:
    if command == "build":
        doc = stage_build(run)
        print(f"model: {doc['provenance']} -> {run.out / 'model.json'}")
        for k, v in doc.get("report", {}).items():
            print(f"  {k}: {json.dumps(v, sort_keys=True)}")
        return 0
    if command == "lattice":
        doc = stage_lattice(run)
        print(f"rank {doc['rank']}, |Aut| = {doc['aut_order']} (faithful: {doc['aut_faithful']}), even subgroup {doc['even_subgroup_order']}")
        return 0
    if command == "cohomology":
        model_doc = stage_build(run) if (run.cfg.input or run.cfg.model) else None
        doc = stage_cohomology(run, model_doc)
        for name, g in doc["groups"].items():
            print(f"H^1({name}, Z^17) = {g['H1']}")
        return 0
    if command == "algebra":
        doc = stage_algebra(run, stage_build(run))
        print(f"c = {doc['c']}, F: {doc['log']['F_nonzero']} terms, membership {doc['membership']['status']}")
        return 0
    if command == "invariants":
        model_doc = stage_build(run)
        doc = stage_invariants(run, model_doc, stage_algebra(run, model_doc))
        for p in doc["profiles"]:
            print(f"inv_{p['place']}: {{{', '.join(p['set'])}}} ({p['status']})")
        return 0
    if command == "certify":
        doc, verdict = stage_certify(run)
        path = run.out / "certificate.json"
        run.manifest.outputs[str(path)] = write_json(path, doc)
        for p in doc["profiles"]:
            print(f"inv_{p['place']}: {{{', '.join(p['set'])}}} ({p['status']})")
        print(f"sum: {doc['sum']}")
        print(f"verdict: {verdict}")
        if doc.get("display_check"):
            print(f"display check: {doc['display_check']['note']}")
        if doc.get("conclusion"):
            print(doc["conclusion"])
        return EXIT[verdict]
    if command == "family":
        try:
            doc = stage_family(run)
        except InputError:
            raise
        except Exception as exc:
            raise StageError("family", str(exc)) from exc
        path = run.out / "family.json"
        run.manifest.outputs[str(path)] = write_json(path, doc)
        if "twist" in doc:
            print(f"n = {doc['twist']['n']}: {doc['twist']['summary']}")
        return 0
    if command == "dp4":
        doc = stage_dp4(run)
        g = doc["odd_model"]["g"]
        print(f"g = {g}; W: two quadrics in 5 variables -> {run.out / 'dp4.json'}")
        for c in doc["cover_checks"]:
            print(f"  p = {c['p']}: |V| = {c['V_points']}, |W| = {c['W_points']}, images on W: {c['sample_images_on_W']}, count identity: {c['count_identity']}")
        return 0
    raise StageError(command, "unknown subcommand")


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
