"""Command-line front end.

Every command reads files, prints one JSON report to stdout and encodes
its verdict in the exit code:

    0   success / membership holds
    1   verdict is negative (not a member, not quasi-uniform, ...)
    2   inconclusive (search budget exceeded)
    64  usage error
    65  data error in an input file

Vector files are JSON objects ``{"n": .., "coords": [..]}`` where each
coordinate is either the shorthand string ``"log a"`` / ``"log a/b"`` or
an exact ``{"log_terms": {...}}`` object.  Decimal coordinates are
rejected: irrational values (such as entropies of non-uniform marginals)
must be given exactly through their log-terms.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
from typing import Optional, Sequence

from . import bounds, polycone, qusearch
from .distributions import (
    EntropyVector,
    JointPMF,
    PMFFormatError,
    entropy_vector,
    is_quasi_uniform,
    parse_pmf,
    serialize_pmf,
)
from .logexact import LogLinear
from .subsets import canonical_order, subset_name

EX_FALSE = 1
EX_INCONCLUSIVE = 2
EX_USAGE = 64
EX_DATAERR = 65


class DataError(Exception):
    """Invalid input file contents; mapped to exit code 65."""


_SHORTHAND_RE = re.compile(r"^log\s+(\d+)\s*(?:/\s*(\d+))?$")


def parse_vector_json(obj) -> EntropyVector:
    if not isinstance(obj, dict) or "n" not in obj or "coords" not in obj:
        raise DataError("vector file must be an object with 'n' and 'coords'")
    try:
        n = int(obj["n"])
        order = canonical_order(n)
    except (TypeError, ValueError):
        raise DataError(f"invalid variable count {obj.get('n')!r}") from None
    if "order" in obj:
        expected = [subset_name(a) for a in order]
        if list(obj["order"]) != expected:
            raise DataError(f"coordinate order must be {expected}")
    raw = obj["coords"]
    if not isinstance(raw, list) or len(raw) != len(order):
        raise DataError(f"expected {len(order)} coordinates for n={n}")
    coords = []
    for k, entry in enumerate(raw):
        name = subset_name(order[k])
        if isinstance(entry, str):
            m = _SHORTHAND_RE.match(entry.strip())
            if not m:
                raise DataError(
                    f"coordinate {name}: bad shorthand {entry!r}"
                    " (decimals are rejected; use 'log a/b' or log_terms)"
                )
            coords.append(LogLinear.from_log_rational(int(m.group(1)), int(m.group(2) or 1)))
        elif isinstance(entry, dict):
            try:
                coords.append(LogLinear.from_json(entry))
            except (ValueError, TypeError) as exc:
                raise DataError(f"coordinate {name}: {exc}") from None
        else:
            raise DataError(
                f"coordinate {name}: numeric literals are rejected to protect exactness"
            )
    return EntropyVector(n, coords)


def _load_json(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: invalid JSON ({exc})") from None


def _load_vector(path: str) -> EntropyVector:
    return parse_vector_json(_load_json(path))


def _load_pmf(path: str) -> JointPMF:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from None
    try:
        return parse_pmf(text)
    except PMFFormatError as exc:
        raise DataError(f"{path}: {exc}") from None


_FACE_ALIASES = {
    "theta": ("1", "2", "3", "123p"),
    "omega": ("1", "2", "3", "12", "123p"),
    "full": tuple(r.label for r in polycone.RAY_ORDER),
}


def _parse_face(name: str) -> polycone.FaceSpec:
    labels = _FACE_ALIASES.get(name.lower(), tuple(t for t in name.split(",") if t))
    try:
        rays = frozenset(polycone.ray_by_label(lbl) for lbl in labels)
    except ValueError as exc:
        raise DataError(str(exc)) from None
    if not rays:
        raise DataError(f"empty face specification {name!r}")
    return polycone.face_for_generators(rays)


def _emit(report: dict) -> None:
    json.dump(report, sys.stdout, indent=2)
    sys.stdout.write("\n")


def _vector_report(h: EntropyVector) -> dict:
    return {
        "n": h.n,
        "order": [subset_name(a) for a in canonical_order(h.n)],
        "coords": [c.to_json() for c in h.coords],
        "bits": [c.approx_bits(4) for c in h.coords],
    }


# -- commands ----------------------------------------------------------------


def _cmd_entropy(args) -> int:
    pmf = _load_pmf(args.pmf_file)
    report = {"command": "entropy", **_vector_report(entropy_vector(pmf))}
    _emit(report)
    return 0


def _cmd_qu_check(args) -> int:
    pmf = _load_pmf(args.pmf_file)
    verdict = is_quasi_uniform(pmf)
    report = {"command": "qu_check", "is_quasi_uniform": verdict.is_qu}
    if verdict.is_qu:
        report["support_sizes"] = {
            subset_name(a): verdict.support_sizes[a] for a in canonical_order(pmf.n)
        }
    else:
        w = verdict.witness
        report["witness"] = {
            "subset": subset_name(w.alpha),
            "point_a": list(w.point_a),
            "mass_a": str(w.mass_a),
            "point_b": list(w.point_b),
            "mass_b": str(w.mass_b),
        }
    _emit(report)
    return 0 if verdict.is_qu else EX_FALSE


def _cmd_gamma(args) -> int:
    h = _load_vector(args.vector_file)
    verdict = polycone.in_gamma_n(h)
    report = {"command": "gamma", "n": h.n, "in_cone": verdict.in_cone}
    if not verdict.in_cone:
        report["violated"] = {
            "name": verdict.violated.name,
            "coefficients": list(verdict.violated.coeffs),
            "value": verdict.value.to_json(),
        }
    _emit(report)
    return 0 if verdict.in_cone else EX_FALSE


def _cmd_decompose(args) -> int:
    h = _load_vector(args.vector_file)
    face = _parse_face(args.face)
    if h.n != 3:
        raise DataError("conic decomposition requires a 3-variable vector")
    cert = polycone.cone_membership(h, face.generators)
    report = {
        "command": "decompose",
        "face": list(face.labels()),
        "member": cert is not None,
        "certificate": cert.to_json() if cert else None,
    }
    _emit(report)
    return 0 if cert is not None else EX_FALSE


def _cmd_face(args) -> int:
    h = _load_vector(args.vector_file)
    face = _parse_face(args.face)
    if h.n != 3:
        raise DataError("face location requires a 3-variable vector")
    loc = polycone.strict_in_face(h, face)
    report = {
        "command": "face",
        "face": list(face.labels()),
        "position": loc.position.value,
        "subface": list(loc.subface.labels()) if loc.subface else None,
        "certificate": loc.certificate.to_json() if loc.certificate else None,
    }
    _emit(report)
    return 0 if loc.position is polycone.FacePosition.STRICTLY_INSIDE else EX_FALSE


def _cmd_inner(args) -> int:
    h = _load_vector(args.vector_file)
    if h.n != 3:
        raise DataError("inner bounds are defined for 3-variable vectors")
    verdict = bounds.theta_in(h) if args.bound == "theta" else bounds.omega_in(h)
    report = {"command": "inner", "bound": args.bound, **verdict.to_json()}
    _emit(report)
    return 0 if verdict.member else EX_FALSE


def _cmd_spec(args) -> int:
    h = _load_vector(args.vector_file)
    spec = qusearch.spec_from_vector(h)
    report = {
        "command": "spec",
        "liftable": spec is not None,
        "spec": spec.to_json() if spec else None,
    }
    _emit(report)
    return 0 if spec is not None else EX_FALSE


def _cmd_search(args) -> int:
    try:
        spec = qusearch.SupportSpec.from_json(_load_json(args.spec_file))
    except (KeyError, TypeError, ValueError) as exc:
        raise DataError(f"{args.spec_file}: {exc}") from None
    ok, witness = qusearch.check_feasibility_necessary(spec)
    if not ok:
        _emit({"command": "search", "status": "infeasible_necessary", "witness": witness})
        return EX_FALSE
    hints: tuple = ()
    if not args.no_hints:
        vec = EntropyVector(
            spec.n, [LogLinear.from_log_int(spec.m[a]) for a in canonical_order(spec.n)]
        )
        hints = qusearch.structural_hints(vec)
    budget = qusearch.Budget(max_nodes=args.budget_nodes, max_seconds=args.budget_seconds)
    workers = 1 if args.deterministic else max(1, args.parallel)
    outcome = qusearch.search(spec, budget=budget, hints=hints, workers=workers)
    report = {
        "command": "search",
        "status": outcome.status.value,
        "nodes_explored": outcome.nodes_explored,
        "hints": [
            {"kind": type(h).__name__.lower(), "groups": sorted(subset_name(g) for g in (
                (h.alpha, h.beta) if isinstance(h, qusearch.Independence) else (h.base, h.extension)
            ))}
            for h in hints
        ],
        "witness": serialize_pmf(outcome.pmf) if outcome.pmf else None,
    }
    if outcome.pmf is not None and args.witness_out:
        with open(args.witness_out, "w", encoding="utf-8") as fh:
            fh.write(serialize_pmf(outcome.pmf))
    _emit(report)
    if outcome.status is qusearch.SearchStatus.FOUND:
        return 0
    if outcome.status is qusearch.SearchStatus.BUDGET_EXCEEDED:
        return EX_INCONCLUSIVE
    return EX_FALSE


def _cmd_catalog(_args) -> int:
    faces = polycone.face_catalogue()
    report = {
        "command": "catalog",
        "count": len(faces),
        "faces": [f.to_json() for f in faces],
    }
    _emit(report)
    return 0


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage errors exit 64, not argparse's 2
        self.exit(EX_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="entrocone",
        description="Exact entropy vectors, cone membership and quasi-uniform synthesis",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("entropy", help="exact entropy vector of a PMF file")
    p.add_argument("pmf_file")
    p.set_defaults(func=_cmd_entropy)

    p = sub.add_parser("qu-check", help="quasi-uniformity verdict for a PMF file")
    p.add_argument("pmf_file")
    p.set_defaults(func=_cmd_qu_check)

    p = sub.add_parser("gamma", help="elemental-inequality membership of a vector")
    p.add_argument("vector_file")
    p.set_defaults(func=_cmd_gamma)

    p = sub.add_parser("decompose", help="conic decomposition over a face's rays")
    p.add_argument("vector_file")
    p.add_argument("face", help="'theta', 'omega', 'full' or ray labels like 1,2,123p")
    p.set_defaults(func=_cmd_decompose)

    p = sub.add_parser("face", help="strictly-inside / subface / outside location")
    p.add_argument("vector_file")
    p.add_argument("face", help="'theta', 'omega', 'full' or ray labels like 1,2,123p")
    p.set_defaults(func=_cmd_face)

    p = sub.add_parser("inner", help="inner-bound membership on theta or omega")
    p.add_argument("vector_file")
    p.add_argument("bound", choices=("theta", "omega"))
    p.set_defaults(func=_cmd_inner)

    p = sub.add_parser("spec", help="lift a vector to quasi-uniform support sizes")
    p.add_argument("vector_file")
    p.set_defaults(func=_cmd_spec)

    p = sub.add_parser("search", help="synthesize a quasi-uniform distribution")
    p.add_argument("spec_file")
    p.add_argument("--budget-nodes", type=int, default=qusearch.Budget().max_nodes)
    p.add_argument("--budget-seconds", type=float, default=qusearch.Budget().max_seconds)
    p.add_argument("--deterministic", action="store_true", default=True,
                   help="single-threaded reproducible mode (default)")
    p.add_argument("--parallel", type=int, default=0, metavar="WORKERS",
                   help="explore subtrees in WORKERS processes (non-deterministic witness)")
    p.add_argument("--no-hints", action="store_true", help="disable structural hints")
    p.add_argument("--witness-out", metavar="FILE", help="also write the witness PMF to FILE")
    p.set_defaults(func=_cmd_search)

    p = sub.add_parser("catalog", help="the canonical proper faces holding non-entropy vectors")
    p.set_defaults(func=_cmd_catalog)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "parallel", 0) > 1:
        args.deterministic = False
    try:
        return args.func(args)
    except DataError as exc:
        print(f"entrocone: {exc}", file=sys.stderr)
        return EX_DATAERR


if __name__ == "__main__":
    sys.exit(main())
