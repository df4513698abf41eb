"""Command-line entry point: one JSON report (or one CSV table) per invocation.

Every report carries the tool version, an echo of the configuration and
whether its numbers are exact or tolerance-based. Module errors produce an
error report and exit status 1; usage errors exit with status 2.
"""

from __future__ import annotations

import argparse
import contextlib
import itertools
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np

from . import __version__, acceptance, hyperb, partition, rayleigh, sharpness
from ._scalar import FLOAT, RATIONAL, fmt_scalar, fmt_vector, to_vector
from .errors import HyperlaceError
from .mixedchar import central_explore, delta_bound, mainbound_check, mixed_char_poly
from .polycore import MultiPoly
from .surd import QuadSurd
from .unipoly import is_real_rooted, largest_root_bracket

THREADS_ENV = "HYPERLACE_THREADS"


@dataclass
class RunConfig:
    subcommand: str
    seed: int = 0
    backend: str = RATIONAL
    tol: str | None = None
    budget: int | None = None
    out: str | None = None
    options: dict = field(default_factory=dict)

    def echo(self):
        return asdict(self)


# -- plumbing ------------------------------------------------------------------------

def _jsonable(x):
    if isinstance(x, Fraction):
        return fmt_scalar(x)
    if isinstance(x, QuadSurd):
        return x.to_json()
    if isinstance(x, (set, frozenset)):
        return sorted(x)
    if isinstance(x, np.generic):
        return x.item()
    if hasattr(x, "to_json"):
        return x.to_json()
    raise TypeError(f"cannot serialize {type(x).__name__}")


def _dump(obj):
    return json.dumps(obj, sort_keys=True, indent=2, default=_jsonable) + "\n"


def _emit(text, out):
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


@contextlib.contextmanager
def worker_map():
    """``map`` over a process pool sized by ``HYPERLACE_THREADS``; results keep input order."""
    threads = int(os.environ.get(THREADS_ENV, "1") or 1)
    if threads <= 1:
        yield map
        return
    with ProcessPoolExecutor(max_workers=threads) as pool:
        yield pool.map


def _load_json(path):
    with open(path) as fh:
        return json.load(fh)


def _parse_vector(text, backend):
    return to_vector([c.strip() for c in text.split(",")], backend)


def _context(args):
    if args.context:
        return hyperb.HyperbolicContext.from_json(_load_json(args.context))
    if args.family:
        return hyperb.builtin_context(args.family, args.n, args.d, args.backend)
    raise HyperlaceError("need --context FILE or --family NAME")


def _vectors(args, ctx):
    raw = _load_json(args.vectors)
    return [to_vector(v, ctx.backend) for v in raw]


def _measure(args):
    if args.measure:
        return rayleigh.DiscreteMeasure.from_json(_load_json(args.measure))
    if args.edges:
        return rayleigh.DiscreteMeasure.uniform(*_graphic(args.edges))
    if args.uniform:
        d, n = (int(x) for x in args.uniform.split(","))
        return rayleigh.DiscreteMeasure.uniform(n, itertools.combinations(range(n), d))
    raise HyperlaceError("need --measure FILE, --edges FILE or --uniform d,n")


def _graphic(path):
    matroid = rayleigh.MatroidView.from_edge_list(path)
    return matroid.n, matroid.bases


def _tol(args, default):
    return Fraction(args.tol) if args.tol is not None else default


# -- subcommands ----------------------------------------------------------------------

def cmd_certify(args):
    if args.poly:
        h = MultiPoly.from_json(_load_json(args.poly))
        e = _parse_vector(args.direction, h.backend)
        ctx = hyperb.certify_hyperbolic(h, e, strategy=args.strategy, samples=args.samples, seed=args.seed)
    else:
        ctx = _context(args)
    exact = ctx.certification.get("strategy") == "structural"
    return ctx.to_json(), {"exact": exact, "evidence": ctx.certification.get("strategy", "derived")}


def cmd_spectrum(args):
    ctx = _context(args)
    x = _parse_vector(args.point, ctx.backend)
    tol = _tol(args, hyperb.DEFAULT_TOL)
    spec = hyperb.spectrum(ctx, x, tol)
    result = {
        "point": fmt_vector(x),
        "spectrum": spec.to_json(),
        "trace": fmt_scalar(hyperb.trace(ctx, x)),
        "rank": hyperb.rank(ctx, x),
        "seminorm": fmt_scalar(hyperb.seminorm(ctx, x, tol)),
        "in_open_cone": hyperb.cone_membership(ctx, x, "open"),
        "in_closed_cone": hyperb.cone_membership(ctx, x, "closed"),
    }
    return result, {"exact": spec.exact}


def cmd_mixedchar(args):
    ctx = _context(args)
    vs = _vectors(args, ctx)
    chi = mixed_char_poly(ctx, vs)
    result = {"chi": chi.to_json(), "real_rooted": is_real_rooted(chi)}
    if ctx.backend == RATIONAL:
        br = largest_root_bracket(chi, _tol(args, hyperb.DEFAULT_TOL))
        result["largest_root"] = [fmt_scalar(br.lo), fmt_scalar(br.hi)]
    return result, {"exact": ctx.backend == RATIONAL}


def cmd_bound(args):
    if args.vectors:
        ctx = _context(args)
        vs = _vectors(args, ctx)
        eps = Fraction(args.eps) if ctx.backend == RATIONAL else float(Fraction(args.eps))
        report = mainbound_check(ctx, vs, eps)
        return report, {"exact": report["exact"]}
    alpha = Fraction(args.alpha) if args.backend == RATIONAL else float(Fraction(args.alpha))
    value = delta_bound(alpha, args.m)
    return {"alpha": fmt_scalar(alpha), "m": args.m, "delta": value,
            "approx": float(value)}, {"exact": args.backend == RATIONAL}


def _instance(args):
    if args.instance:
        inst = partition.Instance.from_json(_load_json(args.instance))
        return inst.with_k(args.k) if args.k is not None else inst
    k = args.k or 2
    if args.generate == "standard_basis":
        return partition.gen_instance("standard_basis", k=k, n=args.n, d=args.d)
    if args.generate == "determinant_rank1":
        return partition.gen_instance("determinant_rank1", k=k, d=args.d, m=args.m, seed=args.seed)
    raise HyperlaceError("need --instance FILE or --generate KIND")


def cmd_partition(args):
    inst = _instance(args)
    if args.certificate:
        cert = partition.PartitionCertificate.from_json(_load_json(args.certificate))
        return {"verification": partition.verify_certificate(inst, cert)}, {"exact": inst.exact}
    result = {"instance": inst.to_json()}
    if args.method in ("greedy", "both"):
        result["greedy"] = partition.greedy_partition(inst).to_json()
    if args.method in ("exhaustive", "both"):
        budget = args.budget or partition.EXHAUSTIVE_BUDGET
        result["exhaustive"] = partition.exhaustive_partition(inst, budget).to_json()
    return result, {"exact": inst.exact}


def cmd_explore(args):
    ctx = _context(args)
    report = central_explore(ctx, Fraction(args.eps), args.m, budget=args.budget or 200, seed=args.seed)
    return report, {"exact": True, "heuristic": True}


def cmd_sharpness(args):
    eps = Fraction(args.eps)
    degrees = [int(d) for d in args.degrees.split(",")] if args.degrees else sharpness.default_degrees(args.dmax)
    tol = _tol(args, sharpness.DEFAULT_ZERO_TOL)
    with worker_map() as pmap:
        rows = sharpness.convergence_table(args.k, eps, degrees, tol=tol, map_fn=pmap)
    return sharpness.table_csv(rows)


def cmd_rayleigh(args):
    mu = _measure(args)
    ctx = rayleigh.certify_strong_rayleigh(mu, samples=args.samples, seed=args.seed)
    marginals = [rayleigh.marginal(mu, i) for i in range(mu.n)]
    cert = rayleigh.rayleigh_partition(mu, args.k, ctx)
    matroid = rayleigh.support_matroid(mu)
    result = {
        "measure": mu.to_json(),
        "certification": ctx.certification,
        "marginals": [fmt_scalar(p) for p in marginals],
        "matroid": {"n": matroid.n, "rank": matroid.d, "bases": len(matroid.bases)},
        "partition": cert.to_json(),
        "part_rank": [matroid.rank(part) for part in cert.parts],
    }
    return result, {"exact": True, "evidence": ctx.certification.get("strategy")}


def cmd_pack(args):
    mu = _measure(args)
    ctx = rayleigh.certify_strong_rayleigh(mu, samples=args.samples, seed=args.seed)
    report = rayleigh.packing_certificate(mu, args.k, ctx, budget=args.budget or rayleigh.PACKING_BUDGET)
    return report, {"exact": True, "evidence": ctx.certification.get("strategy")}


def cmd_selftest(args):
    only = {int(x) for x in args.only.split(",")} if args.only else None
    results = acceptance.run(only, echo=lambda line: print(line, file=sys.stderr))
    passed = all(r.passed for r in results)
    return {"passed": passed, "criteria": [r.to_json() for r in results]}, {"exact": True}


# -- parser ---------------------------------------------------------------------------

def _context_flags(p):
    p.add_argument("--context", help="context JSON file")
    p.add_argument("--family", choices=["product", "elementary", "determinant", "lorentz"])
    p.add_argument("--n", type=int, help="number of variables for --family")
    p.add_argument("--d", type=int, help="degree or matrix size for --family")


def _measure_flags(p):
    p.add_argument("--measure", help="measure JSON file")
    p.add_argument("--edges", help="edge-list file; uses the uniform spanning-tree measure")
    p.add_argument("--uniform", help="'d,n' for the uniform measure on d-subsets of n elements")
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--samples", type=int, default=hyperb.DEFAULT_SAMPLES)


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--backend", choices=[RATIONAL, FLOAT], default=RATIONAL)
    common.add_argument("--tol", help="root bracket width, as a rational string")
    common.add_argument("--budget", type=int, help="search budget for exhaustive, explore and pack")
    common.add_argument("--out", help="write the report here instead of stdout")

    parser = argparse.ArgumentParser(prog="hyperlace", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"hyperlace {__version__}")
    sub = parser.add_subparsers(dest="subcommand", metavar="SUBCOMMAND")

    p = sub.add_parser("certify", parents=[common], help="certify hyperbolicity")
    _context_flags(p)
    p.add_argument("--poly", help="polynomial JSON file")
    p.add_argument("--direction", help="comma-separated direction for --poly")
    p.add_argument("--strategy", choices=["auto", "structural", "sampled"], default="auto")
    p.add_argument("--samples", type=int, default=hyperb.DEFAULT_SAMPLES)
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("spectrum", parents=[common], help="eigenvalues of a point")
    _context_flags(p)
    p.add_argument("--point", required=True)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("mixedchar", parents=[common], help="mixed characteristic polynomial")
    _context_flags(p)
    p.add_argument("--vectors", required=True, help="JSON list of vectors")
    p.set_defaults(func=cmd_mixedchar)

    p = sub.add_parser("bound", parents=[common], help="root bound, alone or checked against vectors")
    _context_flags(p)
    p.add_argument("--alpha", default="1")
    p.add_argument("--m", type=int, default=1)
    p.add_argument("--vectors", help="JSON list of vectors summing to e")
    p.add_argument("--eps", default="1")
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("partition", parents=[common], help="partition rank-one vectors")
    p.add_argument("--instance", help="instance JSON file")
    p.add_argument("--generate", choices=["standard_basis", "determinant_rank1"])
    p.add_argument("--n", type=int)
    p.add_argument("--d", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--method", choices=["greedy", "exhaustive", "both"], default="greedy")
    p.add_argument("--certificate", help="verify this certificate JSON instead of searching")
    p.set_defaults(func=cmd_partition)

    p = sub.add_parser("explore", parents=[common], help="search for large mixed characteristic roots")
    _context_flags(p)
    p.add_argument("--eps", required=True)
    p.add_argument("--m", type=int, required=True)
    p.set_defaults(func=cmd_explore)

    p = sub.add_parser("sharpness", parents=[common], help="extreme-zero table as CSV")
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--eps", default="1/4")
    p.add_argument("--dmax", type=int, default=200)
    p.add_argument("--degrees", help="comma-separated degrees instead of the default ladder")
    p.set_defaults(func=cmd_sharpness)

    p = sub.add_parser("rayleigh", parents=[common], help="certify a measure and partition its elements")
    _measure_flags(p)
    p.set_defaults(func=cmd_rayleigh)

    p = sub.add_parser("pack", parents=[common], help="disjoint-bases report for a measure")
    _measure_flags(p)
    p.set_defaults(func=cmd_pack)

    p = sub.add_parser("selftest", parents=[common], help="run the acceptance suite")
    p.add_argument("--only", help="comma-separated criterion numbers")
    p.set_defaults(func=cmd_selftest)
    return parser


def _config(args):
    skip = {"func", "subcommand", "seed", "backend", "tol", "budget", "out"}
    options = {k: v for k, v in sorted(vars(args).items()) if k not in skip}
    return RunConfig(args.subcommand, args.seed, args.backend, args.tol, args.budget, args.out, options)


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.subcommand is None:
        parser.print_usage(sys.stderr)
        print("hyperlace: error: a subcommand is required", file=sys.stderr)
        return 2
    config = _config(args)
    header = {"tool": "hyperlace", "version": __version__, "config": config.echo()}
    try:
        outcome = args.func(args)
    except (HyperlaceError, ValueError, OSError, KeyError) as exc:
        details = getattr(exc, "details", {})
        report = dict(header, error={"type": type(exc).__name__, "message": str(exc), "details": details})
        _emit(_dump(report), args.out)
        return 1
    if isinstance(outcome, str):
        _emit(outcome, args.out)
        return 0
    result, provenance = outcome
    _emit(_dump(dict(header, result=result, provenance=provenance)), args.out)
    if args.subcommand == "selftest" and not result["passed"]:
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
