"""Command-line interface: ``curvlab gen | curvature | repro | ricci-flat``.

Exit codes: 0 success, 1 reproduction mismatch, 2 input error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from . import bounds, classical as cl, flat, repro, search, zoo
from .chain import (ChainInputError, ChainValidationError, chain_to_dict, from_weighted_graph,
                    load_chain, spectral_gap)
from .means import MeanError

EXIT_OK, EXIT_MISMATCH, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    pass


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise InputError(f"expected comma-separated numbers, got {text!r}") from exc


def _ints(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise InputError(f"expected comma-separated integers, got {text!r}") from exc


def _build(args) -> object:
    fam = args.family
    if fam == "cycle":
        return zoo.cycle(args.n, args.q)
    if fam == "hypercube":
        return zoo.hypercube(args.d, args.q_edge)
    if fam == "abelian-cayley":
        gens = [_ints(g) for g in args.gens.split(";")]
        rates = _floats(args.rates)
        return zoo.abelian_cayley(_ints(args.orders), gens, rates if len(rates) > 1 else rates[0])
    if fam == "birth-death":
        return zoo.birth_death(_floats(args.qplus), _floats(args.qminus))
    if fam == "three-point":
        return zoo.three_point(args.alpha)
    if fam == "perturbed-c6":
        return zoo.perturbed_c6(args.q, args.eps)
    if fam == "prism":
        return zoo.prism(zoo.cycle(args.base_n, args.base_q), args.r1, args.r2, args.q)
    if fam == "bernoulli-laplace":
        lam = _floats(args.lam)
        scale = args.scale if args.scale is not None else zoo.bernoulli_laplace_lazy_scale(args.L, args.N, lam)
        return zoo.bernoulli_laplace(args.L, args.N, lam, scale=scale)
    if fam == "complement-c4-c5":
        return from_weighted_graph(zoo.complement_c4_c5())
    raise InputError(f"unknown family {fam!r}")


def _write(text: str, out: str | None) -> None:
    if out in (None, "-"):
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    else:
        with open(out, "w") as fh:
            fh.write(text)


def cmd_gen(args) -> int:
    c = _build(args)
    _write(json.dumps(chain_to_dict(c), indent=1), args.out)
    return EXIT_OK


def _parse_N(text: str | None) -> float:
    if text is None or text.lower() in ("inf", "infinity"):
        return math.inf
    N = float(text)
    if not N > 0:
        raise InputError("--N must be positive")
    return N


def cmd_curvature(args) -> int:
    c = load_chain(args.chain)
    which = {w.strip() for w in args.which.split(",") if w.strip()}
    unknown = which - {"ent", "be", "orc", "sec"}
    if unknown:
        raise InputError(f"unknown curvature kinds: {sorted(unknown)}")
    N = _parse_N(args.N)
    report: dict = {"chain": args.chain, "n": c.n, "mean": args.mean,
                    "params": {"N": None if math.isinf(N) else N, "delta": args.delta,
                               "restarts": args.restarts, "seed": args.seed}}
    if "ent" in which:
        opts = search.SearchOptions(restarts=args.restarts, seed=args.seed, N=N, delta=args.delta)
        res = search.estimate_curvature(c, args.mean, opts)
        lower, formula = bounds.best_lower_bound(c, args.mean, N)
        if args.delta is not None:
            lower, formula = -(0.5 + 2 / c.q_min), "universal_any_mean"
        report["ent"] = {
            "interval": [lower, res.K_upper],
            "lower_formula": formula,
            "upper_from": "best witness found by search",
            "witness": res.best.to_dict(),
            "diagnostics": res.diagnostics(),
        }
        try:
            report["ent"]["spectral_gap"] = spectral_gap(c)
        except ChainValidationError:
            pass
    kinds = tuple(k for k in ("orc", "sec", "be") if k in which)
    if kinds:
        rep = cl.curvature_report(c, kinds, N)
        report.update(rep.to_dict())
    if args.csv:
        _write(_to_csv(report), args.out)
    else:
        _write(json.dumps(report, indent=1, default=_json_default), args.out)
    return EXIT_OK


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(type(o).__name__)


def _to_csv(report: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf)
    w.writerow(["kind", "i", "j", "value"])
    for kind in ("orc", "sec"):
        for i, j, v in report.get(kind, []):
            w.writerow([kind, i, j, repr(float(v))])
    be = report.get("be")
    if be:
        for x, v in enumerate(be["per_vertex"]):
            w.writerow(["be", x, "", repr(float(v))])
    ent = report.get("ent")
    if ent:
        w.writerow(["ent_lower", "", "", repr(float(ent["interval"][0]))])
        w.writerow(["ent_upper", "", "", repr(float(ent["interval"][1]))])
    return buf.getvalue()


def cmd_repro(args) -> int:
    case = args.case
    kwargs = {}
    if case == "three_point" and args.alpha is not None:
        kwargs["alpha"] = args.alpha
    if case == "cycle_sandwich" and args.n is not None:
        kwargs["n"] = args.n
    if args.restarts is not None and case in ("perturbed_c6", "cycle_sandwich", "table1"):
        kwargs["restarts"] = args.restarts
    rep = repro.CASES[case](**kwargs)
    _write(json.dumps(rep.to_dict(), indent=1), args.out)
    for chk in rep.checks:
        flag = "PASS" if chk.passed else "FAIL"
        print(f"{flag} {case}: {chk.name} = {chk.value:.10g} (expected {chk.expected}; {chk.basis})",
              file=sys.stderr)
    return EXIT_OK if rep.ok else EXIT_MISMATCH


def cmd_ricci_flat(args) -> int:
    c = load_chain(args.chain)
    rep = flat.ricci_flat_report(c, budget=args.budget)
    certs = []
    if args.certificates:
        for x in range(c.n):
            for v in reversed(flat.VARIANTS):
                r = flat.ricci_flat_at(c, x, v, args.budget)
                if isinstance(r, flat.FlatnessCertificate):
                    certs.append(r.to_dict())
                    break
    out = {"chain": args.chain, "vertices": rep}
    if certs:
        out["certificates"] = certs
    _write(json.dumps(out, indent=1), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="curvlab", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a chain file")
    g.add_argument("family", choices=["cycle", "hypercube", "abelian-cayley", "birth-death",
                                      "three-point", "perturbed-c6", "prism", "bernoulli-laplace",
                                      "complement-c4-c5"])
    g.add_argument("--n", type=int, default=16)
    g.add_argument("--q", type=float, default=None)
    g.add_argument("--d", type=int, default=3)
    g.add_argument("--q-edge", type=float, default=None)
    g.add_argument("--orders", default="3,4")
    g.add_argument("--gens", default="1,0;0,1", help="generators separated by ';'")
    g.add_argument("--rates", default="0.25")
    g.add_argument("--qplus", default="0.3,0.3,0")
    g.add_argument("--qminus", default="0,0.3,0.3")
    g.add_argument("--alpha", type=float, default=5.0)
    g.add_argument("--eps", type=float, default=1e-3)
    g.add_argument("--base-n", type=int, default=5)
    g.add_argument("--base-q", type=float, default=0.25)
    g.add_argument("--r1", type=float, default=2e-3)
    g.add_argument("--r2", type=float, default=1e-3)
    g.add_argument("--L", type=int, default=8)
    g.add_argument("--N", type=int, default=4)
    g.add_argument("--lambda", dest="lam", default="0,0,1,1,1,1,1,1")
    g.add_argument("--scale", type=float, default=None)
    g.add_argument("--out", default=None)
    g.set_defaults(func=cmd_gen)

    c = sub.add_parser("curvature", help="compute curvatures of a chain file")
    c.add_argument("chain")
    c.add_argument("--which", default="ent,be,orc,sec")
    c.add_argument("--mean", default="log")
    c.add_argument("--N", default=None)
    c.add_argument("--delta", type=float, default=None)
    c.add_argument("--restarts", type=int, default=32)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--csv", action="store_true")
    c.add_argument("--out", default=None)
    c.set_defaults(func=cmd_curvature)

    r = sub.add_parser("repro", help="reproduce a worked example")
    r.add_argument("case", choices=sorted(repro.CASES))
    r.add_argument("--alpha", type=float, default=None)
    r.add_argument("--n", type=int, default=None)
    r.add_argument("--restarts", type=int, default=None)
    r.add_argument("--out", default=None)
    r.set_defaults(func=cmd_repro)

    f = sub.add_parser("ricci-flat", help="classify vertices by Ricci flatness")
    f.add_argument("chain")
    f.add_argument("--budget", type=int, default=flat.DEFAULT_BUDGET)
    f.add_argument("--certificates", action="store_true")
    f.add_argument("--out", default=None)
    f.set_defaults(func=cmd_ricci_flat)
    return p


_DEFAULT_Q = {"cycle": 0.5, "perturbed-c6": 0.2, "prism": 0.5}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "family", None) is not None and args.q is None:
        args.q = _DEFAULT_Q.get(args.family, 0.5)
    try:
        return args.func(args)
    except (InputError, ChainInputError, ChainValidationError, MeanError, flat.FlatnessError,
            bounds.BoundError, zoo.ZooError, cl.CurvatureError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
