"""Command-line entry point: ``quartlab <subcommand> [options]``."""

from __future__ import annotations

import argparse
import configparser
import csv
import json
import sys
import time
import warnings

from . import __version__, circle, enumeration, experiments, weyl
from .errors import BudgetExceeded
from .params import Parameters, choose_parameters, format_rational, gamma0_general, parse_rational


class UsageError(Exception):
    pass


def _rational(text):
    try:
        return parse_rational(text)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _params(args) -> Parameters:
    if getattr(args, "P", None):
        parts = [p for p in args.P.split(",") if p]
        if len(parts) != 4:
            raise UsageError("--P takes four comma-separated values")
        vals = [float(_rational(p)[0]) for p in parts]
        Y = float(_rational(args.y)[0]) if args.y is not None else 1.0
        return Parameters(*vals, Y=Y)
    if getattr(args, "n", None) is not None and getattr(args, "gamma", None) is not None:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            return choose_parameters(int(args.n), _rational(args.gamma)[0])
    raise UsageError("give --P P1,P2,P3,P4 [--y Y] or --n N --gamma G")


def _alpha(text):
    q, exact = _rational(text)
    return (q if exact else float(q)), exact


def _complex_record(z: complex) -> dict:
    return {"re": repr(float(z.real)), "im": repr(float(z.imag)), "abs": repr(abs(z)),
            "value": f"{z.real + 0.0:.12g}{z.imag + 0.0:+.12g}i"}


# --- subcommands -----------------------------------------------------------------

def cmd_gamma0(args):
    return {"h": args.h, "k": args.k, "gamma0": format_rational(gamma0_general(args.h, args.k))}


def cmd_params(args):
    P = _params(args)
    rec = P.to_record()
    rec["x_counts"] = [weyl.x_range(p).count for p in P.P]
    rec["y_count"] = weyl.y_range(P.Y).count
    rec["h_bounds"] = [repr(P.h_bound(j)) for j in (1, 2, 3)]
    return rec


def cmd_enumerate(args, out):
    for v in enumeration.enumerate_representable(args.limit, threads=args.threads):
        out.write(f"{v}\n")
    return None


def cmd_gaps(args):
    return enumeration.gap_statistics(args.limit, threads=args.threads).to_record()


def cmd_kprime(args):
    Y, exact = _rational(args.y)
    return {"N": str(args.n), "Y": repr(float(Y)), "Y_exact": exact,
            "count": enumeration.count_empty_intervals(args.n, Y, threads=args.threads)}


def cmd_kgamma(args):
    g, exact = _rational(args.gamma)
    return {"N": str(args.n), "gamma": format_rational(g), "gamma_exact": exact,
            "count": enumeration.count_empty_intervals_gamma(args.n, g, threads=args.threads)}


def cmd_greedy(args):
    return enumeration.greedy_approx(args.n).to_record()


def cmd_weyl_eval(args):
    alpha, exact = _alpha(args.alpha)
    if args.sum == "f":
        z = weyl.weyl_f(alpha, float(_rational(args.x)[0]))
    elif args.sum == "g":
        z = weyl.weyl_g(alpha, float(_rational(args.y)[0]))
    elif args.sum == "nu":
        z = weyl.mollified_nu(alpha, float(_rational(args.x)[0]))
    else:
        z = weyl.diff_sum_H(alpha, float(_rational(args.x)[0]), float(_rational(args.z)[0]))
    rec = _complex_record(z)
    rec.update({"sum": args.sum, "alpha": args.alpha, "alpha_exact": exact})
    return rec


def cmd_arcs(args):
    P = _params(args)
    part = circle.build_arcs(args.j, P)
    rec = part.summary()
    rec["j"] = args.j
    if args.check_disjoint:
        rec["disjoint"] = part.disjoint()
        rec["major_disjoint"] = part.major_disjoint()
        rec["spacing_inequality"] = circle.check_disjointness_inequality(args.j, P)
    return rec


def cmd_integrate(args):
    P = _params(args)
    B = circle.named_arcset(args.arcset, args.j, P)
    fn = circle.INTEGRALS[args.which]
    kw = {"method": args.method} if B is not None else {}
    if args.which in ("R", "U"):
        res = fn(P, B, args.target, **kw)
    elif args.which in ("S", "T"):
        res = fn(P, B, args.j, **kw)
    else:
        res = fn(P, B, **kw)
    rec = res.to_record()
    rec.update({"which": args.which, "arcset": args.arcset, "j": args.j, "params": P.to_record()})
    return rec


def cmd_count_r(args):
    X = float(_rational(args.x)[0])
    return {"n": str(args.target), "X": repr(X), "r": weyl.count_r(args.target, X)}


def _load_config(path) -> dict:
    if not path:
        return {}
    cp = configparser.ConfigParser()
    with open(path) as fh:
        text = fh.read()
    if not text.lstrip().startswith("["):
        text = "[experiment]\n" + text
    cp.read_string(text)
    out = {}
    for sec in cp.sections():
        for k, v in cp[sec].items():
            out[k] = v.strip().strip('"')
    return out


def _list(text, conv=int):
    return [conv(t) for t in str(text).replace(",", " ").split()]


def _config_params(cfg) -> Parameters | None:
    if "p" in cfg:
        vals = [float(_rational(t)[0]) for t in _list(cfg["p"], str)]
        return Parameters(*vals, Y=float(_rational(cfg.get("y", "1"))[0]))
    return None


def cmd_experiment(args):
    cfg = _load_config(args.config)
    name = args.name
    if name == "mean-square":
        Ns = _list(cfg.get("n", "65536 1048576 16777216"))
        gamma = cfg.get("gamma", "13/50")
        rep = experiments.mean_square_experiment(Ns, gamma, float(cfg.get("envelope", experiments.LADDER_ENVELOPE)),
                                                 threads=args.threads)
    elif name == "s4":
        rep = experiments.s4_diagonal_experiment(float(_rational(cfg.get("p4", "4"))[0]),
                                                 float(_rational(cfg.get("y", "2"))[0]))
    elif name == "lemmas":
        ladder = _list(cfg.get("x_ladder", "8 16 32 64"))
        weyl_ladder = _list(cfg.get("weyl_ladder", "16 32 64"))
        rep = experiments.lemma_bound_suite(_config_params(cfg), tuple(ladder), int(cfg.get("density", 10 ** 4)),
                                            int(cfg.get("seed", 0)), args.threads, weyl_ladder=tuple(weyl_ladder))
    elif name == "bessel":
        P = _config_params(cfg) or Parameters(8, 6, 4.5, 4, 3)
        rep = experiments.bessel_experiment(P, args.threads)
    else:
        P = _config_params(cfg) or Parameters(4, 4, 4, 4, 2)
        rep = experiments.induction_chain_experiment(P, args.threads)
    rep.config = {**rep.config, "file": dict(sorted(cfg.items()))}
    return rep


# --- plumbing ------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="quartlab", description=__doc__)
    ap.add_argument("--version", action="version", version=__version__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--out", help="write the JSON report here instead of stdout")
    common.add_argument("--csv", help="also write per-record rows as CSV")
    common.add_argument("--runtime", action="store_true", help="include wall time and thread count in the report")
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, **kw):
        return sub.add_parser(name, parents=[common], **kw)

    def add_params(p):
        p.add_argument("--P", help="P1,P2,P3,P4")
        p.add_argument("--y")
        p.add_argument("--n", type=int)
        p.add_argument("--gamma")

    p = add("gamma0")
    p.add_argument("--h", type=int, default=4)
    p.add_argument("--k", type=int, default=4)
    add_params(add("params"))
    for name in ("enumerate", "gaps"):
        add(name).add_argument("--limit", type=int, required=True)
    p = add("kprime")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--y", required=True)
    p = add("kgamma")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--gamma", required=True)
    add("greedy").add_argument("--n", type=int, required=True)
    p = add("weyl-eval")
    p.add_argument("--sum", choices=["f", "g", "nu", "H"], required=True)
    p.add_argument("--alpha", required=True)
    p.add_argument("--x", default="2")
    p.add_argument("--y", default="1")
    p.add_argument("--z", default="0")
    p = add("arcs")
    add_params(p)
    p.add_argument("--j", type=int, choices=[1, 2, 3], default=1)
    p.add_argument("--check-disjoint", action="store_true")
    p = add("integrate")
    add_params(p)
    p.add_argument("--which", choices=sorted(circle.INTEGRALS), required=True)
    p.add_argument("--arcset", choices=["full", "central", "major", "minor", "A0", "A1"], default="full")
    p.add_argument("--j", type=int, default=1)
    p.add_argument("--target", type=int, default=0, help="n for R and U")
    p.add_argument("--method", choices=["quadrature", "spectral"], default="quadrature")
    p = add("count-r")
    p.add_argument("--target", "--n-value", dest="target", type=int, required=True)
    p.add_argument("--x", required=True)
    p = add("experiment")
    p.add_argument("--name", choices=["mean-square", "s4", "lemmas", "bessel", "induction-chain"], required=True)
    p.add_argument("--config")
    return ap


HANDLERS = {
    "gamma0": cmd_gamma0, "params": cmd_params, "gaps": cmd_gaps, "kprime": cmd_kprime,
    "kgamma": cmd_kgamma, "greedy": cmd_greedy, "weyl-eval": cmd_weyl_eval, "arcs": cmd_arcs,
    "integrate": cmd_integrate, "count-r": cmd_count_r, "experiment": cmd_experiment,
}


def _effective_config(args) -> dict:
    skip = {"threads", "out", "csv", "runtime", "command"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _emit(text: str, path, stdout):
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        stdout.write(text)


def main(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.threads < 1:
        stderr.write(json.dumps({"error": "usage", "message": "--threads must be positive"}) + "\n")
        return 2
    start = time.perf_counter()
    try:
        if args.command == "enumerate":
            if args.out:
                with open(args.out, "w") as fh:
                    cmd_enumerate(args, fh)
            else:
                cmd_enumerate(args, stdout)
            return 0
        result = HANDLERS[args.command](args)
    except UsageError as exc:
        stderr.write(json.dumps({"error": "usage", "message": str(exc)}) + "\n")
        return 2
    except BudgetExceeded as exc:
        stderr.write(json.dumps(exc.to_record()) + "\n")
        return 1
    except (ValueError, ZeroDivisionError) as exc:
        stderr.write(json.dumps({"error": "precondition", "message": str(exc)}) + "\n")
        return 1
    runtime = {"wall_seconds": time.perf_counter() - start, "threads": args.threads}
    if isinstance(result, experiments.ExperimentReport):
        result.config = {"effective": _effective_config(args), **result.config}
        result.runtime = runtime
        text = result.to_json(include_runtime=args.runtime) + "\n"
        if args.csv:
            cols, rows = result.csv_rows()
            with open(args.csv, "w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow(cols)
                for row in rows:
                    w.writerow([json.dumps(v) if isinstance(v, (list, dict)) else v for v in row])
    else:
        doc = {"command": args.command, "version": __version__, "config": _effective_config(args),
               "result": result}
        if args.runtime:
            doc["runtime"] = runtime
        text = json.dumps(doc, sort_keys=True, indent=2) + "\n"
    _emit(text, args.out, stdout)
    return 0


if __name__ == "__main__":
    sys.exit(main())
