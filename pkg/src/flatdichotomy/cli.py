"""Command-line entry point: ``flatdichotomy <group> <action> [flags]``."""

from __future__ import annotations

import argparse
import json
import math
import sys
from typing import Optional, Sequence

from . import experiments as ex
from .config import ExperimentConfig, load_config
from .report import build_report, dumps, emit_plotdata, growth_csv, rows_to_csv, write_text
from .spaces import SpaceError

EXIT_ERROR = 2
EXIT_STRICT = 3


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON config file; flags given on the command line win")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", default=None, help="output file (default: stdout)")
    p.add_argument("--format", choices=("json", "csv"), default=None)
    p.add_argument("--strict", action="store_true", default=None,
                   help="treat Ambiguous classifications as failures")
    p.add_argument("--plotdata", default=None, help="directory for CSV plot series")


def _space_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--space", default=None, help="rank1:LABEL or aiii")
    p.add_argument("--p", type=int, default=None)
    p.add_argument("--q", type=int, default=None)
    p.add_argument("--point", default=None, help="x1,x2[,x3]")
    p.add_argument("--t", type=float, default=None, help="rank-one orbit radius")


def _budget_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--levels", type=int, default=None)
    p.add_argument("--samples", type=int, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="flatdichotomy",
                                     description="L1-L2 dichotomy experiments on flat symmetric spaces")
    groups = parser.add_subparsers(dest="group", required=True)

    sf = groups.add_parser("specfun").add_subparsers(dest="action", required=True)
    _common(sf.add_parser("check", help="Bessel accuracy and envelope suite"))

    kn = groups.add_parser("kernel").add_subparsers(dest="action", required=True)
    ke = kn.add_parser("eval", help="evaluate kernels on a lambda grid from a JSON request")
    ke.add_argument("--request", required=True)
    _common(ke)

    dc = groups.add_parser("dichotomy").add_subparsers(dest="action", required=True)
    scan = dc.add_parser("scan", help="growth scan of the truncated integrals")
    _space_flags(scan)
    scan.add_argument("--k", type=int, default=None)
    _budget_flags(scan)
    _common(scan)
    mk = dc.add_parser("min-k", help="minimal square-integrable power and verdicts")
    _space_flags(mk)
    mk.add_argument("--kmax", type=int, default=None)
    _budget_flags(mk)
    _common(mk)

    lb = groups.add_parser("lowerbound").add_subparsers(dest="action", required=True)
    r1 = lb.add_parser("rank1", help="interval witness for nu = 0, k = 2")
    r1.add_argument("--t", type=float, default=None)
    r1.add_argument("--n", type=int, default=None)
    _common(r1)
    rc = lb.add_parser("rectangles", help="type D rectangle witness for q = 2, k = 2")
    rc.add_argument("--x", type=float, default=None)
    rc.add_argument("--eta", type=float, default=None)
    rc.add_argument("--n", type=int, default=None)
    rc.add_argument("--no-quadrature", dest="quadrature", action="store_false", default=None)
    _common(rc)

    mc = groups.add_parser("mc").add_subparsers(dest="action", required=True)
    mv = mc.add_parser("validate", help="empirical transform vs kernel product")
    mv.add_argument("--space", default=None, help="AI or AIII:p=2:q=3")
    mv.add_argument("--factors", default=None, help='"2,1;2,1"')
    mv.add_argument("--n", type=int, default=None)
    mv.add_argument("--grid", default=None, help='"l1,l2;l1,l2;..."')
    mv.add_argument("--calibrate", action="store_true", default=None)
    _common(mv)

    rp = groups.add_parser("report").add_subparsers(dest="action", required=True)
    rr = rp.add_parser("reproduce-paper", help="all result families with pass/fail")
    _budget_flags(rr)
    _common(rr)
    return parser


_NOT_CONFIG = {"group", "action", "config", "plotdata"}


def _overrides(args: argparse.Namespace) -> dict:
    out = {k: v for k, v in vars(args).items() if k not in _NOT_CONFIG}
    if isinstance(out.get("point"), str):
        out["point"] = ex.parse_floats(out["point"])
    return out


def _opt(cfg: ExperimentConfig, key: str, default):
    val = cfg.options.get(key)
    return default if val is None else val


def _point(cfg: ExperimentConfig) -> list:
    if cfg.point:
        return [float(v) for v in cfg.point]
    if cfg.t is not None:
        return [float(cfg.t)]
    raise SpaceError("need --point (or --t in rank one)")


def run(cfg: ExperimentConfig) -> tuple:
    """Dispatch a config; returns (result dict, csv text or None, strict failure)."""
    cmd = cfg.command
    levels = cfg.levels or ex.DEFAULT_LEVELS
    samples = cfg.samples or ex.DEFAULT_SAMPLES
    if cmd == "specfun check":
        res = ex.specfun_check()
        return res, None, not res["pass"] and cfg.strict
    if cmd == "kernel eval":
        with open(cfg.options["request"], encoding="utf-8") as fh:
            res = ex.kernel_eval(json.load(fh))
        return res, rows_to_csv(res["header"], res["rows"]), False
    if cmd == "dichotomy scan":
        datum = ex.parse_space(cfg.space, cfg.p, cfg.q)
        res = ex.dichotomy_scan(datum, _point(cfg), cfg.k or 2, levels, samples, cfg.seed, slice_points=200)
        return res, growth_csv(res), cfg.strict and res["classification"] == "Ambiguous"
    if cmd == "dichotomy min-k":
        datum = ex.parse_space(cfg.space, cfg.p, cfg.q)
        res = ex.dichotomy_min_k(datum, _point(cfg), cfg.kmax or 4, levels, samples, cfg.seed)
        rows = [(v["k"], v["classification"], v["in_L1"], v["in_L2"], v["dichotomy_holds_at_k"])
                for v in res["verdicts"]]
        text = rows_to_csv(["k", "classification", "in_L1", "in_L2", "dichotomy_holds_at_k"], rows)
        ambiguous = any(v["classification"] == "Ambiguous" for v in res["verdicts"])
        return res, text, cfg.strict and ambiguous
    if cmd == "lowerbound rank1":
        res = ex.lowerbound_rank1(cfg.t or 1.0, int(_opt(cfg, "n", 100)))
        text = rows_to_csv(["N", "lower_bound", "integral"],
                           zip(res["N"], res["lower_bound"], res["integral"]))
        return res, text, False
    if cmd == "lowerbound rectangles":
        res = ex.lowerbound_rectangles(float(_opt(cfg, "x", 1.0)), float(_opt(cfg, "eta", math.pi / 8)),
                                       int(_opt(cfg, "n", 50)), bool(_opt(cfg, "quadrature", True)))
        cols = ["N", "lower_bound"] + (["integral"] if "integral" in res else [])
        series = [res["N"], res["lower_bound"]] + ([res["integral"]] if "integral" in res else [])
        return res, rows_to_csv(cols, zip(*series)), False
    if cmd == "mc validate":
        res = ex.mc_validate(cfg.space or "AIII:p=2:q=3", _opt(cfg, "factors", "2,1;2,1"),
                             int(_opt(cfg, "n", 100_000)), cfg.seed,
                             _opt(cfg, "grid", "0.5,0.2;1,0.3;1,0.7;1.5,0.5;1.5,1;2,0.6;2,1.4;2.5,1"),
                             bool(_opt(cfg, "calibrate", False)))
        rows = [(json.dumps(r["lambda"]), r["empirical_re"], r["empirical_im"], r["stderr"],
                 r["predicted"], r["pass"]) for r in res["rows"]]
        text = rows_to_csv(["lambda", "empirical_re", "empirical_im", "stderr", "predicted", "pass"], rows)
        return res, text, cfg.strict and not res["pass"]
    if cmd == "report reproduce-paper":
        res = ex.reproduce_paper(levels, samples, cfg.seed, cfg.strict)
        rows = [(r["result"], r["pass"]) for r in res["rows"]]
        return res, rows_to_csv(["result", "pass"], rows), cfg.strict and not res["pass"]
    raise ValueError(f"unknown command {cmd!r}")


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    command = f"{args.group} {args.action}"
    try:
        cfg = load_config(args.config, _overrides(args), command)
        result, text, strict_fail = run(cfg)
    except (SpaceError, ValueError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    report = build_report(cfg, result)
    if cfg.format == "csv" and text is not None:
        write_text(text, cfg.out)
    else:
        write_text(dumps(report), cfg.out)
    if args.plotdata:
        emit_plotdata(report, args.plotdata)
    return EXIT_STRICT if strict_fail else 0


if __name__ == "__main__":
    sys.exit(main())
