"""Command line entry point: ``qmlab verify | scenario | sigma-curve``.

Exit status is 0 when every check passes, 1 when a bound or scenario check
fails and 2 for usage or configuration errors.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .errors import QmlabError
from .scenarios import SCENARIOS, parse_eps_grid, scenario, sigma_curve, sigma_curve_csv
from .suite import SUITES, SuiteConfig, emit_report, load_manifest, run_suites

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def _write(text: str, path: str | None):
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _verify(args) -> int:
    if args.manifest:
        cfg = load_manifest(Path(args.manifest).read_text(), seed=args.seed, workers=args.workers)
    else:
        cfg = SuiteConfig.build(args.suite, trials=args.trials, seed=args.seed, workers=args.workers)
    if args.inject_bug:
        if args.inject_bug not in SUITES:
            raise QmlabError(f"unknown suite for --inject-bug: {args.inject_bug}")
        cfg = SuiteConfig(cfg.suites, cfg.seed, cfg.workers, args.inject_bug)
    report = run_suites(cfg)
    _write(emit_report(report, args.format), args.report)
    for r in report.results:
        status = "ok" if r.passed else f"{len(r.failures)} FAILED"
        print(f"{r.id:18s} {r.checks:6d} checks  {status}", file=sys.stderr)
    return EXIT_OK if report.passed else EXIT_FAIL


def _scenario(args) -> int:
    rep = scenario(args.name, eps=args.eps, grid=args.grid)
    _write(rep.to_json(), args.report)
    for c in rep.checks:
        mark = "ok  " if c.passed else "FAIL"
        print(f"{mark} {c.name}: {c.deviation:.3e} (tol {c.tolerance:.1e})", file=sys.stderr)
    return EXIT_OK if rep.passed else EXIT_FAIL


def _sigma_curve(args) -> int:
    rows = sigma_curve(parse_eps_grid(args.eps))
    if args.format == "csv":
        text = sigma_curve_csv(rows)
    else:
        text = json.dumps({"kind": "sigma-curve", "rows": rows}, indent=2, sort_keys=True) + "\n"
    _write(text, args.report)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qmlab", description="Measurement-bound verification toolkit.")
    sub = parser.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="run randomized bound suites")
    v.add_argument("--suite", default="all", help=f"comma-separated ids or 'all' ({', '.join(SUITES)})")
    v.add_argument("--trials", type=int, default=100)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--report", help="output path (stdout when omitted)")
    v.add_argument("--format", choices=("structured", "csv"), default="structured")
    v.add_argument("--workers", type=int, default=1)
    v.add_argument("--manifest", help="JSON list of suite entries overriding --suite/--trials")
    v.add_argument("--inject-bug", metavar="SUITE", help="negate the right-hand side of one suite (self-test)")
    v.set_defaults(func=_verify)

    s = sub.add_parser("scenario", help="reproduce a concrete model")
    s.add_argument("name", choices=sorted(SCENARIOS))
    s.add_argument("--eps", help="flip-probability grid a:b:step")
    s.add_argument("--grid", type=int, help="grid size for the blurred position model")
    s.add_argument("--report", help="output path (stdout when omitted)")
    s.set_defaults(func=_scenario)

    c = sub.add_parser("sigma-curve", help="quality, disturbance bound and reduction gap over a grid")
    c.add_argument("--eps", default="0:0.45:0.05")
    c.add_argument("--format", choices=("structured", "csv"), default="csv")
    c.add_argument("--report", help="output path (stdout when omitted)")
    c.set_defaults(func=_sigma_curve)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "trials", 1) < 0 or getattr(args, "workers", 1) < 1:
        parser.error("--trials must be >= 0 and --workers >= 1")
    try:
        return args.func(args)
    except (QmlabError, ValueError, OSError) as err:
        print(f"qmlab: error: {err}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
