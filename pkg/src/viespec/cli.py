"""Command line: ``viespec run|list-scenarios|verify``.

Exit codes: 0 success, 2 configuration error, 3 numerical regime error,
4 acceptance failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from typing import Optional, Sequence

from .errors import ViespecError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_REGIME = 3
EXIT_ACCEPTANCE = 4


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="viespec", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one scenario and write CSV/JSON/SVG outputs")
    run.add_argument("config", help="scenario TOML file or bundled scenario name")
    run.add_argument("outdir", help="output directory (created if missing)")
    run.add_argument("--mode", choices=("dense", "arnoldi"), help="eigensolver path")
    run.add_argument("--sphere-resolution", type=int, help="direction samples per sphere dimension")
    run.add_argument("--tol", type=float, help="classification distance to the essential segments")
    run.add_argument("--dense-cap", type=int, help="largest cell count for dense assembly")
    run.add_argument("--arnoldi-k", type=int, help="Ritz values to compute in arnoldi mode")

    sub.add_parser("list-scenarios", help="print the bundled scenario names")

    ver = sub.add_parser("verify", help="run the acceptance checks")
    ver.add_argument("criteria", nargs="*", type=int, help="criterion numbers (default: all)")
    return p


def _run(args) -> int:
    from .scenarios import run_scenario

    overrides = {
        "mode": args.mode,
        "sphere_resolution": args.sphere_resolution,
        "tol": args.tol,
        "dense_cap": args.dense_cap,
        "arnoldi_k": args.arnoldi_k,
    }
    report = run_scenario(args.config, args.outdir, overrides)
    print(json.dumps({"scenario": report.scenario_id, "report": str(report.report_json), **report.summary},
                     sort_keys=True))
    for w in report.warnings:
        print(f"warning: {w}", file=sys.stderr)
    return EXIT_OK


def _verify(args) -> int:
    from .acceptance import CRITERIA, run_criterion

    numbers = args.criteria or sorted(CRITERIA)
    unknown = [n for n in numbers if n not in CRITERIA]
    if unknown:
        print(f"error: unknown criteria {unknown}", file=sys.stderr)
        return EXIT_CONFIG
    failed = 0
    for n in numbers:
        res = run_criterion(n)
        print(res.line(), flush=True)
        failed += not res.passed
    return EXIT_ACCEPTANCE if failed else EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "list-scenarios":
            from .scenarios import list_scenarios

            print("\n".join(list_scenarios()))
            return EXIT_OK
        if args.command == "run":
            return _run(args)
        return _verify(args)
    except ViespecError as e:
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
