"""Command-line runner: ``elltriv run scenario.json``.

Exit codes: 0 all checks pass, 1 a check failed, 2 invalid input,
3 numerical failure (indeterminate rank, contour or pole trouble).
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
import time

from . import __version__
from .errors import ConstructionError, ContourError, IndeterminateError, PoleError, StripError
from .pipelines import emit_samples, run_pipeline
from .scenario import ScenarioError, load_scenario

log = logging.getLogger("elltriv")

EXIT_OK, EXIT_FAILED, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2, 3
NUMERIC_ERRORS = (IndeterminateError, ContourError, PoleError, StripError, ConstructionError)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="elltriv", description="Run elliptic-curve interpolation scenarios.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run one scenario file")
    run.add_argument("scenario", help="path to a scenario JSON file")
    run.add_argument("--out", help="write the JSON report here instead of stdout")
    run.add_argument("--samples", help="write CSV samples of the function named in the scenario")
    run.add_argument("--seed", type=int, help="override the scenario seed")
    run.add_argument("--tol", type=float, help="override every check threshold")
    run.add_argument("--timings", action="store_true", help="include wall-clock timings in the report")
    return parser


def _write_samples(path: str, sc, result) -> dict:
    spec = sc.samples or {}
    name = spec.get("function")
    if name is None:
        raise ScenarioError("--samples needs a 'samples' block naming a function")
    if name not in result.functions:
        known = ", ".join(sorted(result.functions)) or "none"
        raise ScenarioError(f"unknown sample function {name!r}; available: {known}")
    header, rows, omitted = emit_samples(result.functions[name], tuple(spec.get("grid", (50, 50))),
                                         spec.get("margin", sc.config.pole_margin))
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows.tolist())
    return {"function": name, "rows": int(rows.shape[0]), "omitted_near_poles": omitted, "path": path}


def run(args) -> int:
    t0 = time.perf_counter()
    sc = load_scenario(args.scenario, args.seed)
    result = run_pipeline(sc, args.tol)
    elapsed = time.perf_counter() - t0
    report = {
        "pipeline": sc.pipeline,
        "scenario": sc.raw,
        "seed": sc.seed,
        "config": sc.config.to_dict(),
        "tol_override": args.tol,
        "results": result.results,
        "checks": result.checks,
        "pass": result.ok,
    }
    if args.samples:
        report["samples"] = _write_samples(args.samples, sc, result)
    if args.timings:
        report["timings"] = {"total_seconds": elapsed}
    text = json.dumps(report, sort_keys=True, indent=2)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    for c in result.checks:
        log.info("%s %s", "PASS" if c["pass"] else "FAIL", c["name"])
    return EXIT_OK if result.ok else EXIT_FAILED


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return run(args)
    except NUMERIC_ERRORS as exc:
        print(f"elltriv: numerical failure ({type(exc).__name__}): {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ScenarioError, ValueError) as exc:
        print(f"elltriv: invalid input: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
