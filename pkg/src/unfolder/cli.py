"""Command-line entry point.

    unfolder --input ligand.mol2 --mode both --out results/
    unfolder --input ligand.mol2 --sweep 0.1 0.2 0.3 --out sweep/

Exit status is 0 on success and 1 on any pipeline failure, in which case a
JSON error object (with the failing phase) is printed to standard error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from .hubo import A_CONST_RULES
from .pipeline import (
    Mode,
    PipelineError,
    RunConfig,
    run_pipeline,
    sweep_csv,
    threshold_sweep,
    write_artifacts,
)
from .quadratize import dumps_qubo
from .solver import AnnealParams

SEED_ENV = "UNFOLDER_SEED"


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="unfolder", description="Torsion-angle unfolding of a ligand via HUBO/QUBO annealing.")
    p.add_argument("--input", required=True, help="mol2 or V2000 molfile")
    p.add_argument("--d", type=int, default=8, help="discrete angles per torsion")
    p.add_argument("--threshold", type=float, default=0.5, help="final pruning threshold")
    p.add_argument("--intermediate-threshold", type=float, default=0.5,
                   help="pruning threshold applied after each symbolic rotation")
    p.add_argument("--a-const-factor", type=float, default=1.1)
    p.add_argument("--a-const-rule", choices=A_CONST_RULES, default="group_bound",
                   help="what the one-hot penalty weight is scaled from")
    p.add_argument("--mode", choices=[m.value for m in Mode], default=Mode.QUANTUM.value)
    p.add_argument("--top-k", type=int, default=10)
    p.add_argument("--seed", type=int, default=None, help=f"annealer seed (falls back to ${SEED_ENV}, then 0)")
    p.add_argument("--sweeps", type=int, default=1000)
    p.add_argument("--reads", type=int, default=100)
    p.add_argument("--beta-start", type=float, default=None)
    p.add_argument("--beta-end", type=float, default=None)
    p.add_argument("--out", default=None, help="directory for JSON/CSV/JSONL artifacts")
    p.add_argument("--export-qubo", default=None, metavar="PATH", help="write the QUBO in text form")
    p.add_argument("--sweep", type=float, nargs="+", default=None, metavar="T",
                   help="run once per final threshold and emit the sweep CSV")
    p.add_argument("--workers", type=int, default=1, help="parallel sweep entries")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def _seed(arg: int | None) -> int:
    if arg is not None:
        return arg
    env = os.environ.get(SEED_ENV)
    if env:
        return int(env)
    return 0


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    anneal = AnnealParams(ns.sweeps, ns.reads, ns.beta_start, ns.beta_end, _seed(ns.seed))
    return RunConfig(
        input=ns.input,
        d=ns.d,
        intermediate_threshold=ns.intermediate_threshold,
        final_threshold=ns.threshold,
        a_const_factor=ns.a_const_factor,
        a_const_rule=ns.a_const_rule,
        anneal=anneal,
        top_k=ns.top_k,
        mode=Mode(ns.mode),
    )


def _fail(phase: str, exc: BaseException) -> int:
    print(json.dumps({"error": type(exc).__name__, "phase": phase, "message": str(exc)}), file=sys.stderr)
    return 1


def main(argv=None) -> int:
    ns = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if ns.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = config_from_args(ns)
    except ValueError as exc:
        return _fail("config", exc)

    if ns.sweep:
        try:
            reports = threshold_sweep(cfg, ns.sweep, workers=ns.workers)
        except PipelineError as exc:
            return _fail(exc.phase, exc.cause)
        except ValueError as exc:
            return _fail("config", exc)
        sys.stdout.write(sweep_csv(reports))
        if ns.out:
            write_artifacts(reports, ns.out, sweep=True)
        return 0

    try:
        report = run_pipeline(cfg)
    except PipelineError as exc:
        if ns.out and exc.report is not None:
            write_artifacts([exc.report], ns.out)
        return _fail(exc.phase, exc.cause)
    print(report.table())
    if ns.export_qubo and report.qubo is not None:
        with open(ns.export_qubo, "w") as fh:
            fh.write(dumps_qubo(report.qubo))
    if ns.out:
        write_artifacts([report], ns.out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
