"""End-to-end runs: parse, build, reduce, sample, select, and the threshold sweep."""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from enum import Enum
from pathlib import Path

from .baseline import GreedyTrace, greedy_unfold
from .errors import UnfolderError
from .geometry import (
    TorsionAssignment,
    exhaustive_optimum,
    make_angle_table,
    objective_volume,
)
from .hubo import A_CONST_RULES, build_hubo
from .molio import (
    Molecule,
    build_torsion_graph,
    find_rotatable_bonds,
    load_molecule,
    select_median_atoms,
    strip_terminal_hydrogens,
)
from .quadratize import QuboModel, to_qubo
from .solver import AnnealParams, SampleSet, _gain, select_best, simulated_anneal

log = logging.getLogger(__name__)

__all__ = [
    "Mode",
    "RunConfig",
    "MethodResult",
    "RunReport",
    "PipelineError",
    "run_pipeline",
    "run_on_molecule",
    "threshold_sweep",
    "sweep_csv",
    "SWEEP_HEADER",
]

SWEEP_HEADER = ("threshold", "gain_percent", "hubo_terms", "construction_seconds")


class Mode(str, Enum):
    QUANTUM = "quantum_pipeline"
    GREEDY = "greedy_baseline"
    BOTH = "both"
    BRUTE_FORCE = "brute_force"


class PipelineError(UnfolderError):
    """A failure tagged with the phase it happened in."""

    def __init__(self, phase: str, cause: BaseException):
        super().__init__(f"{phase}: {cause}")
        self.phase = phase
        self.cause = cause
        self.report: RunReport | None = None

    def to_dict(self) -> dict:
        return {"error": type(self.cause).__name__, "phase": self.phase, "message": str(self.cause)}


@dataclass(frozen=True)
class RunConfig:
    input: str
    d: int = 8
    intermediate_threshold: float = 0.5
    final_threshold: float = 0.5
    a_const_factor: float = 1.1
    a_const_rule: str = "group_bound"
    anneal: AnnealParams = field(default_factory=AnnealParams)
    top_k: int = 10
    mode: Mode = Mode.QUANTUM
    greedy_passes: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode(self.mode))
        if self.d < 2:
            raise ValueError(f"d must be >= 2, got {self.d}")
        for name in ("intermediate_threshold", "final_threshold"):
            t = getattr(self, name)
            if not 0.0 <= t < 1.0:
                raise ValueError(f"{name} must lie in [0, 1), got {t}")
        if self.a_const_factor <= 1.0:
            raise ValueError("a_const_factor must exceed 1")
        if self.a_const_rule not in A_CONST_RULES:
            raise ValueError(f"a_const_rule must be one of {A_CONST_RULES}, got {self.a_const_rule!r}")
        if self.top_k < 1:
            raise ValueError("top_k must be >= 1")

    def to_dict(self) -> dict:
        out = asdict(self)
        out["mode"] = self.mode.value
        return out


@dataclass
class MethodResult:
    theta: tuple[int, ...]
    volume_initial: float
    volume_final: float
    gain_percent: float
    extra: dict = field(default_factory=dict)


@dataclass
class RunReport:
    molecule: str
    n_torsions: int
    n_atoms: int
    config: dict
    terms: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)
    methods: dict[str, MethodResult] = field(default_factory=dict)
    error: dict | None = None
    # heavy artifacts kept for export, left out of the JSON form
    qubo: QuboModel | None = field(default=None, repr=False)
    samples: SampleSet | None = field(default=None, repr=False)
    trace: GreedyTrace | None = field(default=None, repr=False)

    @property
    def construction_seconds(self) -> float:
        return self.timings.get("hubo", 0.0) + self.timings.get("quadratize", 0.0)

    @property
    def gain_percent(self) -> float | None:
        """Headline gain: the annealing pipeline when it ran, else the first method."""
        if Mode.QUANTUM.value in self.methods:
            return self.methods[Mode.QUANTUM.value].gain_percent
        for r in self.methods.values():
            return r.gain_percent
        return None

    def to_dict(self) -> dict:
        return {
            "molecule": self.molecule,
            "n_torsions": self.n_torsions,
            "n_atoms": self.n_atoms,
            "terms": self.terms,
            "timings": self.timings,
            "methods": {k: asdict(v) for k, v in self.methods.items()},
            "error": self.error,
            "config": self.config,
        }

    def table(self) -> str:
        lines = [
            f"molecule      {self.molecule}",
            f"atoms         {self.n_atoms} (heavy)",
            f"torsions      {self.n_torsions}",
        ]
        for k, v in self.terms.items():
            lines.append(f"{k:<13} {v}")
        for k, v in self.timings.items():
            lines.append(f"time {k:<11} {v:.3f} s")
        if self.methods:
            lines.append(f"{'method':<18}{'gain %':>10}  theta")
            for name, r in self.methods.items():
                lines.append(f"{name:<18}{r.gain_percent:>10.3f}  {list(r.theta)}")
        if self.error:
            lines.append(f"error in {self.error['phase']}: {self.error['message']}")
        return "\n".join(lines)


def _phase(name, timings, fn, *args, **kwargs):
    t0 = time.perf_counter()
    try:
        return fn(*args, **kwargs)
    except UnfolderError as exc:
        raise PipelineError(name, exc) from exc
    except (ValueError, OSError) as exc:
        raise PipelineError(name, exc) from exc
    finally:
        timings[name] = timings.get(name, 0.0) + time.perf_counter() - t0


def _load(path: str, timings: dict) -> Molecule:
    return _phase("parse", timings, lambda: strip_terminal_hydrogens(load_molecule(path)))


def run_pipeline(cfg: RunConfig) -> RunReport:
    timings: dict[str, float] = {}
    mol = _load(cfg.input, timings)
    return run_on_molecule(cfg, mol, timings)


def run_on_molecule(cfg: RunConfig, mol: Molecule, timings: dict | None = None) -> RunReport:
    """Everything after parsing; ``mol`` must already be hydrogen-stripped."""
    timings = dict(timings or {})
    graph = _phase("torsions", timings, lambda: build_torsion_graph(mol, find_rotatable_bonds(mol)))
    table = _phase("torsions", timings, make_angle_table, cfg.d)
    report = RunReport(mol.name, graph.n, mol.n_atoms, cfg.to_dict(), timings=timings)
    try:
        _run_methods(cfg, mol, graph, table, report)
    except PipelineError as exc:
        report.error = exc.to_dict()
        exc.report = report
        raise
    return report


def _run_methods(cfg, mol, graph, table, report):
    timings = report.timings
    d0 = objective_volume(mol, graph, TorsionAssignment.folded(graph.n, table.d), table)

    def result(theta, extra=None):
        vol = objective_volume(mol, graph, theta, table)
        extra = {"angles_deg": [math.degrees(a) for a in theta.radians(table)], **(extra or {})}
        return MethodResult(theta.angle_index, d0, vol, _gain(d0, vol), extra)

    if cfg.mode in (Mode.QUANTUM, Mode.BOTH):
        subset = _phase("hubo", timings, select_median_atoms, graph, mol)
        build = _phase(
            "hubo", timings, build_hubo, mol, graph, table, subset,
            cfg.intermediate_threshold, cfg.final_threshold, None, cfg.a_const_factor,
            cfg.a_const_rule,
        )
        q = _phase("quadratize", timings, to_qubo, build.hubo)
        report.terms = {
            "hubo_raw": build.raw_terms,
            "hubo": build.hubo.num_terms,
            "hubo_degree": build.hubo.degree,
            "qubo": q.poly.num_terms,
            "qubo_vars": q.num_vars,
            "aux_vars": len(q.aux_defs),
            "a_const": build.a_const,
        }
        report.qubo = q
        samples = _phase("sample", timings, simulated_anneal, q, cfg.anneal)
        report.samples = samples
        best = _phase("select", timings, select_best, samples, cfg.top_k, mol, graph, table)
        report.methods[Mode.QUANTUM.value] = result(
            best.theta, {"energy": best.energy, "feasible_samples": best.feasible_count}
        )

    if cfg.mode in (Mode.GREEDY, Mode.BOTH):
        theta, trace = _phase("baseline", timings, greedy_unfold, mol, graph, table, cfg.greedy_passes)
        report.trace = trace
        report.methods[Mode.GREEDY.value] = result(theta, {"passes": trace.passes})

    if cfg.mode is Mode.BRUTE_FORCE:
        theta, _ = _phase("brute_force", timings, exhaustive_optimum, mol, graph, table)
        report.methods[Mode.BRUTE_FORCE.value] = result(theta)


def _sweep_one(args):
    cfg, mol, parse_seconds = args
    try:
        return run_on_molecule(cfg, mol, {"parse": parse_seconds})
    except PipelineError as exc:
        log.warning("threshold %s failed in %s: %s", cfg.final_threshold, exc.phase, exc.cause)
        if exc.report is not None:
            return exc.report
        report = RunReport(mol.name, 0, mol.n_atoms, cfg.to_dict(), timings={"parse": parse_seconds})
        report.error = exc.to_dict()
        return report


def threshold_sweep(cfg: RunConfig, thresholds, workers: int = 1) -> list[RunReport]:
    """One run per final threshold over a single parse, sorted by threshold.

    The intermediate threshold stays as configured.  Entry ``i`` (in sorted
    order) anneals with seed ``base + (i << 32)`` so entries never share a
    random stream, and entry 0 reproduces a plain :func:`run_pipeline` call.
    Failures are stored on the report instead of aborting the sweep.
    """
    thresholds = sorted(float(t) for t in thresholds)
    if not thresholds:
        raise ValueError("need at least one threshold")
    for t in thresholds:
        if not 0.0 <= t < 1.0:
            raise ValueError(f"threshold must lie in [0, 1), got {t}")
    timings: dict[str, float] = {}
    mol = _load(cfg.input, timings)
    base = cfg.anneal.seed
    jobs = [
        (replace(cfg, final_threshold=t, anneal=replace(cfg.anneal, seed=(base + (i << 32)) % (1 << 64))),
         mol, timings["parse"])
        for i, t in enumerate(thresholds)
    ]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_sweep_one, jobs))
    return [_sweep_one(j) for j in jobs]


def sweep_csv(reports) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_HEADER)
    for r in sorted(reports, key=lambda r: r.config["final_threshold"]):
        gain = r.gain_percent
        w.writerow([
            r.config["final_threshold"],
            "" if gain is None else repr(gain),
            r.terms.get("hubo", ""),
            repr(r.construction_seconds),
        ])
    return buf.getvalue()


def write_artifacts(reports, out: str | Path, sweep: bool = False) -> list[Path]:
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    if sweep:
        p = out / "sweep.csv"
        p.write_text(sweep_csv(reports))
        written.append(p)
        p = out / "sweep.json"
        p.write_text(json.dumps([r.to_dict() for r in reports], indent=2))
        written.append(p)
        return written
    (report,) = reports
    p = out / "report.json"
    p.write_text(json.dumps(report.to_dict(), indent=2))
    written.append(p)
    if report.samples is not None:
        p = out / "samples.jsonl"
        p.write_text(report.samples.to_jsonl())
        written.append(p)
    if report.trace is not None:
        p = out / "greedy_trace.csv"
        p.write_text(report.trace.to_csv())
        written.append(p)
    return written
