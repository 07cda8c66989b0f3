"""Greedy coordinate-ascent reference over the same discrete angle grid."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

from .geometry import AngleTable, TorsionAssignment, objective_volume
from .molio import Molecule, TorsionGraph

__all__ = ["GreedyStep", "GreedyTrace", "greedy_unfold"]


@dataclass(frozen=True)
class GreedyStep:
    torsion: int
    angle: int
    objective: float


@dataclass
class GreedyTrace:
    """One entry per visited torsion, in visiting order."""

    steps: list[GreedyStep] = field(default_factory=list)
    passes: int = 0

    def __len__(self):
        return len(self.steps)

    def objectives(self) -> list[float]:
        return [s.objective for s in self.steps]

    def is_monotone(self) -> bool:
        obj = self.objectives()
        return all(b >= a for a, b in zip(obj, obj[1:]))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["step", "torsion", "angle", "objective"])
        for i, s in enumerate(self.steps, 1):
            w.writerow([i, s.torsion, s.angle, repr(s.objective)])
        return buf.getvalue()


def greedy_unfold(mol: Molecule, graph: TorsionGraph, table: AngleTable,
                  passes: int | None = None) -> tuple[TorsionAssignment, GreedyTrace]:
    """Sweep torsions in index order, moving each to its best angle with the rest held.

    Starts from the folded state (every index 1).  The current angle is kept
    unless another one is strictly better, and among equal improvements the
    lowest index wins, so the objective never decreases.  Stops after
    ``passes`` sweeps (default ``n``) or after a sweep that changes nothing.
    """
    n, d = graph.n, table.d
    passes = n if passes is None else passes
    trace = GreedyTrace()
    current = [1] * n
    if n == 0:
        return TorsionAssignment((), d), trace
    if passes < 1:
        raise ValueError("passes must be >= 1")

    def score(angles):
        return objective_volume(mol, graph, TorsionAssignment(tuple(angles), d), table)

    best_val = score(current)
    for _ in range(passes):
        trace.passes += 1
        changed = False
        for i in range(n):
            pick, pick_val = current[i], best_val
            for k in range(1, d + 1):
                if k == current[i]:
                    continue
                trial = current.copy()
                trial[i] = k
                val = score(trial)
                if val > pick_val or (val == pick_val and k < pick):
                    pick, pick_val = k, val
            if pick != current[i]:
                changed = True
                current[i] = pick
                best_val = pick_val
            trace.steps.append(GreedyStep(i + 1, pick, best_val))
        if not changed:
            break
    return TorsionAssignment(tuple(current), d), trace
