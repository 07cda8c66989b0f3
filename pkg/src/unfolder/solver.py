"""Sampling and decoding: simulated annealing, exhaustive search, top-k selection."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .errors import NoFeasibleSample, TooManyVariables
from .geometry import AngleTable, TorsionAssignment, objective_volume, volume_gain_percent
from .molio import Molecule, TorsionGraph
from .polynomial import BinaryPolynomial, BinaryVar, evaluate
from .quadratize import QuboModel

__all__ = [
    "AnnealParams",
    "Sample",
    "SampleSet",
    "UnfoldResult",
    "Infeasible",
    "simulated_anneal",
    "brute_force",
    "decode",
    "select_best",
    "default_beta_range",
]

MAX_BRUTE_FORCE_VARS = 26


@dataclass(frozen=True)
class AnnealParams:
    """Annealer settings; ``beta_start``/``beta_end`` of None are derived from the QUBO scale."""

    sweeps: int = 1000
    reads: int = 100
    beta_start: float | None = None
    beta_end: float | None = None
    seed: int = 0

    def __post_init__(self):
        if self.sweeps < 1 or self.reads < 1:
            raise ValueError("sweeps and reads must be >= 1")
        if self.beta_start is not None and self.beta_start <= 0:
            raise ValueError("beta_start must be positive")
        if self.beta_start is not None and self.beta_end is not None and not self.beta_start < self.beta_end:
            raise ValueError("need beta_start < beta_end")


@dataclass(frozen=True)
class Sample:
    state: tuple[int, ...]
    energy: float
    feasible: bool

    def bitstring(self) -> str:
        return "".join(map(str, self.state))


@dataclass
class SampleSet:
    """Samples over ``variables`` sorted by ascending energy (stable)."""

    variables: tuple[BinaryVar, ...]
    samples: list[Sample] = field(default_factory=list)

    def __len__(self):
        return len(self.samples)

    def __iter__(self):
        return iter(self.samples)

    @property
    def first(self) -> Sample:
        return self.samples[0]

    def assignment(self, sample: Sample) -> dict:
        return dict(zip(self.variables, sample.state))

    def to_jsonl(self) -> str:
        return "".join(
            json.dumps({"assignment": s.bitstring(), "energy": s.energy, "feasible": s.feasible}) + "\n"
            for s in self.samples
        )

    @classmethod
    def from_jsonl(cls, variables, text: str) -> "SampleSet":
        samples = []
        for line in text.splitlines():
            if line.strip():
                rec = json.loads(line)
                samples.append(Sample(tuple(int(ch) for ch in rec["assignment"]), float(rec["energy"]), bool(rec["feasible"])))
        return cls(tuple(variables), samples)


@dataclass(frozen=True)
class Infeasible:
    """Decode failure naming the torsion groups that are not exactly one-hot."""

    groups: tuple[int, ...]

    def __bool__(self):
        return False


@dataclass(frozen=True)
class UnfoldResult:
    theta: TorsionAssignment
    volume_initial: float
    volume_final: float
    gain_percent: float
    energy: float
    feasible_count: int


def decode(assignment, n: int, d: int) -> TorsionAssignment | Infeasible:
    bad = []
    picks = []
    for i in range(1, n + 1):
        ones = [k for k in range(1, d + 1) if assignment[BinaryVar.onehot(i, k)]]
        if len(ones) != 1:
            bad.append(i)
        else:
            picks.append(ones[0])
    if bad:
        return Infeasible(tuple(bad))
    return TorsionAssignment(tuple(picks), d)


def _onehot_groups(variables) -> list[np.ndarray]:
    groups: dict[int, list[int]] = {}
    for pos, v in enumerate(variables):
        if not v.is_aux:
            groups.setdefault(v.torsion, []).append(pos)
    return [np.array(g) for _, g in sorted(groups.items())]


def _feasible_mask(states: np.ndarray, groups) -> np.ndarray:
    ok = np.ones(len(states), dtype=bool)
    for g in groups:
        ok &= states[:, g].sum(axis=1) == 1
    return ok


def brute_force(p: BinaryPolynomial) -> tuple[dict, float]:
    """Exact minimum by enumeration.

    States are enumerated as integers with the first variable (canonical
    order) as the least significant bit; among equal minima the first
    enumerated state wins.
    """
    variables = p.variables()
    nv = len(variables)
    if nv > MAX_BRUTE_FORCE_VARS:
        raise TooManyVariables(f"{nv} variables exceeds the brute-force limit of {MAX_BRUTE_FORCE_VARS}")
    if nv == 0:
        return {}, p.constant
    pos = {v: j for j, v in enumerate(variables)}
    masks = np.array([sum(1 << pos[v] for v in mono) for mono in p.terms], dtype=np.int64)
    coefs = np.array(list(p.terms.values()))
    total = 1 << nv
    chunk = min(total, 1 << 18)
    best_s, best_e = 0, math.inf
    for lo in range(0, total, chunk):
        s = np.arange(lo, min(total, lo + chunk), dtype=np.int64)
        e = np.full(len(s), p.constant)
        for m, c in zip(masks, coefs):
            e += c * ((s & m) == m)
        j = int(np.argmin(e))
        if e[j] < best_e:
            best_e, best_s = float(e[j]), int(s[j])
    assignment = {v: (best_s >> j) & 1 for j, v in enumerate(variables)}
    return assignment, evaluate(p, assignment)


def default_beta_range(q: QuboModel) -> tuple[float, float]:
    """Hot end accepts the largest single-flip change with probability 1/2,
    cold end rejects the smallest nonzero change with probability 99/100."""
    _, h, J = q.matrices()
    field_bound = np.abs(h) + np.abs(J).sum(axis=1)
    max_delta = float(field_bound.max(initial=0.0))
    coefs = np.abs(np.concatenate([h, J[np.triu_indices_from(J, 1)]]))
    coefs = coefs[coefs > 0]
    if max_delta == 0 or coefs.size == 0:
        return 0.1, 1.0
    min_delta = float(coefs.min())
    hot = math.log(2) / max_delta
    cold = math.log(100) / min_delta
    return hot, max(cold, hot * 10)


@njit(cache=True)
def _anneal_read(h, indptr, indices, data, x, betas, uniforms):
    n = h.shape[0]
    local = h.copy()
    for i in range(n):
        if x[i]:
            for p in range(indptr[i], indptr[i + 1]):
                local[indices[p]] += data[p]
    for s in range(betas.shape[0]):
        beta = betas[s]
        for i in range(n):
            delta = local[i] if x[i] == 0 else -local[i]
            if delta <= 0.0 or uniforms[s, i] < math.exp(-beta * delta):
                if x[i] == 0:
                    x[i] = 1
                    sign = 1.0
                else:
                    x[i] = 0
                    sign = -1.0
                for p in range(indptr[i], indptr[i + 1]):
                    local[indices[p]] += sign * data[p]
    return x


def _csr(J: np.ndarray):
    n = len(J)
    indptr = np.zeros(n + 1, dtype=np.int64)
    rows = [np.flatnonzero(J[i]) for i in range(n)]
    indptr[1:] = np.cumsum([len(r) for r in rows])
    indices = np.concatenate(rows).astype(np.int64) if n else np.zeros(0, dtype=np.int64)
    data = np.concatenate([J[i, r] for i, r in enumerate(rows)]) if n else np.zeros(0)
    return indptr, indices, data


def simulated_anneal(q: QuboModel, params: AnnealParams) -> SampleSet:
    """Independent single-flip Metropolis chains on a geometric beta schedule.

    Read ``r`` draws from its own generator seeded with ``seed + r``, so
    results are reproducible and do not depend on how many reads run.
    """
    variables = q.variables
    offset, h, J = q.matrices()
    n = len(variables)
    if n == 0:
        return SampleSet((), [Sample((), offset, True)] * params.reads)
    hot, cold = default_beta_range(q)
    b0 = params.beta_start if params.beta_start is not None else hot
    b1 = params.beta_end if params.beta_end is not None else max(cold, b0 * 10)
    betas = np.geomspace(b0, b1, params.sweeps) if params.sweeps > 1 else np.array([b1])
    indptr, indices, data = _csr(J)

    states = np.empty((params.reads, n), dtype=np.int8)
    for r in range(params.reads):
        rng = np.random.default_rng((params.seed + r) % (1 << 64))
        x = rng.integers(0, 2, size=n).astype(np.int8)
        uniforms = rng.random((params.sweeps, n))
        states[r] = _anneal_read(h, indptr, indices, data, x, betas, uniforms)

    energies = q.energies(states)
    feasible = _feasible_mask(states, _onehot_groups(variables))
    order = np.argsort(energies, kind="stable")
    samples = [Sample(tuple(int(b) for b in states[i]), float(energies[i]), bool(feasible[i])) for i in order]
    return SampleSet(variables, samples)


def _gain(d0: float, d1: float) -> float:
    if d0 == 0 and d1 == 0:
        return 0.0
    return volume_gain_percent(d0, d1)


def select_best(samples: SampleSet, k: int, mol: Molecule, graph: TorsionGraph,
                table: AngleTable) -> UnfoldResult:
    """Among the ``k`` lowest-energy distinct feasible configurations, keep the one
    with the largest full-molecule objective."""
    if k < 1:
        raise ValueError("k must be >= 1")
    n, d = graph.n, table.d
    feasible_count = 0
    candidates: list[tuple[TorsionAssignment, float]] = []
    seen = set()
    for s in samples:
        if not s.feasible:
            continue
        theta = decode(samples.assignment(s), n, d)
        if not theta:
            continue
        feasible_count += 1
        if theta.angle_index in seen or len(candidates) >= k:
            continue
        seen.add(theta.angle_index)
        candidates.append((theta, s.energy))
    if not candidates:
        raise NoFeasibleSample(f"none of {len(samples)} samples satisfies the one-hot constraint")

    d0 = objective_volume(mol, graph, TorsionAssignment.folded(n, d), table)
    best = None
    for theta, energy in candidates:
        vol = objective_volume(mol, graph, theta, table)
        if best is None or vol > best[1]:
            best = (theta, vol, energy)
    theta, vol, energy = best
    return UnfoldResult(theta, d0, vol, _gain(d0, vol), energy, feasible_count)
