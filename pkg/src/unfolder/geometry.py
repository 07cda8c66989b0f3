"""Torsion-angle geometry: axis rotations, chain composition and the unfolding objective.

A torsion assignment picks one discrete angle per rotatable bond.  Torsion
``t`` with endpoints ``(a1, a2)`` turns the ``a2`` side by ``theta`` about the
directed line ``a1 -> a2`` relative to the ``a1`` side.  Whole-molecule
coordinates hold fragment 0 (the one containing atom 0) fixed.

Rotations are always built from the original bond coordinates; a chain of
torsions ``t1, ..., tk`` walked outward from a fixed atom composes as the
plain left-to-right product ``R(t1) @ ... @ R(tk)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import reduce

import numpy as np

from .errors import DegenerateAxis, EmptyChain, IndexOutOfRange, InvalidDiscretization, ZeroBaseline
from .molio import Molecule, TorsionGraph

AXIS_TOL = 1e-12
_SNAP = 1e-15


@dataclass(frozen=True)
class AngleTable:
    """``d`` equally spaced torsion angles starting at 0, with their sines and cosines.

    Sine and cosine values within 1e-15 of zero are stored as exactly zero so
    that symbolic expansions do not carry round-off monomials.
    """

    d: int
    angles: tuple[float, ...]
    sin_values: tuple[float, ...]
    cos_values: tuple[float, ...]

    def angle(self, k: int) -> float:
        """Angle for the 1-based index ``k``."""
        return self.angles[k - 1]

    def degrees(self) -> list[float]:
        return [math.degrees(a) for a in self.angles]


def make_angle_table(d: int) -> AngleTable:
    if not isinstance(d, (int, np.integer)) or d < 2:
        raise InvalidDiscretization(f"need at least 2 discrete angles, got {d!r}")
    angles = tuple(2.0 * math.pi * k / d for k in range(d))

    def snap(v):
        return 0.0 if abs(v) < _SNAP else v

    return AngleTable(
        int(d),
        angles,
        tuple(snap(math.sin(a)) for a in angles),
        tuple(snap(math.cos(a)) for a in angles),
    )


@dataclass(frozen=True)
class TorsionAssignment:
    """Chosen angle index per torsion, 1-based (``angle_index[i-1]`` is for torsion ``i``)."""

    angle_index: tuple[int, ...]
    d: int

    def __post_init__(self):
        object.__setattr__(self, "angle_index", tuple(int(k) for k in self.angle_index))
        for i, k in enumerate(self.angle_index, 1):
            if not 1 <= k <= self.d:
                raise IndexOutOfRange(f"torsion {i}: angle index {k} outside 1..{self.d}")

    @classmethod
    def folded(cls, n: int, d: int) -> "TorsionAssignment":
        return cls((1,) * n, d)

    def __len__(self):
        return len(self.angle_index)

    def __bool__(self):
        # decode() results are tested for truth; the empty assignment is still valid
        return True

    def radians(self, table: AngleTable) -> list[float]:
        return [table.angle(k) for k in self.angle_index]


def rotation_parts(a1, a2) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Split the axis-rotation matrix into ``A + B*cos(theta) + C*sin(theta)``.

    Entries follow the closed-form 4x4 rotation about the line through ``a1``
    with direction ``l = a2 - a1`` (translation column included).  Keeping the
    three parts separate lets the symbolic layer substitute one-hot sums for
    the cosine and sine.
    """
    x1, y1, z1 = (float(c) for c in a1)
    lx, ly, lz = (float(q) - float(p) for p, q in zip(a1, a2))
    l2 = lx * lx + ly * ly + lz * lz
    l = math.sqrt(l2)
    if l <= AXIS_TOL:
        raise DegenerateAxis(f"axis endpoints coincide: {tuple(a1)} vs {tuple(a2)}")

    # (1 - c) multipliers: appear in A with +, in B with -
    tx = x1 * (ly * ly + lz * lz) - lx * (y1 * ly + z1 * lz)
    ty = y1 * (lx * lx + lz * lz) - ly * (x1 * lx + z1 * lz)
    tz = z1 * (lx * lx + ly * ly) - lz * (x1 * lx + y1 * ly)
    outer = np.array(
        [
            [lx * lx, lx * ly, lx * lz, tx],
            [lx * ly, ly * ly, ly * lz, ty],
            [lx * lz, ly * lz, lz * lz, tz],
            [0.0, 0.0, 0.0, 0.0],
        ]
    )
    A = outer / l2
    A[3, 3] = 1.0
    B = np.zeros((4, 4))
    B[:3, :3] = np.eye(3) - outer[:3, :3] / l2
    B[:3, 3] = -outer[:3, 3] / l2
    C = np.array(
        [
            [0.0, -lz, ly, y1 * lz - z1 * ly],
            [lz, 0.0, -lx, z1 * lx - x1 * lz],
            [-ly, lx, 0.0, x1 * ly - y1 * lx],
            [0.0, 0.0, 0.0, 0.0],
        ]
    ) / l
    return A, B, C


def rotation_matrix(a1, a2, theta: float) -> np.ndarray:
    """Homogeneous 4x4 rotation by ``theta`` (radians) about the line a1 -> a2."""
    A, B, C = rotation_parts(a1, a2)
    return A + B * math.cos(theta) + C * math.sin(theta)


def compose_chain(mats) -> np.ndarray:
    mats = list(mats)
    if not mats:
        raise EmptyChain("cannot compose an empty rotation chain")
    return reduce(np.matmul, mats)


def torsion_rotation(mol: Molecule, graph: TorsionGraph, index: int, theta: float, sign: int = 1):
    t = graph.torsion(index)
    return rotation_matrix(mol.atoms[t.a1].position, mol.atoms[t.a2].position, sign * theta)


def fragment_transforms(mol: Molecule, graph: TorsionGraph, theta: TorsionAssignment,
                        table: AngleTable, anchor: int | None = None) -> list[np.ndarray]:
    """Rigid transform of every fragment with ``anchor`` (default the root) held fixed."""
    if len(theta) != graph.n:
        raise IndexOutOfRange(f"assignment has {len(theta)} angles for {graph.n} torsions")
    if theta.d != table.d:
        raise IndexOutOfRange(f"assignment uses d={theta.d} but table has d={table.d}")
    anchor = graph.root if anchor is None else anchor
    n_frag = len(graph.fragments)
    out: list[np.ndarray | None] = [None] * n_frag
    out[anchor] = np.eye(4)
    stack = [anchor]
    while stack:
        f = stack.pop()
        for nb, idx in graph.tree[f].items():
            if out[nb] is not None:
                continue
            t = graph.torsion(idx)
            sign = 1 if graph.fragment_of[t.a1] == f else -1
            rot = torsion_rotation(mol, graph, idx, table.angle(theta.angle_index[idx - 1]), sign)
            out[nb] = out[f] @ rot
            stack.append(nb)
    # fragments unreachable from the anchor (disconnected input) stay put
    return [np.eye(4) if m is None else m for m in out]


def apply_torsions(mol: Molecule, graph: TorsionGraph, theta: TorsionAssignment,
                   table: AngleTable) -> np.ndarray:
    """New (n_atoms, 3) coordinates after applying ``theta`` with the root fragment fixed."""
    pos = mol.positions()
    if pos.size == 0:
        return pos
    mats = fragment_transforms(mol, graph, theta, table)
    homo = np.c_[pos, np.ones(len(pos))]
    out = np.empty_like(pos)
    for fi, frag in enumerate(graph.fragments):
        idx = np.fromiter(frag, dtype=int)
        out[idx] = (homo[idx] @ mats[fi].T)[:, :3]
    return out


def pair_distance_sq(u_pos, v0, r: np.ndarray) -> float:
    """``|u - R v0|^2`` with ``u`` held fixed and ``v0`` moved by ``r``."""
    moved = r[:3, :3] @ np.asarray(v0, dtype=float) + r[:3, 3]
    diff = np.asarray(u_pos, dtype=float) - moved
    return float(diff @ diff)


def eligible_pairs(graph: TorsionGraph, atom_subset=None) -> list[tuple[int, int]]:
    if atom_subset is None:
        return sorted(graph.pair_chains)
    keep = set(atom_subset)
    return sorted(p for p in graph.pair_chains if p[0] in keep and p[1] in keep)


def objective_volume(mol: Molecule, graph: TorsionGraph, theta: TorsionAssignment,
                     table: AngleTable, atom_subset=None) -> float:
    """Sum of squared distances over eligible atom pairs (all atoms when ``atom_subset`` is None)."""
    pairs = eligible_pairs(graph, atom_subset)
    if not pairs:
        return 0.0
    pos = apply_torsions(mol, graph, theta, table)
    u, v = np.array(pairs).T
    diff = pos[u] - pos[v]
    return float(np.einsum("ij,ij->", diff, diff))


def volume_gain_percent(d_initial: float, d_final: float) -> float:
    if d_initial <= 0:
        raise ZeroBaseline(f"initial objective must be positive, got {d_initial}")
    return 100.0 * (d_final - d_initial) / d_initial


def exhaustive_optimum(mol: Molecule, graph: TorsionGraph, table: AngleTable,
                       atom_subset=None) -> tuple[TorsionAssignment, float]:
    """Scan the full ``d**n`` grid; ties go to the lexicographically smallest assignment."""
    import itertools

    best, best_val = None, -math.inf
    for combo in itertools.product(range(1, table.d + 1), repeat=graph.n):
        theta = TorsionAssignment(combo, table.d)
        val = objective_volume(mol, graph, theta, table, atom_subset)
        if val > best_val:
            best, best_val = theta, val
    return best, best_val
