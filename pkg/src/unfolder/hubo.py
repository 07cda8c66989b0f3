"""HUBO construction for molecular unfolding.

The objective minimised is::

    a_const * sum_i (sum_k x_ik - 1)^2  -  sum_(u,v) |u0 - R_uv(x) v0|^2

where ``x_ik`` selects angle ``k`` for torsion ``i`` and ``R_uv(x)`` is the
chain of torsion rotations between atoms ``u`` and ``v`` with cos/sin
replaced by one-hot sums.

Symbolic work is done on a packed representation: each monomial is a row of
uint64 words with bit ``(i-1)*d + (k-1)`` standing for ``x_ik``.  Products of
monomials become bitwise ORs, so multilinearity comes for free.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from numba import njit

from .errors import DegenerateAxis
from .geometry import AngleTable, eligible_pairs, make_angle_table, rotation_parts
from .molio import Molecule, TorsionBond, TorsionGraph
from .polynomial import BinaryPolynomial, BinaryVar, evaluate, prune

__all__ = [
    "AngleTable",
    "OneHotLayout",
    "SymbolicCoordinate",
    "HuboBuild",
    "make_angle_table",
    "build_hard_constraint",
    "symbolic_rotation",
    "symbolic_coordinates",
    "symbolic_frames",
    "build_distance_constraint",
    "assemble_hubo",
    "default_a_const",
    "group_bound_a_const",
    "A_CONST_RULES",
    "build_hubo",
    "prune",
    "evaluate",
    "degree_bound",
]

# products of sin/cos tables leave ~1e-17 residue where terms cancel exactly
_ROUNDOFF = 1e-12
_CHUNK = 1 << 22
# largest dense accumulator (float64 entries) used for the distance sum
_DENSE_LIMIT = 70_000_000


@dataclass(frozen=True)
class OneHotLayout:
    """Bit layout of the ``n * d`` one-hot variables."""

    n: int
    d: int

    @property
    def words(self) -> int:
        return max(1, -(-self.n * self.d // 64))

    def bit(self, torsion: int, angle: int) -> int:
        return (torsion - 1) * self.d + (angle - 1)

    def mask(self, torsion: int, angle: int) -> np.ndarray:
        b = self.bit(torsion, angle)
        m = np.zeros((1, self.words), dtype=np.uint64)
        m[0, b // 64] = np.uint64(1) << np.uint64(b % 64)
        return m

    def zero_keys(self, rows: int = 1) -> np.ndarray:
        return np.zeros((rows, self.words), dtype=np.uint64)

    def variable(self, bit: int) -> BinaryVar:
        return BinaryVar.onehot(bit // self.d + 1, bit % self.d + 1)

    def monomials(self, keys: np.ndarray) -> list[tuple]:
        if len(keys) == 0:
            return []
        bits = np.unpackbits(
            np.ascontiguousarray(keys).view(np.uint8).reshape(len(keys), -1), axis=1, bitorder="little"
        )
        names = [self.variable(b) for b in range(bits.shape[1])]
        return [tuple(names[b] for b in np.flatnonzero(row)) for row in bits]

    def pack(self, poly: BinaryPolynomial) -> tuple[np.ndarray, np.ndarray]:
        keys = self.zero_keys(len(poly.terms) + 1)
        coef = np.empty(len(poly.terms) + 1)
        coef[0] = poly.constant
        for row, (mono, c) in enumerate(poly.terms.items(), 1):
            for v in mono:
                if v.is_aux:
                    raise ValueError("auxiliary variables have no one-hot bit")
                b = self.bit(v.torsion, v.angle)
                keys[row, b // 64] |= np.uint64(1) << np.uint64(b % 64)
            coef[row] = c
        return keys, coef

    def unpack(self, keys: np.ndarray, coef: np.ndarray) -> BinaryPolynomial:
        const = 0.0
        terms = {}
        for mono, c in zip(self.monomials(keys), coef.tolist()):
            if c == 0.0:
                continue
            if mono:
                terms[mono] = terms.get(mono, 0.0) + c
            else:
                const += c
        return BinaryPolynomial._raw({k: v for k, v in terms.items() if v != 0.0}, const)


def _reduce(keys: np.ndarray, coef: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Merge rows with identical monomials and drop zero coefficients."""
    if len(keys) == 0:
        return keys, coef
    if keys.shape[1] == 1:
        uniq, inv = np.unique(keys[:, 0], return_inverse=True)
        uniq = uniq[:, None]
    else:
        view = np.ascontiguousarray(keys).view(np.dtype((np.void, keys.dtype.itemsize * keys.shape[1])))
        _, first, inv = np.unique(view.ravel(), return_index=True, return_inverse=True)
        uniq = keys[first]
    summed = np.bincount(inv.ravel(), weights=coef, minlength=len(uniq))
    keep = summed != 0.0
    return uniq[keep], summed[keep]


def _rows_in(needles: np.ndarray, haystack: np.ndarray) -> np.ndarray:
    """Boolean mask: which rows of ``needles`` occur in ``haystack``."""
    if needles.shape[1] == 1:
        return np.isin(needles[:, 0], haystack[:, 0])
    void = np.dtype((np.void, 8 * needles.shape[1]))
    return np.isin(np.ascontiguousarray(needles).view(void).ravel(),
                   np.ascontiguousarray(haystack).view(void).ravel())


def _clean(coef: np.ndarray) -> np.ndarray:
    scale = np.abs(coef).max(initial=0.0)
    if scale:
        coef = np.where(np.abs(coef) <= _ROUNDOFF * scale, 0.0, coef)
    return coef


class SymbolicCoordinate:
    """x, y, z of one atom as polynomials in the one-hot variables.

    The three coordinates share one monomial support: ``keys`` holds the
    packed monomials and ``coef`` is a (3, len(keys)) array of coefficients.
    """

    def __init__(self, layout: OneHotLayout, keys: np.ndarray, coef: np.ndarray):
        self.layout = layout
        self.keys = keys
        self.coef = coef

    @classmethod
    def constant(cls, layout: OneHotLayout, position) -> "SymbolicCoordinate":
        return cls(layout, layout.zero_keys(), np.asarray(position, dtype=float).reshape(3, 1))

    def _axis(self, r: int) -> BinaryPolynomial:
        c = self.coef[r]
        nz = c != 0.0
        return self.layout.unpack(self.keys[nz], c[nz])

    @cached_property
    def x(self) -> BinaryPolynomial:
        return self._axis(0)

    @cached_property
    def y(self) -> BinaryPolynomial:
        return self._axis(1)

    @cached_property
    def z(self) -> BinaryPolynomial:
        return self._axis(2)

    def __iter__(self):
        return iter((self.x, self.y, self.z))

    @property
    def num_terms(self) -> int:
        return int(np.count_nonzero(self.coef))

    def evaluate(self, assignment) -> np.ndarray:
        return np.array([evaluate(p, assignment) for p in self])

    def rotate(self, parts, torsion: int, sign: int, table: AngleTable) -> "SymbolicCoordinate":
        """Left-multiply by the symbolic rotation of ``torsion``.

        The torsion's own variables never occur in ``self`` (each torsion is
        crossed once on a chain), so the new support is the old one plus one
        shifted copy per angle, with no collisions.
        """
        A, B, C = parts
        has_const = np.all(self.keys == 0, axis=1).astype(float)
        # homogeneous vector (x, y, z, 1) over the shared support
        hom = np.vstack([self.coef, has_const])
        blocks_keys = [self.keys]
        blocks_coef = [A[:3] @ hom]
        for k in range(1, table.d + 1):
            M = B[:3] * table.cos_values[k - 1] + sign * C[:3] * table.sin_values[k - 1]
            c = M @ hom
            if not c.any():
                continue
            blocks_keys.append(self.keys | self.layout.mask(torsion, k))
            blocks_coef.append(c)
        keys = np.concatenate(blocks_keys)
        coef = _clean(np.concatenate(blocks_coef, axis=1))
        live = coef.any(axis=0)
        return SymbolicCoordinate(self.layout, keys[live], coef[:, live])

    def pruned(self, threshold: float) -> "SymbolicCoordinate":
        """Apply relative-magnitude pruning to each axis separately."""
        if threshold == 0.0:
            return self
        nonconst = ~np.all(self.keys == 0, axis=1)
        coef = self.coef.copy()
        for r in range(3):
            mags = np.abs(coef[r, nonconst])
            if mags.size == 0:
                continue
            cut = threshold * mags.max()
            row = coef[r]
            row[nonconst & (np.abs(row) < cut)] = 0.0
        live = coef.any(axis=0) | ~nonconst
        return SymbolicCoordinate(self.layout, self.keys[live], coef[:, live])


def build_hard_constraint(n: int, d: int) -> BinaryPolynomial:
    """``sum_i (sum_k x_ik - 1)^2`` expanded with ``x^2 = x``."""
    terms = {}
    for i in range(1, n + 1):
        xs = [BinaryVar.onehot(i, k) for k in range(1, d + 1)]
        for a, va in enumerate(xs):
            terms[(va,)] = -1.0
            for vb in xs[a + 1:]:
                terms[(va, vb)] = 2.0
    return BinaryPolynomial._raw(terms, float(n))


def symbolic_rotation(t: TorsionBond, table: AngleTable, mol: Molecule, sign: int = 1):
    """4x4 nested list of degree-1 polynomials in torsion ``t``'s variables."""
    A, B, C = rotation_parts(mol.atoms[t.a1].position, mol.atoms[t.a2].position)
    xs = [BinaryVar.onehot(t.index, k) for k in range(1, table.d + 1)]
    out = []
    for r in range(4):
        row = []
        for c in range(4):
            terms = {}
            for k, v in enumerate(xs):
                val = B[r, c] * table.cos_values[k] + sign * C[r, c] * table.sin_values[k]
                if val != 0.0:
                    terms[(v,)] = val
            row.append(BinaryPolynomial._raw(terms, A[r, c]))
        out.append(row)
    return out


def _torsion_parts(mol: Molecule, graph: TorsionGraph):
    parts = {}
    for t in graph.torsions:
        try:
            parts[t.index] = rotation_parts(mol.atoms[t.a1].position, mol.atoms[t.a2].position)
        except DegenerateAxis as exc:
            raise DegenerateAxis(f"torsion {t.index}: {exc}") from None
    return parts


def _coordinate_in_frame(mol, graph, table, layout, parts, atom, anchor, threshold):
    chain = graph.oriented_chain(anchor, graph.fragment_of[atom])
    coord = SymbolicCoordinate.constant(layout, mol.atoms[atom].position)
    # innermost rotation first: R1 @ (R2 @ (... @ v0))
    for idx, sign in reversed(chain):
        coord = coord.rotate(parts[idx], idx, sign, table).pruned(threshold)
    return coord


def symbolic_coordinates(graph: TorsionGraph, mol: Molecule, table: AngleTable, atom_subset,
                         prune_threshold: float = 0.0, anchor: int | None = None) -> dict[int, SymbolicCoordinate]:
    """Symbolic coordinates of ``atom_subset`` with fragment ``anchor`` (default root) fixed.

    Pruning at ``prune_threshold`` is applied after every rotation step.
    """
    if not 0.0 <= prune_threshold < 1.0:
        raise ValueError(f"threshold must lie in [0, 1), got {prune_threshold}")
    anchor = graph.root if anchor is None else anchor
    layout = OneHotLayout(graph.n, table.d)
    parts = _torsion_parts(mol, graph)
    return {
        a: _coordinate_in_frame(mol, graph, table, layout, parts, a, anchor, prune_threshold)
        for a in sorted(atom_subset)
    }


def symbolic_frames(graph: TorsionGraph, mol: Molecule, table: AngleTable, atom_subset,
                    prune_threshold: float = 0.0) -> dict[int, dict[int, SymbolicCoordinate]]:
    """Coordinates needed for every eligible pair, keyed by anchor fragment.

    For a pair ``(u, v)`` with ``u < v`` the fragment of ``u`` is held fixed
    and ``frames[fragment_of[u]][v]`` gives ``v`` relative to it.
    """
    if not 0.0 <= prune_threshold < 1.0:
        raise ValueError(f"threshold must lie in [0, 1), got {prune_threshold}")
    layout = OneHotLayout(graph.n, table.d)
    parts = _torsion_parts(mol, graph)
    frames: dict[int, dict[int, SymbolicCoordinate]] = {}
    for u, v in eligible_pairs(graph, atom_subset):
        anchor = graph.fragment_of[u]
        frame = frames.setdefault(anchor, {})
        if v not in frame:
            frame[v] = _coordinate_in_frame(mol, graph, table, layout, parts, v, anchor, prune_threshold)
    return frames


def _squared_distance(fixed, coord: SymbolicCoordinate) -> tuple[np.ndarray, np.ndarray]:
    """Packed ``|fixed - coord|^2`` via the Gram matrix over the shared support.

    Generic route used when the dense accumulator would not fit in memory.
    """
    keys, diff = _difference(fixed, coord)
    T = len(keys)
    out_keys, out_coef = [], []
    step = max(1, _CHUNK // max(T, 1))
    for lo in range(0, T, step):
        hi = min(T, lo + step)
        gram = diff[:, lo:hi].T @ diff[:, lo:]           # rows a in [lo, hi), columns b >= lo
        a_idx, b_off = np.nonzero(np.triu(np.ones((hi - lo, T - lo), dtype=bool)))
        b_idx = b_off + lo
        vals = gram[a_idx, b_off] * np.where(a_idx + lo == b_idx, 1.0, 2.0)
        k, c = _reduce(keys[a_idx + lo] | keys[b_idx], vals)
        out_keys.append(k)
        out_coef.append(c)
    return _reduce(np.concatenate(out_keys), np.concatenate(out_coef))


def _difference(fixed, coord: SymbolicCoordinate):
    """Support and coefficients of ``coord - fixed`` (constant row guaranteed)."""
    const_row = np.all(coord.keys == 0, axis=1)
    diff = coord.coef.copy()
    keys = coord.keys
    if not const_row.any():
        keys = np.vstack([coord.layout.zero_keys(), keys])
        diff = np.hstack([np.zeros((3, 1)), diff])
        const_row = np.r_[True, np.zeros(len(coord.keys), dtype=bool)]
    diff[:, const_row] -= np.asarray(fixed, dtype=float)[:, None]
    return keys, diff


class _DenseStates:
    """Mixed-radix index over per-torsion states of a degree-<=2-per-group monomial.

    State 0 is "no variable", ``k`` is ``x_ik`` alone and ``d + m`` is the
    m-th pair ``x_ik x_il`` (k < l).  A product of two chain monomials has at
    most two variables per torsion, so every squared distance lives in this
    space.
    """

    def __init__(self, layout: OneHotLayout):
        d = layout.d
        self.layout = layout
        self.S = 1 + d + d * (d - 1) // 2
        self.size = self.S ** layout.n
        pairtab = np.zeros((d + 1, d + 1), dtype=np.int64)
        members = [(0, 0)] + [(k, 0) for k in range(1, d + 1)]
        for k in range(1, d + 1):
            pairtab[0, k] = pairtab[k, 0] = pairtab[k, k] = k
        m = d + 1
        for k in range(1, d + 1):
            for l in range(k + 1, d + 1):
                pairtab[k, l] = pairtab[l, k] = m
                members.append((k, l))
                m += 1
        self.pairtab = pairtab
        self.members = members
        # torsion i (1-based) is the (n - i)-th least significant digit
        self.weights = np.array([self.S ** (layout.n - i) for i in range(1, layout.n + 1)], dtype=np.int64)

    def digits(self, keys: np.ndarray, torsions) -> np.ndarray:
        out = np.zeros((len(keys), len(torsions)), dtype=np.int64)
        for j, t in enumerate(torsions):
            for k in range(1, self.layout.d + 1):
                b = self.layout.bit(t, k)
                hit = (keys[:, b // 64] >> np.uint64(b % 64)) & np.uint64(1)
                out[hit.astype(bool), j] = k
        return out

    def to_keys(self, idx: np.ndarray) -> np.ndarray:
        layout = self.layout
        keys = layout.zero_keys(len(idx))
        rest = idx.copy()
        for i in range(layout.n, 0, -1):
            state = rest % self.S
            rest //= self.S
            table = layout.zero_keys(self.S)
            for s, (k, l) in enumerate(self.members):
                for a in (k, l):
                    if a:
                        table[s] |= layout.mask(i, a)[0]
            keys |= table[state]
        return keys


@njit(cache=True)
def _accumulate_square(digits, coef, pairtab, weights, out, touched, count):
    # touched[:count] lists every slot that was zero before being written;
    # a slot that cancels back to zero can show up twice, callers dedupe
    T, k = digits.shape
    n = count
    for a in range(T):
        c0 = coef[0, a]
        c1 = coef[1, a]
        c2 = coef[2, a]
        for b in range(a, T):
            g = c0 * coef[0, b] + c1 * coef[1, b] + c2 * coef[2, b]
            if g == 0.0:
                continue
            idx = 0
            for j in range(k):
                idx += pairtab[digits[a, j], digits[b, j]] * weights[j]
            if out[idx] == 0.0:
                touched[n] = idx
                n += 1
            if a == b:
                out[idx] += g
            else:
                out[idx] += 2.0 * g
    return n


def _distance_packed(frames, graph, atom_subset, mol, layout):
    pairs = eligible_pairs(graph, atom_subset)
    if not pairs:
        return layout.zero_keys(0), np.zeros(0)

    def fixed_of(u):
        return mol.atoms[u].position if mol is not None else _own_position(frames, graph, u)

    if layout.n and (1 + layout.d + layout.d * (layout.d - 1) // 2) ** layout.n <= _DENSE_LIMIT:
        dense = _DenseStates(layout)
        out = np.zeros(dense.size)
        touched = np.empty(1 << 16, dtype=np.int64)
        count = 0
        for u, v in pairs:
            chain = graph.pair_chains[(u, v)]
            keys, diff = _difference(fixed_of(u), frames[graph.fragment_of[u]][v])
            digits = dense.digits(keys, chain)
            weights = dense.weights[np.asarray(chain) - 1]
            need = count + len(keys) * (len(keys) + 1) // 2
            if need > len(touched):
                touched = np.resize(touched, max(need, 2 * len(touched)))
            count = _accumulate_square(digits, np.ascontiguousarray(diff), dense.pairtab, weights, out,
                                       touched, count)
        # scanning the whole dense array is far slower than sorting the touched slots
        idx = np.unique(touched[:count])
        coef = out[idx]
        idx, coef = idx[coef != 0.0], coef[coef != 0.0]
        del out
        keys = dense.to_keys(idx)
    else:
        all_keys, all_coef = [], []
        for u, v in pairs:
            k, c = _squared_distance(fixed_of(u), frames[graph.fragment_of[u]][v])
            all_keys.append(k)
            all_coef.append(c)
        keys, coef = _reduce(np.concatenate(all_keys), np.concatenate(all_coef))
    coef = _clean(coef)
    nz = coef != 0.0
    return keys[nz], coef[nz]


def build_distance_constraint(frames, graph: TorsionGraph, atom_subset, mol: Molecule | None = None,
                              layout: OneHotLayout | None = None) -> BinaryPolynomial:
    """Sum over eligible pairs of ``|u0 - coord(v)|^2`` with ``u`` fixed.

    ``frames`` is the output of :func:`symbolic_frames`.  The fixed endpoint's
    position is read from the constant part of its own-frame coordinate when
    available, otherwise from ``mol``.
    """
    if layout is None:
        some = next((c for f in frames.values() for c in f.values()), None)
        if some is None:
            return BinaryPolynomial()
        layout = some.layout
    keys, coef = _distance_packed(frames, graph, atom_subset, mol, layout)
    return layout.unpack(keys, coef)


def _own_position(frames, graph, atom):
    frame = frames.get(graph.fragment_of[atom], {})
    if atom in frame:
        coord = frame[atom]
        const = np.all(coord.keys == 0, axis=1)
        return coord.coef[:, const].sum(axis=1)
    raise KeyError(f"no fixed position known for atom {atom}; pass mol=")


def default_a_const(dist: BinaryPolynomial, factor: float = 1.1) -> float:
    """Penalty weight: ``factor`` times the largest distance coefficient."""
    m = dist.max_abs_coefficient()
    return factor * m if m > 0 else 1.0


def group_bound_a_const(dist: BinaryPolynomial, factor: float = 1.1) -> float:
    """Penalty weight large enough that every ground state is one-hot feasible.

    ``factor`` times the largest, over torsions, total ``|c|`` of the
    distance monomials that touch that torsion's variables.  Repairing one
    violated group changes only those monomials while lowering the penalty
    by at least ``a_const``, so no infeasible state can be a minimiser.
    """
    mass: dict[int, float] = {}
    for mono, c in dist.terms.items():
        for t in {v.torsion for v in mono if not v.is_aux}:
            mass[t] = mass.get(t, 0.0) + abs(c)
    m = max(mass.values(), default=0.0)
    return factor * m if m > 0 else 1.0


A_CONST_RULES = ("max_coefficient", "group_bound")


def assemble_hubo(hard: BinaryPolynomial, dist: BinaryPolynomial, a_const: float | None = None,
                  final_threshold: float = 0.0, a_const_factor: float = 1.1) -> BinaryPolynomial:
    """``a_const * hard - prune(dist)``; hard-constraint monomials are never pruned."""
    if a_const is None:
        a_const = default_a_const(dist, a_const_factor)
    if a_const <= 0:
        raise ValueError(f"a_const must be positive, got {a_const}")
    return hard * a_const - prune(dist, final_threshold)


class HuboBuild:
    """Everything produced while constructing one HUBO, kept for reporting.

    The unpruned distance polynomial can be very large, so it is held packed
    and only expanded into a :class:`BinaryPolynomial` when ``dist`` is read.
    """

    def __init__(self, hard, hubo, a_const, atom_subset, layout, dist_keys, dist_coef,
                 raw_terms, timings):
        self.hard = hard
        self.hubo = hubo
        self.a_const = a_const
        self.atom_subset = atom_subset
        self.layout = layout
        self.dist_keys = dist_keys
        self.dist_coef = dist_coef
        self.raw_terms = raw_terms
        self.timings = timings

    @property
    def n(self) -> int:
        return self.layout.n

    @property
    def d(self) -> int:
        return self.layout.d

    @cached_property
    def dist(self) -> BinaryPolynomial:
        return self.layout.unpack(self.dist_keys, self.dist_coef)

    @property
    def terms(self) -> int:
        return self.hubo.num_terms


def build_hubo(mol: Molecule, graph: TorsionGraph, table: AngleTable, atom_subset=None,
               intermediate_threshold: float = 0.0, final_threshold: float = 0.0,
               a_const: float | None = None, a_const_factor: float = 1.1,
               a_const_rule: str = "max_coefficient") -> HuboBuild:
    """Full construction: symbolic coordinates, distance sum, penalty, pruning.

    Equivalent to ``assemble_hubo(hard, build_distance_constraint(...), ...)``
    but prunes the distance part before expanding it out of packed form.
    """
    if not 0.0 <= final_threshold < 1.0:
        raise ValueError(f"threshold must lie in [0, 1), got {final_threshold}")
    if atom_subset is None:
        atom_subset = range(mol.n_atoms)
    subset = frozenset(atom_subset)
    layout = OneHotLayout(graph.n, table.d)
    t0 = time.perf_counter()
    frames = symbolic_frames(graph, mol, table, subset, intermediate_threshold)
    t1 = time.perf_counter()
    keys, coef = _distance_packed(frames, graph, subset, mol, layout)
    t2 = time.perf_counter()

    nonconst = ~np.all(keys == 0, axis=1)
    max_c = float(np.abs(coef[nonconst]).max(initial=0.0))
    hard = build_hard_constraint(graph.n, table.d) if graph.n else BinaryPolynomial()
    hard_keys, hard_coef = layout.pack(hard)
    raw_terms = len(keys) + int(np.count_nonzero(~_rows_in(hard_keys[hard_coef != 0], keys)))

    keep = ~nonconst
    if final_threshold > 0.0:
        keep |= np.abs(coef) >= final_threshold * max_c
    else:
        keep |= True
    dist_kept = layout.unpack(keys[keep], coef[keep])
    if a_const is None:
        if a_const_rule == "max_coefficient":
            a_const = a_const_factor * max_c if max_c > 0 else 1.0
        elif a_const_rule == "group_bound":
            a_const = group_bound_a_const(dist_kept, a_const_factor)
        else:
            raise ValueError(f"unknown a_const rule {a_const_rule!r}; expected one of {A_CONST_RULES}")
    if a_const <= 0:
        raise ValueError(f"a_const must be positive, got {a_const}")
    hubo = hard * a_const - dist_kept
    t3 = time.perf_counter()
    timings = {"coordinates": t1 - t0, "distance": t2 - t1, "assemble": t3 - t2, "total": t3 - t0}
    return HuboBuild(hard, hubo, a_const, subset, layout, keys, coef, raw_terms, timings)


def degree_bound(graph: TorsionGraph, atom_subset=None) -> int:
    """``2 * longest pair chain``: the maximum degree of the unpruned distance sum."""
    chains = [graph.pair_chains[p] for p in eligible_pairs(graph, atom_subset)]
    return 2 * max((len(c) for c in chains), default=0)
