"""Degree reduction of a HUBO to a QUBO by pair substitution.

Each step picks the variable pair shared by the most monomials of degree
three or more, replaces it with a fresh auxiliary ``y`` in those monomials
and adds the penalty gadget ``P * (a*b - 2*a*y - 2*b*y + 3*y)``.  The gadget
is zero exactly when ``y == a*b`` and at least ``P`` otherwise.  ``P`` exceeds
the total weight of the rewritten monomials, so every minimiser keeps each
auxiliary equal to its pair product and the minimum value is unchanged.
"""

from __future__ import annotations

import itertools
from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np

from .polynomial import BinaryPolynomial, BinaryVar, monomial

__all__ = ["AuxDefinition", "QuboModel", "to_qubo", "project_solution", "dumps_qubo", "loads_qubo"]


@dataclass(frozen=True)
class AuxDefinition:
    aux: BinaryVar
    pair: tuple[BinaryVar, BinaryVar]
    penalty: float


@dataclass
class QuboModel:
    """A degree-2 polynomial plus the bookkeeping needed to undo quadratization.

    ``penalty`` is the largest gadget weight used (1.0 when no substitution
    was needed).
    """

    poly: BinaryPolynomial
    var_map: dict = field(default_factory=dict)
    aux_defs: list = field(default_factory=list)
    penalty: float = 1.0

    @property
    def variables(self) -> tuple[BinaryVar, ...]:
        return tuple(sorted(self.var_map, key=self.var_map.get))

    @property
    def num_vars(self) -> int:
        return len(self.var_map)

    @property
    def original_variables(self) -> tuple[BinaryVar, ...]:
        return tuple(v for v in self.variables if not v.is_aux)

    def matrices(self):
        """Dense ``(offset, h, J)`` with ``J`` symmetric, zero diagonal.

        Energy is ``offset + h @ x + x @ J @ x / 2``.
        """
        n = self.num_vars
        h = np.zeros(n)
        J = np.zeros((n, n))
        for mono, c in self.poly.terms.items():
            if len(mono) == 1:
                h[self.var_map[mono[0]]] += c
            else:
                i, j = self.var_map[mono[0]], self.var_map[mono[1]]
                J[i, j] += c
                J[j, i] += c
        return self.poly.constant, h, J

    def energies(self, states: np.ndarray) -> np.ndarray:
        """Energy of each row of a (m, num_vars) 0/1 array."""
        offset, h, J = self.matrices()
        x = np.asarray(states, dtype=float)
        return offset + x @ h + 0.5 * np.einsum("ij,jk,ik->i", x, J, x)


def to_qubo(hubo: BinaryPolynomial) -> QuboModel:
    terms: dict[tuple, float] = dict(hubo.terms)
    high = {k for k in terms if len(k) >= 3}
    pair_count: dict[tuple, int] = defaultdict(int)
    pair_members: dict[tuple, set] = defaultdict(set)
    for mono in high:
        for p in itertools.combinations(mono, 2):
            pair_count[p] += 1
            pair_members[p].add(mono)

    def forget(mono):
        for p in itertools.combinations(mono, 2):
            pair_count[p] -= 1
            pair_members[p].discard(mono)
            if not pair_count[p]:
                del pair_count[p]
                del pair_members[p]

    def remember(mono):
        for p in itertools.combinations(mono, 2):
            pair_count[p] += 1
            pair_members[p].add(mono)

    aux_defs: list[AuxDefinition] = []
    extra: dict[tuple, float] = defaultdict(float)
    while pair_count:
        best = min(pair_count.items(), key=lambda kv: (-kv[1], kv[0]))[0]
        a, b = best
        y = BinaryVar.aux(len(aux_defs) + 1)
        members = sorted(pair_members[best])
        weight = 0.0
        for mono in members:
            c = terms.pop(mono)
            weight += abs(c)
            forget(mono)
            high.discard(mono)
            new = monomial([v for v in mono if v != a and v != b] + [y])
            terms[new] = terms.get(new, 0.0) + c
            if len(new) >= 3:
                high.add(new)
                remember(new)
        P = 2.0 * weight + 1.0
        extra[(a, b)] += P
        extra[monomial((a, y))] -= 2.0 * P
        extra[monomial((b, y))] -= 2.0 * P
        extra[(y,)] += 3.0 * P
        aux_defs.append(AuxDefinition(y, best, P))

    for k, c in extra.items():
        terms[k] = terms.get(k, 0.0) + c
    poly = BinaryPolynomial(terms, hubo.constant)
    allvars = sorted(set(hubo.variables()) | {d.aux for d in aux_defs})
    var_map = {v: i for i, v in enumerate(allvars)}
    penalty = max((d.penalty for d in aux_defs), default=1.0)
    return QuboModel(poly, var_map, aux_defs, penalty)


def project_solution(q: QuboModel, full_assignment) -> tuple[dict, bool]:
    """Drop auxiliaries; the flag is True when any auxiliary disagrees with its pair."""
    violated = False
    for d in q.aux_defs:
        a, b = d.pair
        if int(full_assignment[d.aux]) != int(full_assignment[a]) * int(full_assignment[b]):
            violated = True
            break
    return {v: int(x) for v, x in full_assignment.items() if not v.is_aux}, violated


def dumps_qubo(q: QuboModel) -> str:
    """``vars <n>`` header, optional ``offset``, variable names, then ``i j coeff`` lines."""
    lines = [f"vars {q.num_vars}"]
    if q.poly.constant != 0.0:
        lines.append(f"offset {q.poly.constant!r}")
    for v in q.variables:
        lines.append(f"# var {q.var_map[v]} {v}")
    rows = []
    for mono, c in q.poly.terms.items():
        idx = sorted(q.var_map[v] for v in mono)
        i, j = (idx[0], idx[0]) if len(idx) == 1 else (idx[0], idx[1])
        rows.append((i, j, c))
    for i, j, c in sorted(rows):
        lines.append(f"{i} {j} {c!r}")
    return "\n".join(lines) + "\n"


def loads_qubo(text: str) -> QuboModel:
    """Inverse of :func:`dumps_qubo`; unnamed variables become ``y<index+1>`` auxiliaries."""
    n = None
    offset = 0.0
    names: dict[int, BinaryVar] = {}
    entries = []
    for line_no, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        tok = line.split()
        if tok[0] == "vars":
            n = int(tok[1])
        elif tok[0] == "offset":
            offset = float(tok[1])
        elif tok[0] == "#":
            if len(tok) == 4 and tok[1] == "var":
                names[int(tok[2])] = BinaryVar.parse(tok[3])
        else:
            if len(tok) != 3:
                raise ValueError(f"line {line_no}: expected 'i j coeff'")
            entries.append((int(tok[0]), int(tok[1]), float(tok[2])))
    if n is None:
        raise ValueError("missing 'vars <count>' header")
    var_of = [names.get(i, BinaryVar.aux(i + 1)) for i in range(n)]
    terms: dict[tuple, float] = defaultdict(float)
    for i, j, c in entries:
        if not (0 <= i < n and 0 <= j < n):
            raise ValueError(f"index out of range in term {i} {j}")
        key = (var_of[i],) if i == j else monomial((var_of[i], var_of[j]))
        terms[key] += c
    return QuboModel(BinaryPolynomial(terms, offset), {v: i for i, v in enumerate(var_of)}, [], 1.0)
