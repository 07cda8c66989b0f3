"""Molecule parsing, rotatable-bond detection and rigid-fragment bookkeeping.

Two input formats are understood: TRIPOS mol2 and MDL molfile V2000.
Everything downstream works on hydrogen-stripped heavy-atom graphs, so the
usual entry point is::

    mol = strip_terminal_hydrogens(load_molecule(path))
    torsions = find_rotatable_bonds(mol)
    graph = build_torsion_graph(mol, torsions)
"""

from __future__ import annotations

import logging
import math
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import networkx as nx

from .errors import DanglingBond, MalformedRecord, MissingSection

log = logging.getLogger(__name__)

__all__ = [
    "Atom",
    "Bond",
    "BondOrder",
    "Molecule",
    "TorsionBond",
    "TorsionGraph",
    "parse_mol2",
    "parse_mol",
    "load_molecule",
    "strip_terminal_hydrogens",
    "find_rotatable_bonds",
    "build_torsion_graph",
    "select_median_atoms",
]


class BondOrder(str, Enum):
    SINGLE = "single"
    DOUBLE = "double"
    TRIPLE = "triple"
    AROMATIC = "aromatic"
    AMIDE = "amide"


_MOL2_BOND_CODES = {
    "1": BondOrder.SINGLE,
    "2": BondOrder.DOUBLE,
    "3": BondOrder.TRIPLE,
    "ar": BondOrder.AROMATIC,
    "am": BondOrder.AMIDE,
}

_MOLFILE_BOND_CODES = {
    1: BondOrder.SINGLE,
    2: BondOrder.DOUBLE,
    3: BondOrder.TRIPLE,
    4: BondOrder.AROMATIC,
}


@dataclass(frozen=True)
class Atom:
    id: int
    element: str
    position: tuple[float, float, float]


@dataclass(frozen=True)
class Bond:
    a: int
    b: int
    order: BondOrder = BondOrder.SINGLE
    in_ring: bool = False

    @property
    def key(self) -> tuple[int, int]:
        return (self.a, self.b) if self.a < self.b else (self.b, self.a)


@dataclass(frozen=True)
class Molecule:
    """A ligand: atoms with Ångström coordinates plus the bond list.

    ``source_ids[i]`` is the id atom ``i`` had in the file it was read from,
    so results can be traced back after hydrogens are removed.
    """

    atoms: tuple[Atom, ...]
    bonds: tuple[Bond, ...]
    name: str = ""
    source_ids: tuple[int, ...] = ()

    def __post_init__(self):
        if not self.source_ids:
            object.__setattr__(self, "source_ids", tuple(range(len(self.atoms))))

    @property
    def n_atoms(self) -> int:
        return len(self.atoms)

    def positions(self):
        import numpy as np

        return np.array([a.position for a in self.atoms], dtype=float).reshape(-1, 3)

    def graph(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(range(len(self.atoms)))
        g.add_edges_from(b.key for b in self.bonds)
        return g

    def bond_between(self, a: int, b: int) -> Bond | None:
        key = (a, b) if a < b else (b, a)
        for bond in self.bonds:
            if bond.key == key:
                return bond
        return None


def _finalize(name, atoms, raw_bonds, source_ids) -> Molecule:
    """Validate bonds and attach ring flags from bridge analysis."""
    seen = set()
    for a, b, _, line in raw_bonds:
        if a == b:
            raise MalformedRecord(f"bond joins atom {a} to itself", line)
        key = (min(a, b), max(a, b))
        if key in seen:
            raise MalformedRecord(f"duplicate bond between atoms {a} and {b}", line)
        seen.add(key)

    g = nx.Graph()
    g.add_nodes_from(range(len(atoms)))
    g.add_edges_from((a, b) for a, b, _, _ in raw_bonds)
    bridges = {(min(e), max(e)) for e in nx.bridges(g)}
    bonds = tuple(
        Bond(a, b, order, in_ring=(min(a, b), max(a, b)) not in bridges)
        for a, b, order, _ in raw_bonds
    )
    return Molecule(tuple(atoms), bonds, name, tuple(source_ids))


def _coords(tokens, line_no):
    try:
        xyz = tuple(float(t) for t in tokens)
    except ValueError:
        raise MalformedRecord(f"bad coordinate in {tokens!r}", line_no) from None
    if not all(math.isfinite(c) for c in xyz):
        raise MalformedRecord("non-finite coordinate", line_no)
    return xyz


def _element_from_mol2_type(atom_type: str, atom_name: str) -> str:
    base = atom_type.split(".")[0]
    if base and base[0].isalpha() and base not in ("Du", "LP", "Any", "Hal", "Het", "Hev"):
        return base[0].upper() + base[1:].lower()
    letters = "".join(ch for ch in atom_name if ch.isalpha())
    return letters[:1].upper() or "X"


def parse_mol2(text: str) -> Molecule:
    """Parse the first molecule of a TRIPOS mol2 document."""
    sections: dict[str, list[tuple[int, str]]] = {}
    current = None
    for line_no, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if line.startswith("@<TRIPOS>"):
            current = line[len("@<TRIPOS>"):].upper()
            if current in sections:
                # second molecule in a multi-record file
                if current == "MOLECULE":
                    break
                raise MalformedRecord(f"repeated section {current}", line_no)
            sections[current] = []
            if current not in ("MOLECULE", "ATOM", "BOND"):
                log.warning("skipping mol2 section %s", current)
            continue
        if current is None or not line or line.startswith("#"):
            continue
        sections[current].append((line_no, line))

    for required in ("MOLECULE", "ATOM", "BOND"):
        if required not in sections:
            raise MissingSection(f"mol2 input has no @<TRIPOS>{required} section")

    header = sections["MOLECULE"]
    name = header[0][1] if header else ""
    n_atoms_declared = n_bonds_declared = None
    if len(header) > 1:
        counts = header[1][1].split()
        try:
            n_atoms_declared = int(counts[0])
            n_bonds_declared = int(counts[1]) if len(counts) > 1 else None
        except (ValueError, IndexError):
            raise MalformedRecord("bad counts line", header[1][0]) from None

    atoms = []
    id_map = {}
    source_ids = []
    for line_no, line in sections["ATOM"]:
        tok = line.split()
        if len(tok) < 6:
            raise MalformedRecord("ATOM record needs at least 6 fields", line_no)
        try:
            file_id = int(tok[0])
        except ValueError:
            raise MalformedRecord(f"bad atom id {tok[0]!r}", line_no) from None
        if file_id in id_map:
            raise MalformedRecord(f"duplicate atom id {file_id}", line_no)
        pos = _coords(tok[2:5], line_no)
        id_map[file_id] = len(atoms)
        source_ids.append(file_id)
        atoms.append(Atom(len(atoms), _element_from_mol2_type(tok[5], tok[1]), pos))

    raw_bonds = []
    for line_no, line in sections["BOND"]:
        tok = line.split()
        if len(tok) < 4:
            raise MalformedRecord("BOND record needs 4 fields", line_no)
        try:
            a, b = int(tok[1]), int(tok[2])
        except ValueError:
            raise MalformedRecord("bad bond atom reference", line_no) from None
        for ref in (a, b):
            if ref not in id_map:
                raise DanglingBond(f"bond references unknown atom id {ref}", line_no)
        code = tok[3].lower()
        if code not in _MOL2_BOND_CODES:
            raise MalformedRecord(f"unsupported bond type {tok[3]!r}", line_no)
        raw_bonds.append((id_map[a], id_map[b], _MOL2_BOND_CODES[code], line_no))

    if n_atoms_declared is not None and n_atoms_declared != len(atoms):
        raise MalformedRecord(
            f"counts line declares {n_atoms_declared} atoms, found {len(atoms)}", header[1][0]
        )
    if n_bonds_declared is not None and n_bonds_declared != len(raw_bonds):
        raise MalformedRecord(
            f"counts line declares {n_bonds_declared} bonds, found {len(raw_bonds)}", header[1][0]
        )
    return _finalize(name, atoms, raw_bonds, source_ids)


def parse_mol(text: str) -> Molecule:
    """Parse an MDL molfile (V2000 connection table)."""
    lines = text.splitlines()
    if len(lines) < 4:
        raise MissingSection("molfile needs a 3-line header and a counts line")
    name = lines[0].strip()
    counts = lines[3]
    if "V3000" in counts:
        raise MalformedRecord("V3000 molfiles are not supported", 4)
    try:
        n_atoms = int(counts[0:3])
        n_bonds = int(counts[3:6])
    except ValueError:
        tok = counts.split()
        try:
            n_atoms, n_bonds = int(tok[0]), int(tok[1])
        except (ValueError, IndexError):
            raise MalformedRecord("bad counts line", 4) from None

    atoms = []
    pos = 4
    for _ in range(n_atoms):
        line_no = pos + 1
        if pos >= len(lines):
            raise MalformedRecord(f"expected {n_atoms} atom lines, file ended", line_no)
        line = lines[pos]
        tok = line.split()
        if len(tok) < 4 or line.startswith("M  "):
            raise MalformedRecord(f"expected atom line, got {line.strip()!r}", line_no)
        try:
            xyz = _coords(tok[0:3], line_no)
        except MalformedRecord:
            raise MalformedRecord(f"expected atom line, got {line.strip()!r}", line_no) from None
        symbol = tok[3]
        if not symbol[:1].isalpha():
            raise MalformedRecord(f"bad element symbol {symbol!r}", line_no)
        atoms.append(Atom(len(atoms), symbol, xyz))
        pos += 1

    raw_bonds = []
    for _ in range(n_bonds):
        line_no = pos + 1
        if pos >= len(lines):
            raise MalformedRecord(f"expected {n_bonds} bond lines, file ended", line_no)
        line = lines[pos]
        try:
            a, b, code = int(line[0:3]), int(line[3:6]), int(line[6:9])
        except ValueError:
            tok = line.split()
            try:
                a, b, code = int(tok[0]), int(tok[1]), int(tok[2])
            except (ValueError, IndexError):
                raise MalformedRecord(f"expected bond line, got {line.strip()!r}", line_no) from None
        for ref in (a, b):
            if not 1 <= ref <= n_atoms:
                raise DanglingBond(f"bond references unknown atom {ref}", line_no)
        if code not in _MOLFILE_BOND_CODES:
            raise MalformedRecord(f"unsupported bond type {code}", line_no)
        raw_bonds.append((a - 1, b - 1, _MOLFILE_BOND_CODES[code], line_no))
        pos += 1

    return _finalize(name, atoms, raw_bonds, range(1, n_atoms + 1))


def load_molecule(path) -> Molecule:
    """Read a ``.mol2``, ``.mol`` or ``.sdf`` file, choosing the parser by suffix."""
    path = Path(path)
    text = path.read_text()
    if path.suffix.lower() == ".mol2":
        mol = parse_mol2(text)
    elif path.suffix.lower() in (".mol", ".sdf", ".mdl"):
        mol = parse_mol(text)
    elif "@<TRIPOS>" in text:
        mol = parse_mol2(text)
    else:
        mol = parse_mol(text)
    if not mol.name:
        mol = Molecule(mol.atoms, mol.bonds, path.stem, mol.source_ids)
    return mol


def _subset(mol: Molecule, keep: list[int]) -> Molecule:
    remap = {old: new for new, old in enumerate(keep)}
    atoms = tuple(Atom(remap[a.id], a.element, a.position) for a in (mol.atoms[i] for i in keep))
    bonds = tuple(
        Bond(remap[b.a], remap[b.b], b.order, b.in_ring)
        for b in mol.bonds
        if b.a in remap and b.b in remap
    )
    return Molecule(atoms, bonds, mol.name, tuple(mol.source_ids[i] for i in keep))


def strip_terminal_hydrogens(mol: Molecule) -> Molecule:
    """Drop every hydrogen that has exactly one bond; ids are re-based to 0."""
    degree = [0] * mol.n_atoms
    for b in mol.bonds:
        degree[b.a] += 1
        degree[b.b] += 1
    keep = [a.id for a in mol.atoms if not (a.element == "H" and degree[a.id] == 1)]
    if len(keep) == mol.n_atoms:
        return mol
    return _subset(mol, keep)


@dataclass(frozen=True)
class TorsionBond:
    index: int
    a1: int
    a2: int


def find_rotatable_bonds(mol: Molecule) -> list[TorsionBond]:
    """Single, acyclic bridge bonds with at least two atoms on either side."""
    g = mol.graph()
    bridges = {(min(e), max(e)) for e in nx.bridges(g)}
    found = []
    for bond in mol.bonds:
        if bond.order is not BondOrder.SINGLE or bond.in_ring or bond.key not in bridges:
            continue
        a, b = bond.key
        g.remove_edge(a, b)
        side_a = len(nx.node_connected_component(g, a))
        side_b = len(nx.node_connected_component(g, b))
        g.add_edge(a, b)
        if side_a >= 2 and side_b >= 2:
            found.append((a, b))
    return [TorsionBond(i, a, b) for i, (a, b) in enumerate(sorted(found), 1)]


@dataclass(frozen=True)
class TorsionGraph:
    """Rotatable bonds, the rigid fragments they separate, and eligible pairs.

    Fragments are numbered by their smallest atom id, so fragment 0 always
    holds atom 0 and serves as the fixed root frame.  ``tree`` maps each
    fragment to ``{neighbour fragment: torsion index}``.
    """

    torsions: tuple[TorsionBond, ...]
    fragments: tuple[frozenset[int], ...]
    fragment_of: tuple[int, ...]
    tree: dict = field(repr=False)
    pair_chains: dict = field(repr=False)

    @property
    def n(self) -> int:
        return len(self.torsions)

    @property
    def root(self) -> int:
        return 0

    def torsion(self, index: int) -> TorsionBond:
        return self.torsions[index - 1]

    def fragment_path(self, start: int, stop: int) -> list[int]:
        """Fragment indices along the unique tree path from ``start`` to ``stop``."""
        if start == stop:
            return [start]
        parent = {start: None}
        queue = deque([start])
        while queue:
            f = queue.popleft()
            for nb in sorted(self.tree[f]):
                if nb not in parent:
                    parent[nb] = f
                    queue.append(nb)
        if stop not in parent:
            raise ValueError(f"fragments {start} and {stop} are not connected")
        path = [stop]
        while path[-1] != start:
            path.append(parent[path[-1]])
        return path[::-1]

    def oriented_chain(self, start: int, stop: int) -> list[tuple[int, int]]:
        """Torsions crossed walking from fragment ``start`` to ``stop``.

        Each entry is ``(torsion index, sign)``; sign is +1 when the walk
        crosses from the ``a1`` side to the ``a2`` side, so the far side turns
        by +theta about the a1->a2 axis, and -1 for the opposite direction.
        """
        path = self.fragment_path(start, stop)
        chain = []
        for here, there in zip(path, path[1:]):
            idx = self.tree[here][there]
            t = self.torsion(idx)
            sign = 1 if self.fragment_of[t.a1] == here else -1
            chain.append((idx, sign))
        return chain


def build_torsion_graph(mol: Molecule, torsions: list[TorsionBond]) -> TorsionGraph:
    g = mol.graph()
    cut = g.copy()
    cut.remove_edges_from((t.a1, t.a2) for t in torsions)
    comps = sorted((frozenset(c) for c in nx.connected_components(cut)), key=min)
    fragment_of = [0] * mol.n_atoms
    for fi, comp in enumerate(comps):
        for a in comp:
            fragment_of[a] = fi

    tree: dict[int, dict[int, int]] = {fi: {} for fi in range(len(comps))}
    for t in torsions:
        fa, fb = fragment_of[t.a1], fragment_of[t.a2]
        tree[fa][fb] = t.index
        tree[fb][fa] = t.index

    graph = TorsionGraph(tuple(torsions), tuple(comps), tuple(fragment_of), tree, {})
    chains_by_fragments = {}
    dist = dict(nx.all_pairs_shortest_path_length(g))
    for u in range(mol.n_atoms):
        for v in range(u + 1, mol.n_atoms):
            fu, fv = fragment_of[u], fragment_of[v]
            if fu == fv or dist[u].get(v, 0) < 3:
                continue
            key = (fu, fv)
            if key not in chains_by_fragments:
                chains_by_fragments[key] = tuple(i for i, _ in graph.oriented_chain(fu, fv))
            graph.pair_chains[(u, v)] = chains_by_fragments[key]
    return graph


def select_median_atoms(graph: TorsionGraph, mol: Molecule) -> set[int]:
    """Keep at most two atoms per rigid fragment, those closest to its torsion bonds."""
    g = mol.graph()
    anchors: dict[int, set[int]] = {fi: set() for fi in range(len(graph.fragments))}
    for t in graph.torsions:
        anchors[graph.fragment_of[t.a1]].add(t.a1)
        anchors[graph.fragment_of[t.a2]].add(t.a2)

    chosen = set()
    for fi, frag in enumerate(graph.fragments):
        if len(frag) <= 2:
            chosen.update(frag)
            continue
        sub = g.subgraph(frag)
        depth = {}
        if anchors[fi]:
            for src in anchors[fi]:
                for atom, dd in nx.single_source_shortest_path_length(sub, src).items():
                    depth[atom] = min(dd, depth.get(atom, dd))
        ranked = sorted(frag, key=lambda a: (depth.get(a, math.inf), a))
        chosen.update(ranked[:2])
    return chosen
