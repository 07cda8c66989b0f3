from pathlib import Path

import numpy as np
import pytest

from unfolder.molio import (
    Atom,
    Bond,
    Molecule,
    build_torsion_graph,
    find_rotatable_bonds,
    load_molecule,
    strip_terminal_hydrogens,
)

DATA = Path(__file__).parent / "data"


def random_chain(n_atoms: int, seed: int, bond_length: float = 1.5) -> Molecule:
    """Unbranched carbon chain with random bond directions; n_atoms - 3 torsions."""
    rng = np.random.default_rng(seed)
    pos = [np.zeros(3)]
    for _ in range(1, n_atoms):
        step = rng.normal(size=3)
        pos.append(pos[-1] + bond_length * step / np.linalg.norm(step))
    atoms = tuple(Atom(i, "C", tuple(float(c) for c in p)) for i, p in enumerate(pos))
    bonds = tuple(Bond(i, i + 1) for i in range(n_atoms - 1))
    return Molecule(atoms, bonds, f"chain{n_atoms}_{seed}")


def branched(seed: int) -> Molecule:
    """Chain with a side branch so fragments are not all single atoms."""
    rng = np.random.default_rng(seed)
    pos = rng.normal(scale=2.0, size=(8, 3))
    atoms = tuple(Atom(i, "C", tuple(float(c) for c in p)) for i, p in enumerate(pos))
    edges = [(0, 1), (1, 2), (2, 3), (3, 4), (2, 5), (5, 6), (6, 7)]
    return Molecule(atoms, tuple(Bond(a, b) for a, b in edges), f"branched_{seed}")


def torsion_graph(mol):
    return build_torsion_graph(mol, find_rotatable_bonds(mol))


@pytest.fixture(scope="session")
def lumateperone():
    return strip_terminal_hydrogens(load_molecule(DATA / "lumateperone.mol2"))


@pytest.fixture(scope="session")
def butane():
    return strip_terminal_hydrogens(load_molecule(DATA / "butane.mol2"))


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        terminalreporter.write_line(results[n])
