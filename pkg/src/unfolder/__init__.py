"""Ligand unfolding by maximising pairwise squared distances over discrete torsion angles.

The usual flow is :func:`run_pipeline` on a :class:`RunConfig`; the modules
underneath can also be used one step at a time.
"""

from .baseline import GreedyTrace, greedy_unfold
from .errors import UnfolderError
from .geometry import TorsionAssignment, make_angle_table, objective_volume, volume_gain_percent
from .hubo import build_hubo
from .molio import (
    build_torsion_graph,
    find_rotatable_bonds,
    load_molecule,
    select_median_atoms,
    strip_terminal_hydrogens,
)
from .pipeline import Mode, RunConfig, RunReport, run_pipeline, threshold_sweep
from .polynomial import BinaryPolynomial, BinaryVar
from .quadratize import QuboModel, to_qubo
from .solver import AnnealParams, select_best, simulated_anneal

__version__ = "0.1.0"

__all__ = [
    "AnnealParams",
    "BinaryPolynomial",
    "BinaryVar",
    "GreedyTrace",
    "Mode",
    "QuboModel",
    "RunConfig",
    "RunReport",
    "TorsionAssignment",
    "UnfolderError",
    "build_hubo",
    "build_torsion_graph",
    "find_rotatable_bonds",
    "greedy_unfold",
    "load_molecule",
    "make_angle_table",
    "objective_volume",
    "run_pipeline",
    "select_best",
    "select_median_atoms",
    "simulated_anneal",
    "strip_terminal_hydrogens",
    "threshold_sweep",
    "to_qubo",
    "volume_gain_percent",
]
