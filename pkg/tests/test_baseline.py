import itertools

import pytest

from conftest import branched, random_chain, torsion_graph
from unfolder.baseline import greedy_unfold
from unfolder.geometry import TorsionAssignment, exhaustive_optimum, make_angle_table, objective_volume


def test_no_torsions():
    m = random_chain(3, 0)
    theta, trace = greedy_unfold(m, torsion_graph(m), make_angle_table(8))
    assert theta.angle_index == ()
    assert len(trace) == 0 and trace.passes == 0


@pytest.mark.parametrize("d", [2, 4, 8, 16])
def test_single_torsion_is_exhaustive(butane, d):
    g = torsion_graph(butane)
    table = make_angle_table(d)
    theta, _ = greedy_unfold(butane, g, table)
    best, val = exhaustive_optimum(butane, g, table)
    assert theta == best
    assert objective_volume(butane, g, theta, table) == val


@pytest.mark.parametrize("seed", range(5))
def test_single_torsion_random(seed):
    m = random_chain(4, seed)
    g = torsion_graph(m)
    table = make_angle_table(8)
    assert greedy_unfold(m, g, table)[0] == exhaustive_optimum(m, g, table)[0]


@pytest.mark.parametrize("mol", [random_chain(6, 4), random_chain(7, 2), branched(5)], ids=["n3", "n4", "branched"])
def test_trace_monotone_and_final(mol):
    g = torsion_graph(mol)
    table = make_angle_table(4)
    theta, trace = greedy_unfold(mol, g, table)
    assert trace.is_monotone()
    assert trace.steps[-1].objective == pytest.approx(objective_volume(mol, g, theta, table))
    folded = objective_volume(mol, g, TorsionAssignment.folded(g.n, 4), table)
    assert trace.steps[0].objective >= folded


def test_local_optimum_not_global():
    # a known instance where coordinate ascent stalls
    m = random_chain(6, 4)
    g = torsion_graph(m)
    table = make_angle_table(4)
    theta, _ = greedy_unfold(m, g, table)
    got = objective_volume(m, g, theta, table)
    _, best = exhaustive_optimum(m, g, table)
    assert got < best - 1.0
    # but no single-coordinate move improves it
    for i, k in itertools.product(range(g.n), range(1, 5)):
        trial = list(theta.angle_index)
        trial[i] = k
        assert objective_volume(m, g, TorsionAssignment(tuple(trial), 4), table) <= got


def test_pass_limit():
    m = random_chain(7, 0)
    g = torsion_graph(m)
    _, trace = greedy_unfold(m, g, make_angle_table(4), passes=1)
    assert trace.passes == 1 and len(trace) == g.n
    with pytest.raises(ValueError):
        greedy_unfold(m, g, make_angle_table(4), passes=0)


def test_csv(butane):
    _, trace = greedy_unfold(butane, torsion_graph(butane), make_angle_table(8))
    lines = trace.to_csv().splitlines()
    assert lines[0] == "step,torsion,angle,objective"
    assert len(lines) == len(trace) + 1
    step, torsion, angle, obj = lines[1].split(",")
    assert (int(step), int(torsion)) == (1, 1)
    assert float(obj) == trace.steps[0].objective
