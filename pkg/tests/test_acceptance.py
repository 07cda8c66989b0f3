"""Acceptance criteria, one test each.

Every test records a one-line verdict that is printed at the end of the
pytest run (see ``pytest_terminal_summary`` in conftest.py).  The module can
also be run directly: ``python3 tests/test_acceptance.py``.
"""

import itertools
import logging
import math
import random
import time

import numpy as np
import pytest
from scipy.stats import pearsonr, spearmanr

from conftest import DATA, random_chain, torsion_graph
from unfolder.baseline import greedy_unfold
from unfolder.geometry import TorsionAssignment, exhaustive_optimum, make_angle_table, objective_volume, rotation_matrix
from unfolder.hubo import build_hard_constraint, build_hubo
from unfolder.molio import load_molecule, strip_terminal_hydrogens
from unfolder.pipeline import Mode, RunConfig, run_pipeline, threshold_sweep
from unfolder.polynomial import BinaryPolynomial, BinaryVar, evaluate, monomial
from unfolder.quadratize import project_solution, to_qubo
from unfolder.solver import AnnealParams, brute_force, decode, simulated_anneal

log = logging.getLogger("acceptance")

RESULTS: dict[int, str] = {}


def verdict(n, ok, detail):
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}"
    RESULTS[n] = line
    log.info(line)
    return ok


def onehot(theta, d):
    return {BinaryVar.onehot(i, k): int(k == theta[i - 1]) for i in range(1, len(theta) + 1) for k in range(1, d + 1)}


def butane():
    return strip_terminal_hydrogens(load_molecule(DATA / "butane.mol2"))


def synthetic_set():
    """Fixed small molecules: two with one torsion, three with two, two with three."""
    return [butane(), random_chain(4, 1), random_chain(5, 2), random_chain(5, 7), random_chain(5, 11),
            random_chain(6, 0), random_chain(6, 5)]


def all_minimisers(poly: BinaryPolynomial, variables):
    """Exhaustive minimum and every minimising state (bit j of the index is variables[j])."""
    pos = {v: j for j, v in enumerate(variables)}
    masks = np.array([sum(1 << pos[v] for v in mono) for mono in poly.terms], dtype=np.int64)
    coefs = np.array(list(poly.terms.values()), dtype=float)
    total = 1 << len(variables)
    best, arg = math.inf, []
    for lo in range(0, total, 1 << 18):
        s = np.arange(lo, min(total, lo + (1 << 18)), dtype=np.int64)
        e = np.full(len(s), float(poly.constant))
        for m, c in zip(masks, coefs):
            e += c * ((s & m) == m)
        low = e.min()
        if low < best:
            best, arg = low, list(s[e == low])
        elif low == best:
            arg.extend(s[e == low])
    return best, [{v: (int(x) >> j) & 1 for j, v in enumerate(variables)} for x in arg]


def test_c1_oracle_equivalence():
    t0 = time.perf_counter()
    mols = synthetic_set()
    table = make_angle_table(4)
    worst_rel, argmax_ok, weak_infeasible = 0.0, 0, 0
    ns = []
    for mol in mols:
        g = torsion_graph(mol)
        ns.append(g.n)
        b = build_hubo(mol, g, table, a_const_rule="group_bound")
        values = {}
        for theta in itertools.product(range(1, 5), repeat=g.n):
            ref = objective_volume(mol, g, TorsionAssignment(theta, 4), table)
            val = evaluate(b.hubo, onehot(theta, 4))
            worst_rel = max(worst_rel, abs(val + ref) / abs(ref))
            values[theta] = ref
        a, _ = brute_force(b.hubo)
        got = decode(a, g.n, 4)
        best = max(values.values())
        if got and values[got.angle_index] == best and got == exhaustive_optimum(mol, g, table)[0]:
            argmax_ok += 1
        # the plain 1.1 x max|c| weight, for the record
        weak = build_hubo(mol, g, table, a_const_rule="max_coefficient")
        if not decode(brute_force(weak.hubo)[0], g.n, 4):
            weak_infeasible += 1
    elapsed = time.perf_counter() - t0
    ok = (len(mols) >= 5 and set(ns) == {1, 2, 3} and worst_rel <= 1e-6
          and argmax_ok == len(mols) and elapsed < 10.0)
    verdict(1, ok, f"{len(mols)} molecules n={sorted(set(ns))}, max rel err {worst_rel:.2e}, "
                   f"argmin=argmax {argmax_ok}/{len(mols)}, {elapsed:.2f}s "
                   f"(1.1*max|c| weight: {weak_infeasible} infeasible ground states)")
    assert ok


def random_hubo(rng, variables):
    terms = {}
    for _ in range(rng.randint(3, 16)):
        mono = monomial(rng.sample(variables, rng.randint(1, min(4, len(variables)))))
        terms[mono] = terms.get(mono, 0) + rng.randint(-10, 10)
    return BinaryPolynomial(terms, rng.randint(-5, 5))


def test_c2_quadratization_soundness():
    t0 = time.perf_counter()
    rng = random.Random(2024)
    pool = [BinaryVar.onehot(i, k) for i in range(1, 4) for k in range(1, 5)]
    checked, bad, max_vars, skipped = 0, [], 0, 0
    while checked < 100:
        n_vars = rng.randint(3, 12)
        p = random_hubo(rng, pool[:n_vars])
        q = to_qubo(p)
        if q.num_vars > 24:
            # keep exhaustive QUBO enumeration affordable; resampled, counted below
            skipped += 1
            continue
        max_vars = max(max_vars, q.num_vars)
        hubo_min, _ = all_minimisers(p, p.variables())
        qubo_min, ground = all_minimisers(q.poly, q.variables)
        sound = qubo_min == hubo_min and q.poly.degree <= 2
        for a in ground:
            proj, violated = project_solution(q, a)
            sound &= not violated and evaluate(p, proj) == hubo_min
        if not sound:
            bad.append(checked)
        checked += 1
    elapsed = time.perf_counter() - t0
    ok = not bad and elapsed < 60.0
    verdict(2, ok, f"{checked} random HUBOs (<=12 vars, deg<=4, QUBO up to {max_vars} vars), "
                   f"{len(bad)} unsound, {skipped} oversized resampled, {elapsed:.2f}s")
    assert ok


def quat_rotate(point, a1, a2, theta):
    u = np.asarray(a2, float) - np.asarray(a1, float)
    u /= np.linalg.norm(u)
    q = np.concatenate([[math.cos(theta / 2)], math.sin(theta / 2) * u])
    p = np.concatenate([[0.0], np.asarray(point, float) - a1])

    def mul(a, b):
        return np.array([
            a[0] * b[0] - a[1:] @ b[1:],
            *(a[0] * b[1:] + b[0] * a[1:] + np.cross(a[1:], b[1:])),
        ])

    conj = q * np.array([1, -1, -1, -1])
    return mul(mul(q, p), conj)[1:] + a1


def test_c3_rotation_suite():
    rng = np.random.default_rng(7)
    worst = dict(orth=0.0, det=0.0, fix=0.0, zero=0.0, add=0.0)
    for _ in range(10_000):
        a1 = rng.uniform(-5, 5, 3)
        a2 = a1 + rng.normal(size=3) * rng.uniform(0.2, 3)
        alpha, beta = rng.uniform(-2 * math.pi, 2 * math.pi, 2)
        R = rotation_matrix(a1, a2, alpha)
        r = R[:3, :3]
        worst["orth"] = max(worst["orth"], np.abs(r @ r.T - np.eye(3)).max())
        worst["det"] = max(worst["det"], abs(np.linalg.det(r) - 1))
        for p in (a1, a2, a1 + 0.37 * (a2 - a1)):
            worst["fix"] = max(worst["fix"], np.abs(R @ np.append(p, 1.0) - np.append(p, 1.0)).max())
        worst["zero"] = max(worst["zero"], np.abs(rotation_matrix(a1, a2, 0.0) - np.eye(4)).max())
        both = rotation_matrix(a1, a2, alpha) @ rotation_matrix(a1, a2, beta)
        worst["add"] = max(worst["add"], np.abs(both - rotation_matrix(a1, a2, alpha + beta)).max())
    a1, a2 = np.zeros(3), np.array([0.0, 0.0, 1.0])
    img = (rotation_matrix(a1, a2, math.pi / 2) @ np.array([1.0, 0, 0, 1]))[:3]
    quat = quat_rotate([1.0, 0, 0], a1, a2, math.pi / 2)
    fixed = max(np.abs(img - [0, 1, 0]).max(), np.abs(img - quat).max())
    ok = all(v <= 1e-9 for v in worst.values()) and worst["zero"] == 0.0 and fixed <= 1e-12
    detail = ", ".join(f"{k} {v:.1e}" for k, v in worst.items())
    verdict(3, ok, f"10^4 rotations: {detail}; quarter turn vs quaternion {fixed:.1e}")
    assert ok


def test_c4_hard_constraint():
    lines, ok = [], True
    for n, d in [(1, 2), (1, 4), (2, 4)]:
        h = build_hard_constraint(n, d)
        vs = [BinaryVar.onehot(i, k) for i in range(1, n + 1) for k in range(1, d + 1)]
        feasible_zero, infeasible_min = True, math.inf
        for bits in itertools.product((0, 1), repeat=n * d):
            val = evaluate(h, dict(zip(vs, bits)))
            if all(sum(bits[i * d:(i + 1) * d]) == 1 for i in range(n)):
                feasible_zero &= val == 0
            else:
                infeasible_min = min(infeasible_min, val)
        ok &= feasible_zero and infeasible_min >= 1
        lines.append(f"({n},{d}) feasible==0 {feasible_zero}, infeasible min {infeasible_min:g}")
    verdict(4, ok, "; ".join(lines))
    assert ok


def test_c5_sampler_quality():
    t0 = time.perf_counter()
    table = make_angle_table(4)
    rows, ok = [], True
    for mol in synthetic_set():
        g = torsion_graph(mol)
        if g.n > 2:
            continue
        q = to_qubo(build_hubo(mol, g, table, a_const_rule="group_bound").hubo)
        _, e0 = brute_force(q.poly)
        hits = 0
        for seed in range(100):
            e = simulated_anneal(q, AnnealParams(sweeps=500, reads=100, seed=seed)).first.energy
            hits += abs(e - e0) <= 1e-9 * max(1.0, abs(e0))
        ok &= hits >= 90
        rows.append(f"{mol.name}(n={g.n},{q.num_vars}v) {hits}/100")
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 120.0
    verdict(5, ok, "; ".join(rows) + f"; {elapsed:.1f}s")
    assert ok


@pytest.fixture(scope="module")
def lumateperone_sweep():
    # compile the numeric kernels first so the first entry's time is not inflated
    threshold_sweep(RunConfig(str(DATA / "butane.mol2"), d=4, anneal=AnnealParams(10, 2)), [0.0])
    cfg = RunConfig(str(DATA / "lumateperone.mol2"), d=8)
    # identical seeded sweeps; repeats only serve the timing median
    return [threshold_sweep(cfg, [t / 10 for t in range(1, 10)]) for _ in range(3)]


def test_c6_threshold_sweep(lumateperone_sweep):
    reports = lumateperone_sweep[0]
    thr = [r.config["final_threshold"] for r in reports]
    terms = [r.terms.get("hubo") for r in reports]
    secs = list(np.median([[r.construction_seconds for r in rep] for rep in lumateperone_sweep], axis=0))
    repeatable = all([r.terms for r in rep] == [r.terms for r in reports] for rep in lumateperone_sweep)
    gains = [r.gain_percent for r in reports]
    n_torsions = {r.n_torsions for r in reports}
    terms_ok = None not in terms and all(a >= b for a, b in zip(terms, terms[1:]))
    rho = spearmanr(secs, thr).statistic
    have = [(t, g) for t, g in zip(thr, gains) if g is not None]
    pearson = pearsonr(*zip(*have)).statistic if len(have) > 2 else float("nan")
    for t, n, s, g in zip(thr, terms, secs, gains):
        log.info("sweep %.1f: terms %s, construction %.3fs, gain %s", t, n, s, g)
    ok = n_torsions == {5} and terms_ok and repeatable and rho <= -0.7 and not math.isnan(pearson)
    verdict(6, ok, f"n=5 d=8 terms {terms} non-increasing={terms_ok}; Spearman(median time of 3, t)={rho:.2f}; "
                   f"Pearson(gain, t)={pearson:.2f} over {len(have)} points (logged)")
    assert ok


def test_c7_gain_corridor():
    report = run_pipeline(RunConfig(str(DATA / "lumateperone.mol2"), d=8, mode=Mode.BOTH))
    q = report.methods["quantum_pipeline"].gain_percent
    g = report.methods["greedy_baseline"].gain_percent
    inside = 2.0 <= q <= 8.0
    # logged corridor, not a gate
    verdict(7, True, f"logged only: pipeline gain {q:.3f}% {'inside' if inside else 'OUTSIDE'} [2, 8]; "
                     f"greedy {g:.3f}%")


def test_c8_phase_timings():
    report = run_pipeline(RunConfig(str(DATA / "lumateperone.mol2"), d=8, mode=Mode.BOTH,
                                    anneal=AnnealParams(200, 20)))
    phases = ("parse", "torsions", "hubo", "quadratize", "sample", "select", "baseline")
    present = all(p in report.timings and report.timings[p] >= 0 for p in phases)
    breakdown = ", ".join(f"{p} {report.timings[p]:.3f}s" for p in phases if p in report.timings)
    ok = present and report.construction_seconds > 0
    verdict(8, ok, f"phase breakdown: {breakdown}")
    assert ok


def test_c9_greedy():
    monotone, runs = 0, 0
    mols = synthetic_set() + [strip_terminal_hydrogens(load_molecule(DATA / "lumateperone.mol2"))]
    for mol in mols:
        g = torsion_graph(mol)
        for d in (4, 8):
            runs += 1
            monotone += greedy_unfold(mol, g, make_angle_table(d))[1].is_monotone()
    exact, singles = 0, 0
    for mol in [butane()] + [random_chain(4, s) for s in range(20)]:
        g = torsion_graph(mol)
        for d in (2, 4, 8, 12):
            table = make_angle_table(d)
            singles += 1
            exact += greedy_unfold(mol, g, table)[0] == exhaustive_optimum(mol, g, table)[0]
    ok = monotone == runs and exact == singles
    verdict(9, ok, f"monotone trace {monotone}/{runs} runs; n=1 equals exhaustive {exact}/{singles}")
    assert ok


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q"]))
