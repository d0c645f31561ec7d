"""Acceptance criteria 1-9. Each test prints one PASS/FAIL line."""

import itertools
import math
import random
import time
from functools import lru_cache

import pytest

from cbpp import (Instance, ItemMultiset, Solution, alternate, discrepancy, ff_heuristic, is_alternatable,
                  lower_bound, majority_condition, verify_solution)
from cbpp import bench
from cbpp.core import has_adjacent_repeat
from cbpp.decompose import (FlowAssignment, ca_violations, decompose_af, map_ca_to_ml, map_ml_to_ca,
                            paths_to_solution, residual_after)
from cbpp.graphs import build_ca_graph, build_ml_graph, full_points, normal_patterns
from cbpp.models import build_af_ca, build_af_ml
from cbpp.oracle import brute_force_alternatable, brute_force_opt
from cbpp.pipeline import solve_instance
from cbpp.solver import OPTIMAL, solve_bnb, solve_lp

from conftest import EXAMPLE_BINS, worked_example, random_instance

RESIDUAL_TOL = 1e-9
ROW_TOL = 1e-7
LP_TOL = 1e-6


@pytest.fixture
def report(capsys):
    def emit(n: int, ok: bool, detail: str):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {n}: {detail}")
        assert ok, detail
    return emit


def models(inst, points=None):
    ca, ml = build_ca_graph(inst, points), build_ml_graph(inst, points)
    return ca, build_af_ca(ca, inst), ml, build_af_ml(ml, inst)


def integer_checks(inst, g, incumbent):
    """Decomposition of an integer CA flow: sum of multiplicities, residual, alternation."""
    flow = FlowAssignment.from_vector(g, incumbent)
    paths = decompose_af(flow)
    x, z = residual_after(flow, paths)
    ok = sum(p.multiplicity for p in paths) == flow.z
    ok &= max(map(abs, x), default=0) <= RESIDUAL_TOL and abs(z) <= RESIDUAL_TOL
    ok &= all(not has_adjacent_repeat([a.color for a in p.arcs if a.item_id is not None]) for p in paths)
    ok &= verify_solution(inst, paths_to_solution(paths, inst)).ok
    return ok


# -- shared instance sets ----------------------------------------------------

@lru_cache(maxsize=None)
def oracle_set():
    rng = random.Random(20240601)
    return tuple(random_instance(rng, max_copies=8, max_L=20, max_Q=4) for _ in range(200))


@lru_cache(maxsize=None)
def oracle_results():
    """Per instance: oracle optimum and both B&B results over normal patterns, no warm start."""
    out = []
    for inst in oracle_set():
        ca, mca, ml, mml = models(inst)
        out.append((inst, brute_force_opt(inst)[0], ca, solve_bnb(mca), ml, solve_bnb(mml)))
    return out


@lru_cache(maxsize=None)
def relaxation_set():
    rng = random.Random(777)
    return tuple(random_instance(rng, max_copies=12, max_L=30, max_Q=4, max_m=6) for _ in range(50))


# -- criteria ----------------------------------------------------------------

def test_criterion_1_worked_example(report):
    inst = worked_example()
    target = Solution(EXAMPLE_BINS).canonical()
    ok, notes = True, []
    for model in ("ca", "ml"):
        t0 = time.perf_counter()
        out = solve_instance(inst, model)
        dt = time.perf_counter() - t0
        good = (out.result.status == OPTIMAL and out.value == 3 and dt < 1.0
                and out.solution.canonical() == target and out.verification.ok)
        ok &= good
        notes.append(f"{model} {out.result.status} z={out.value:g} {dt * 1000:.0f}ms")
    # the same optimum without the heuristic warm start
    _, mca, _, mml = models(inst)
    cold = [solve_bnb(m).ub for m in (mca, mml)]
    ok &= cold == [3, 3]
    report(1, ok, f"worked example: optimum 3, bins {{1 2}}, {{1 3}}, {{4}} ({'; '.join(notes)}; cold start {cold})")


def test_criterion_2_alternation_sweep(report):
    t0 = time.perf_counter()
    cases = mismatches = bad_perm = 0
    for Q in (2, 3, 4):
        inst = Instance.from_tuples(100, Q, [(1, 7, q) for q in range(1, Q + 1)])
        for counts in itertools.product(range(8), repeat=Q):
            n = sum(counts)
            if n > 7:
                continue
            s = ItemMultiset({q: c for q, c in enumerate(counts, start=1) if c})
            cases += 1
            rep = discrepancy(s, inst)
            crit = counts[rep.critical_color - 1] if n else 0
            answers = {brute_force_alternatable(s, inst), is_alternatable(s, inst), majority_condition(s, inst),
                       crit <= math.ceil(n / 2), rep.delta <= 1}
            if len(answers) != 1:
                mismatches += 1
            if is_alternatable(s, inst):
                pat = alternate(s, inst)
                if sorted(pat.ordered) != s.copies() or has_adjacent_repeat(pat.colors(inst)):
                    bad_perm += 1
    dt = time.perf_counter() - t0
    report(2, mismatches == 0 and bad_perm == 0 and dt < 30,
           f"{cases} multisets, {mismatches} mismatches, {bad_perm} bad permutations, {dt:.2f}s")


def test_criterion_3_oracle_equivalence(report):
    t0 = time.perf_counter()
    res = oracle_results()
    dt = time.perf_counter() - t0
    bad = [k for k, (_, opt, _, rca, _, rml) in enumerate(res)
           if not (rca.status == rml.status == OPTIMAL and rca.ub == rml.ub == opt)]
    copies = max(inst.total_copies for inst in oracle_set())
    report(3, not bad and dt < 300,
           f"200 instances (max {copies} copies): CA == ML == oracle, {len(bad)} mismatches, {dt:.1f}s")


def test_criterion_4_relaxation_equality(report):
    worst, fails, fractional = 0.0, 0, 0
    for inst in relaxation_set():
        _, mca, _, mml = models(inst)
        a, b = solve_lp(mca).objective, solve_lp(mml).objective
        worst = max(worst, abs(a - b))
        fractional += abs(a - round(a)) > LP_TOL
        opt = solve_bnb(mca).ub
        if math.ceil(a - LP_TOL) > opt or solve_bnb(mml).ub != opt:
            fails += 1
    report(4, worst <= LP_TOL and fails == 0,
           f"50 instances ({fractional} with fractional LP value): max |LP(ml) - LP(ca)| = {worst:.2e}, "
           f"ceil(LP) <= optimum violated {fails} times")


def test_criterion_5_decomposition(report):
    ok = True
    inst = worked_example()
    ca, mca, _, _ = models(inst)
    ok &= integer_checks(inst, ca, solve_bnb(mca).incumbent)
    ok &= integer_checks(inst, ca, solve_instance(inst, "ca").result.incumbent)
    n_int = 2
    for inst, _, ca, rca, ml, rml in oracle_results():
        ok &= integer_checks(inst, ca, rca.incumbent)
        mapped = map_ml_to_ca(FlowAssignment.from_vector(ml, rml.incumbent), ca)
        ok &= integer_checks(inst, ca, mapped.vector())
        n_int += 2
    # fractional relaxation optima
    rng = random.Random(99)
    frac, worst, tried = 0, 0.0, 0
    while frac < 20 and tried < 2000:
        tried += 1
        inst = random_instance(rng, max_copies=12, max_L=30, max_Q=4, max_m=6)
        g = build_ca_graph(inst)
        values = [float(v) for v in solve_lp(build_af_ca(g, inst)).values]
        if all(abs(v - round(v)) <= 1e-6 for v in values):
            continue
        frac += 1
        flow = FlowAssignment.from_vector(g, values)
        paths = decompose_af(flow)
        x, z = residual_after(flow, paths)
        worst = max(worst, max(map(abs, x)), abs(z))
        ok &= abs(sum(p.multiplicity for p in paths) - flow.z) <= RESIDUAL_TOL
        ok &= all(not has_adjacent_repeat([a.color for a in p.arcs if a.item_id is not None]) for p in paths)
    ok &= frac == 20 and worst <= RESIDUAL_TOL
    report(5, bool(ok), f"{n_int} integer flows, {frac} fractional flows, max residual {worst:.1e}")


def test_criterion_6_relaxation_maps(report):
    fails = 0
    for inst in relaxation_set():
        ca, mca, ml, mml = models(inst)
        ml_flow = FlowAssignment.from_vector(ml, [float(v) for v in solve_lp(mml).values])
        to_ca = map_ml_to_ca(ml_flow, ca)
        ca_flow = FlowAssignment.from_vector(ca, [float(v) for v in solve_lp(mca).values])
        to_ml = map_ca_to_ml(ca_flow, ml)
        if to_ca.z != ml_flow.z or to_ml.z != ca_flow.z:
            fails += 1
        if mca.violations(to_ca.vector(), ROW_TOL) or ca_violations(to_ca, ROW_TOL):
            fails += 1
        if mml.violations(to_ml.vector(), ROW_TOL):
            fails += 1
    report(6, fails == 0, f"50 instances, ML->CA and CA->ML: {fails} objective or row failures")


def subset_sums(inst):
    out = set()
    for mult in itertools.product(*(range(it.demand + 1) for it in inst.items)):
        x = sum(k * it.length for k, it in zip(mult, inst.items))
        if x <= inst.capacity:
            out.add(x)
    return tuple(sorted(out))


def test_criterion_7_normal_patterns(report):
    diff = 0
    for inst, opt, _, rca, _, rml in oracle_results():
        full = full_points(inst)
        _, fca, _, fml = models(inst, full)
        if not (solve_bnb(fca).ub == rca.ub == solve_bnb(fml).ub == rml.ub == opt):
            diff += 1
    sets = [inst for inst in oracle_set() + relaxation_set() if inst.capacity <= 30]
    point_fails = sum(normal_patterns(inst) != subset_sums(inst) for inst in sets)
    report(7, diff == 0 and point_fails == 0,
           f"reduced vs full optima differ on {diff}/200; point sets wrong on {point_fails}/{len(sets)}")


def test_criterion_8_generators(report, tmp_path):
    cu, cz = bench.uniform_grid(), bench.zipf_grid()
    a = bench.write_set(cu + cz, tmp_path / "a")
    b = bench.write_set(cu + cz, tmp_path / "b")
    same = all(p.read_bytes() == q.read_bytes() for p, q in zip(a, b)) and len(a) == len(b) == 420
    # donor bin packing solutions: random items split into bins that respect the capacity
    rng = random.Random(8)
    adapted_bins = failures = 0
    for _ in range(200):
        cap = rng.randint(20, 200)
        bins = []
        for _ in range(rng.randint(1, 12)):
            room, content = cap, []
            while room and (not content or rng.random() < 0.8):
                l = rng.randint(1, room)
                content.append(l)
                room -= l
            bins.append(content)
        lengths = [l for b_ in bins for l in b_]
        rng.shuffle(lengths)
        inst = bench.adapt_bpplib(lengths, cap, bins)
        flags = bench.adapted_bins_alternate(inst, bins)
        adapted_bins += len(flags)
        failures += flags.count(False)
        failures += not verify_solution(inst, bench.adapted_solution(inst, bins)).ok
    ok = len(cu) == 360 and len(cz) == 60 and same and failures == 0
    report(8, ok, f"{len(cu)} uniform + {len(cz)} Zipf, byte-identical={same}, "
                  f"{adapted_bins} adapted bins with {failures} failures")


def test_criterion_9_bounds_sandwich(report):
    fails = 0
    for inst, opt, *_ in oracle_results():
        sol = ff_heuristic(inst)
        if not (lower_bound(inst) <= opt <= len(sol)) or not verify_solution(inst, sol).ok:
            fails += 1
    report(9, fails == 0, f"lower_bound <= optimum <= heuristic on 200 instances, {fails} failures")
