import math
import sys

import pytest

from cbpp import Instance
from cbpp.bounds import ff_heuristic
from cbpp.decompose import solution_to_ca_flow
from cbpp.errors import BackendError, SolutionParseError
from cbpp.graphs import build_ca_graph, build_ml_graph
from cbpp.models import EQ, GE, LE, MilpModel, build_af_ca, build_af_ml
from cbpp.solver import (INFEASIBLE, OPTIMAL, TIME_LIMIT, SolveConfig, SolveResult, external_backend,
                         format_solution_text, parse_solution_text, solve_bnb, solve_lp, solve_lp_file)
from cbpp.lpformat import emit_lp

from conftest import worked_example, random_instances

SELF = f"{sys.executable} -m cbpp lp-solve"


def lp_model(integer=False):
    m = MilpModel()
    z = m.add_var("z", integer=integer, key="z")
    m.objective = [(z, 1.0)]
    m.add_constraint("c", [(z, 1.0)], GE, 2.5)
    return m


def test_lp_two_and_a_half():
    sol = solve_lp(lp_model())
    assert sol.status == OPTIMAL and sol.objective == pytest.approx(2.5, abs=1e-9)


def test_lp_infeasible_toy():
    m = MilpModel()
    x = m.add_var("x", integer=False)
    m.objective = [(x, 1.0)]
    m.add_constraint("a", [(x, 1.0)], LE, 0)
    m.add_constraint("b", [(x, 1.0)], GE, 1)
    assert solve_lp(m).status == INFEASIBLE
    assert solve_bnb(m).status == INFEASIBLE


def test_lp_vertex():
    # min x + y, x + 2y >= 3, 3x + y >= 4: optimum at (1, 1)
    m = MilpModel()
    x, y = m.add_var("x", integer=False), m.add_var("y", integer=False)
    m.objective = [(x, 1.0), (y, 1.0)]
    m.add_constraint("r1", [(x, 1.0), (y, 2.0)], GE, 3)
    m.add_constraint("r2", [(x, 3.0), (y, 1.0)], GE, 4)
    sol = solve_lp(m)
    assert sol.objective == pytest.approx(2.0)
    assert list(sol.values) == pytest.approx([1.0, 1.0])


def test_bnb_rounds_up():
    res = solve_bnb(lp_model(integer=True))
    assert res.status == OPTIMAL and res.ub == 3 and res.lb == 3 and res.gap == 0


@pytest.mark.parametrize("kind", ["ca", "ml"])
def test_example_optimum(kind):
    inst = worked_example()
    m = build_af_ca(build_ca_graph(inst), inst) if kind == "ca" else build_af_ml(build_ml_graph(inst), inst)
    res = solve_bnb(m)
    assert res.status == OPTIMAL and res.ub == 3
    assert m.violations(res.incumbent) == []


def test_time_limit_zero():
    inst = worked_example()
    res = solve_bnb(build_af_ca(build_ca_graph(inst), inst), SolveConfig(time_limit_ms=0))
    assert res.status == TIME_LIMIT
    assert res.incumbent is None and res.nodes == 0
    assert res.lb <= 3


def test_time_limit_zero_keeps_hint():
    inst = worked_example()
    g = build_ca_graph(inst)
    m = build_af_ca(g, inst)
    hint = solution_to_ca_flow(ff_heuristic(inst), inst, g).vector()
    res = solve_bnb(m, SolveConfig(time_limit_ms=0, incumbent=hint))
    assert res.status == TIME_LIMIT and res.ub == 3 and res.incumbent is not None


def test_infeasible_hint_ignored():
    inst = worked_example()
    m = build_af_ca(build_ca_graph(inst), inst)
    res = solve_bnb(m, SolveConfig(incumbent=[0.0] * m.num_vars))
    assert res.status == OPTIMAL and res.ub == 3


def test_node_limit_status():
    m = MilpModel()
    xs = [m.add_var(f"x{k}", 0, 1) for k in range(3)]
    z = m.add_var("z", key="z")
    m.objective = [(z, 1.0)]
    # odd cycle: x_i + x_j >= 1 for all pairs, z >= sum x; LP = 1.5, integer 2
    for a in range(3):
        for b in range(a + 1, 3):
            m.add_constraint(f"e{a}{b}", [(xs[a], 1.0), (xs[b], 1.0)], GE, 1)
    m.add_constraint("zz", [(z, 1.0)] + [(x, -1.0) for x in xs], GE, 0)
    assert solve_bnb(m).ub == 2
    limited = solve_bnb(m, SolveConfig(node_limit=1))
    assert limited.status in ("feasible", TIME_LIMIT)
    assert limited.lb <= 2


def test_determinism_and_monotone_trace():
    for inst in random_instances(8, 15, max_copies=8, max_L=20, max_Q=3):
        m = build_af_ca(build_ca_graph(inst), inst)
        a = solve_bnb(m, SolveConfig(trace=True))
        b = solve_bnb(m, SolveConfig(trace=True))
        assert (a.status, a.ub, a.nodes, a.incumbent) == (b.status, b.ub, b.nodes, b.incumbent)
        for parent, child in a.bound_trace:
            assert child >= parent - 1e-7
        assert a.lb <= a.ub


def test_gap_property():
    assert SolveResult("feasible", 3, 4).gap == 0.25
    assert SolveResult("time-limit", 3, math.inf).gap is None


def test_parse_solution_text():
    status, obj, vals = parse_solution_text("# c\nstatus optimal\nobjective 3\nx_0_4_1 2  # trailing\n")
    assert (status, obj, vals) == ("optimal", 3.0, {"x_0_4_1": 2.0})
    assert parse_solution_text("status infeasible\n")[0] == INFEASIBLE


@pytest.mark.parametrize("text,line", [
    ("objective 3\nx 1 2\n", "line 2"),
    ("objective three\n", "line 1"),
    ("objective 3\nx nan\n", "line 2"),
    ("objective 3\nx 1\nx 2\n", "line 3"),
    ("status maybe\n", "line 1"),
])
def test_malformed_solution_names_line(text, line):
    with pytest.raises(SolutionParseError, match=line):
        parse_solution_text(text)


def test_missing_objective():
    with pytest.raises(SolutionParseError, match="objective"):
        parse_solution_text("x 1\n")


def test_format_then_parse():
    inst = worked_example()
    m = build_af_ca(build_ca_graph(inst), inst)
    res = solve_bnb(m)
    status, obj, vals = parse_solution_text(format_solution_text(m, res))
    assert status == OPTIMAL and obj == 3 and vals["z"] == 3


def test_lp_file_round_trip():
    inst = worked_example()
    m = build_af_ml(build_ml_graph(inst), inst)
    _, res = solve_lp_file(emit_lp(m))
    assert res.status == OPTIMAL and res.ub == 3


def fake_solver(tmp_path, body: str) -> str:
    script = tmp_path / "fake.py"
    script.write_text("import sys\nopen(sys.argv[2], 'w').write(" + repr(body) + ")\n")
    return f"{sys.executable} {script}"


def test_external_self_consistency():
    inst = worked_example()
    m = build_af_ca(build_ca_graph(inst), inst)
    res = external_backend(m, SELF, timeout_s=120)
    assert res.status == OPTIMAL and res.ub == solve_bnb(m).ub == 3
    assert m.violations(res.incumbent) == []


def test_external_malformed(tmp_path):
    inst = worked_example()
    m = build_af_ca(build_ca_graph(inst), inst)
    with pytest.raises(SolutionParseError, match="line 2"):
        external_backend(m, fake_solver(tmp_path, "objective 3\nthis is wrong\n"))


def test_external_infeasible_claim_rejected(tmp_path):
    inst = worked_example()
    g = build_ca_graph(inst)
    m = build_af_ca(g, inst)
    hint = solution_to_ca_flow(ff_heuristic(inst), inst, g).vector()
    with pytest.raises(BackendError, match="infeasib"):
        external_backend(m, fake_solver(tmp_path, "status infeasible\n"), hint=hint)


def test_external_bad_point(tmp_path):
    inst = worked_example()
    m = build_af_ca(build_ca_graph(inst), inst)
    with pytest.raises(BackendError, match="violates"):
        external_backend(m, fake_solver(tmp_path, "objective 1\nz 1\n"))
    with pytest.raises(BackendError, match="unknown variable"):
        external_backend(m, fake_solver(tmp_path, "objective 1\nbogus 1\n"))


def test_external_command_failure(tmp_path):
    m = lp_model(integer=True)
    with pytest.raises(BackendError):
        external_backend(m, f"{sys.executable} -c 'import sys; sys.exit(3)'")
    with pytest.raises(BackendError):
        external_backend(m, str(tmp_path / "does-not-exist"))


def test_time_limit_reaches_lp_solver():
    from cbpp import bench

    inst = bench.generate(bench.GeneratorConfig("uniform", 120, 300, 3, ("0.1", "0.8"), seed=5))
    g = build_ca_graph(inst)
    m = build_af_ca(g, inst)
    hint = solution_to_ca_flow(ff_heuristic(inst), inst, g).vector()
    res = solve_bnb(m, SolveConfig(time_limit_ms=5, incumbent=hint))
    assert res.status in (TIME_LIMIT, OPTIMAL)
    assert res.lb <= res.ub and res.elapsed_ms < 2000
