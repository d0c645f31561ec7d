import pytest

from cbpp import Instance
from cbpp.errors import ModelError
from cbpp.graphs import build_ca_graph, build_ml_graph, full_points
from cbpp.models import EQ, LE, MilpModel, build_af_ca, build_af_ml
from cbpp.oracle import brute_force_opt
from cbpp.solver import solve_bnb

from conftest import worked_example, random_instances


def rows(model, prefix):
    return [c for c in model.constraints if c.name.startswith(prefix)]


def test_example_ml_demand_rows():
    inst = worked_example()
    m = build_af_ml(build_ml_graph(inst, full_points(inst)), inst)
    dem = rows(m, "dem_")
    assert [c.rhs for c in dem] == [2, 1, 1, 1]
    assert all(c.sense == EQ for c in dem)
    assert m.variables[m.z].ub == 5


def test_example_ca_color_rows_skip_loss_color():
    inst = worked_example()
    g = build_ca_graph(inst, full_points(inst))
    m = build_af_ca(g, inst)
    color_rows = rows(m, "color_")
    assert color_rows and all(c.sense == LE for c in color_rows)
    for c in color_rows:
        _, j, q = c.name.split("_")
        assert 0 < int(j) < 8 and 1 <= int(q) <= 3


def recount_ca(inst, g):
    """Rows and columns from the arc list alone, without the graph's indices."""
    L, Q = inst.capacity, inst.num_colors
    arcs = [(a.tail, a.head, a.color) for a in g.arcs]
    touched = {p for a in arcs for p in a[:2]} | {0, L}
    color_rows = sum(1 for j in g.points if 0 < j < L for q in range(1, Q + 1)
                     if any(h == j and c == q for _, h, c in arcs))
    return len(arcs) + 1, len(touched) + color_rows + inst.m


def recount_ml(inst, g):
    L = inst.capacity
    pairs = [(a.tail, a.head) for a in g.arcs]
    touched = {v for p in pairs for v in p if v[0] != L} | {(0, 0)}
    return len(pairs) + 1, len(touched) + 1 + inst.m


def test_row_column_recount():
    for inst in random_instances(21, 40, max_copies=8, max_L=15, max_Q=3):
        for pts in (None, full_points(inst)):
            g = build_ca_graph(inst, pts)
            m = build_af_ca(g, inst)
            assert (m.num_vars, len(m.constraints)) == recount_ca(inst, g)
            g2 = build_ml_graph(inst, pts)
            m2 = build_af_ml(g2, inst)
            assert (m2.num_vars, len(m2.constraints)) == recount_ml(inst, g2)


def test_names_are_stable():
    inst = worked_example()
    m = build_af_ca(build_ca_graph(inst), inst)
    assert m.names()[-1] == "z" and m.names()[0] == "x_0_4_1"
    ml = build_af_ml(build_ml_graph(inst), inst)
    assert ml.names()[0] == "x_0_0_4_1"


@pytest.mark.parametrize("builder,graph", [(build_af_ca, build_ca_graph), (build_af_ml, build_ml_graph)])
def test_single_full_item(builder, graph):
    inst = Instance.from_tuples(6, 2, [(6, 4, 2)])
    res = solve_bnb(builder(graph(inst), inst))
    assert res.status == "optimal" and res.ub == 4


@pytest.mark.parametrize("builder,graph", [(build_af_ca, build_ca_graph), (build_af_ml, build_ml_graph)])
def test_single_color_needs_one_bin_per_copy(builder, graph):
    inst = Instance.from_tuples(10, 3, [(1, 2, 2), (2, 1, 2), (3, 2, 2)])
    res = solve_bnb(builder(graph(inst), inst))
    assert res.ub == brute_force_opt(inst)[0] == 5


def test_structural_mismatch():
    inst = worked_example()
    other = Instance.from_tuples(9, 3, [(4, 2, 1)])
    with pytest.raises(ModelError):
        build_af_ca(build_ca_graph(other), inst)
    with pytest.raises(ModelError):
        build_af_ml(build_ml_graph(other), inst)
    # same capacity and colors but different items
    swapped = Instance.from_tuples(8, 3, [(3, 2, 1), (3, 1, 2), (3, 1, 3), (2, 1, 3)])
    with pytest.raises(ModelError):
        build_af_ca(build_ca_graph(swapped), inst)


def test_model_container_errors():
    m = MilpModel()
    x = m.add_var("x", key="x")
    with pytest.raises(ModelError):
        m.add_var("y", key="x")
    with pytest.raises(ModelError):
        m.add_constraint("r", [(5, 1.0)], LE, 0)
    with pytest.raises(ModelError):
        m.add_constraint("r", [(x, 1.0)], "!=", 0)
    with pytest.raises(ModelError):
        _ = m.z


def test_violations_report():
    m = MilpModel()
    x = m.add_var("x", 0, 3)
    m.add_constraint("r", [(x, 1.0)], EQ, 2)
    assert m.violations([2.0]) == []
    assert len(m.violations([4.0])) == 2
