"""A small solver-agnostic MILP container and the two arc-flow formulations."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Hashable

from .core import Instance
from .errors import ModelError
from .graphs import CaGraph, LOSS_KIND, MlGraph

LE, EQ, GE = "<=", "=", ">="


@dataclass(slots=True)
class Variable:
    name: str
    lb: float = 0.0
    ub: float = math.inf
    integer: bool = True


@dataclass(slots=True)
class Constraint:
    name: str
    terms: list[tuple[int, float]]
    sense: str
    rhs: float


@dataclass
class MilpModel:
    """Minimization model over bounded variables.

    ``var_index`` maps an arc identity (or the string ``"z"``) to a column.
    For arc-flow models column ``k`` is arc ``k`` of the graph and ``z`` is
    the last column.
    """

    name: str = "model"
    variables: list[Variable] = field(default_factory=list)
    constraints: list[Constraint] = field(default_factory=list)
    objective: list[tuple[int, float]] = field(default_factory=list)
    var_index: dict[Hashable, int] = field(default_factory=dict)
    kind: str = ""

    def add_var(self, name: str, lb=0.0, ub=math.inf, integer=True, key: Hashable = None) -> int:
        self.variables.append(Variable(name, lb, ub, integer))
        k = len(self.variables) - 1
        if key is not None:
            if key in self.var_index:
                raise ModelError(f"duplicate variable key {key!r}")
            self.var_index[key] = k
        return k

    def add_constraint(self, name: str, terms, sense: str, rhs: float) -> int:
        if sense not in (LE, EQ, GE):
            raise ModelError(f"bad relation {sense!r}")
        terms = list(terms)
        for k, _ in terms:
            if not 0 <= k < len(self.variables):
                raise ModelError(f"constraint {name} references unknown variable {k}")
        self.constraints.append(Constraint(name, terms, sense, rhs))
        return len(self.constraints) - 1

    @property
    def z(self) -> int:
        if "z" not in self.var_index:
            raise ModelError("model has no z variable")
        return self.var_index["z"]

    @property
    def num_vars(self) -> int:
        return len(self.variables)

    def names(self) -> list[str]:
        return [v.name for v in self.variables]

    def set_bounds(self, k: int, lb=None, ub=None) -> None:
        if lb is not None:
            self.variables[k].lb = lb
        if ub is not None:
            self.variables[k].ub = ub

    def objective_value(self, values) -> float:
        return sum(c * values[k] for k, c in self.objective)

    def violations(self, values, tol: float = 1e-7) -> list[str]:
        """Rows and bounds violated by ``values`` beyond ``tol``."""
        bad = []
        for k, v in enumerate(self.variables):
            x = values[k]
            if x < v.lb - tol or x > v.ub + tol:
                bad.append(f"bound {v.name}={x} outside [{v.lb}, {v.ub}]")
        for c in self.constraints:
            lhs = sum(a * values[k] for k, a in c.terms)
            if (c.sense == LE and lhs > c.rhs + tol) or (c.sense == GE and lhs < c.rhs - tol) \
                    or (c.sense == EQ and abs(lhs - c.rhs) > tol):
                bad.append(f"row {c.name}: {lhs} {c.sense} {c.rhs}")
        return bad


def _check_item_arcs(arcs, instance: Instance, length_of, color_of):
    for a in arcs:
        if a.item_id is None:
            continue
        try:
            it = instance.item(a.item_id)
        except Exception as exc:
            raise ModelError(f"arc {a} references unknown item") from exc
        if length_of(a) != it.length or color_of(a) != it.color:
            raise ModelError(f"arc {a} does not match item {it}")


def _accumulate(terms: dict[int, float], k: int, c: float):
    terms[k] = terms.get(k, 0.0) + c


def _row(terms: dict[int, float]):
    return sorted((k, c) for k, c in terms.items() if c != 0)


def build_af_ml(g: MlGraph, instance: Instance) -> MilpModel:
    """Arc-flow model over the multilayered graph.

    Conservation holds at every vertex except the source (which emits z)
    and the per-color sinks, whose combined inflow equals z.
    """
    if g.capacity != instance.capacity or g.num_colors != instance.num_colors:
        raise ModelError("graph was built for a different instance")
    _check_item_arcs(g.arcs, instance, lambda a: a.head[0] - a.tail[0], lambda a: a.head[1])
    L = g.capacity
    model = MilpModel(name="af_ml", kind="ml")
    for a, arc in enumerate(g.arcs):
        (i, q1), (j, q2) = arc.tail, arc.head
        model.add_var(f"x_{i}_{q1}_{j}_{q2}", key=(arc.tail, arc.head))
    zi = model.add_var("z", 0, instance.total_copies, key="z")
    model.objective = [(zi, 1.0)]

    for v in g.vertices:
        if v[0] == L:
            continue
        terms: dict[int, float] = {}
        for a in g.in_arcs[v]:
            _accumulate(terms, a, 1.0)
        for a in g.out_arcs[v]:
            _accumulate(terms, a, -1.0)
        if v == (0, 0):
            _accumulate(terms, zi, 1.0)
        row = _row(terms)
        if row:
            model.add_constraint(f"flow_{v[0]}_{v[1]}", row, EQ, 0.0)
    sink: dict[int, float] = {}
    for v in g.sinks():
        for a in g.in_arcs.get(v, []):
            _accumulate(sink, a, 1.0)
    _accumulate(sink, zi, -1.0)
    model.add_constraint(f"flow_{L}", _row(sink), EQ, 0.0)

    by_item: dict[int, list[int]] = {it.id: [] for it in instance.items}
    for a, arc in enumerate(g.arcs):
        if arc.kind != LOSS_KIND:
            by_item[arc.item_id].append(a)
    for it in instance.items:
        model.add_constraint(f"dem_{it.id}", [(a, 1.0) for a in by_item[it.id]], EQ, float(it.demand))
    return model


def build_af_ca(g: CaGraph, instance: Instance) -> MilpModel:
    """Arc-flow model over the color-alternating multigraph.

    Besides conservation and demands, each interior vertex ``j`` and color
    ``q`` gets a row keeping color-``q`` inflow at or below the outflow on
    arcs of any other color (loss arcs included).
    """
    if g.capacity != instance.capacity or g.num_colors != instance.num_colors:
        raise ModelError("graph was built for a different instance")
    _check_item_arcs(g.arcs, instance, lambda a: a.head - a.tail, lambda a: a.color)
    L, Q = g.capacity, g.num_colors
    model = MilpModel(name="af_ca", kind="ca")
    for arc in g.arcs:
        model.add_var(f"x_{arc.tail}_{arc.head}_{arc.color}", key=(arc.tail, arc.head, arc.color))
    zi = model.add_var("z", 0, instance.total_copies, key="z")
    model.objective = [(zi, 1.0)]

    for j in g.points:
        terms: dict[int, float] = {}
        for a in g.in_arcs[j]:
            _accumulate(terms, a, 1.0)
        for a in g.out_arcs[j]:
            _accumulate(terms, a, -1.0)
        if j == 0:
            _accumulate(terms, zi, 1.0)
        elif j == L:
            _accumulate(terms, zi, -1.0)
        row = _row(terms)
        if row:
            model.add_constraint(f"flow_{j}", row, EQ, 0.0)

    for j in g.interior():
        for q in range(1, Q + 1):
            incoming = [a for a in g.in_arcs[j] if g.arcs[a].color == q]
            if not incoming:
                continue
            terms = {a: 1.0 for a in incoming}
            for a in g.out_arcs[j]:
                if g.arcs[a].color != q:
                    terms[a] = -1.0
            model.add_constraint(f"color_{j}_{q}", _row(terms), LE, 0.0)

    by_item: dict[int, list[int]] = {it.id: [] for it in instance.items}
    for a, arc in enumerate(g.arcs):
        if arc.item_id is not None:
            by_item[arc.item_id].append(a)
    for it in instance.items:
        model.add_constraint(f"dem_{it.id}", [(a, 1.0) for a in by_item[it.id]], EQ, float(it.demand))
    return model
