"""Flow decomposition into color-alternating paths and the maps between the
two arc-flow formulations.

All routines take a :class:`FlowAssignment` whose values are indexed like the
graph's arc list. Integer flows stay integers throughout; float flows are
handled with an absolute tolerance and tiny residues are snapped to zero.
"""

from __future__ import annotations

from dataclasses import dataclass
from numbers import Integral
from typing import Sequence

from .core import Instance, PackingPattern, Solution
from .errors import DecompositionError
from .graphs import CaArc, CaGraph, LOSS_KIND, MlGraph

ZERO_TOL = 1e-9
ROW_TOL = 1e-7


@dataclass
class FlowAssignment:
    graph: CaGraph | MlGraph
    values: list
    z: float

    def vector(self) -> list:
        """Values in model column order: arcs first, then z."""
        return list(self.values) + [self.z]

    @classmethod
    def from_vector(cls, graph, vector) -> FlowAssignment:
        n = len(graph.arcs)
        if len(vector) != n + 1:
            raise ValueError(f"expected {n + 1} values, got {len(vector)}")
        return cls(graph, list(vector[:n]), vector[n])


@dataclass(frozen=True)
class WeightedPath:
    multiplicity: float
    arc_ids: tuple[int, ...]
    arcs: tuple[CaArc, ...]


def _is_integral(values) -> bool:
    return all(isinstance(v, Integral) for v in values)


def ca_violations(flow: FlowAssignment, tol: float = ROW_TOL) -> list[str]:
    """Conservation, color-alternation and sign rows violated by a CA flow."""
    g = flow.graph
    x, z = flow.values, flow.z
    bad = []
    for a, v in enumerate(x):
        if v < -tol:
            bad.append(f"nonneg arc {g.arcs[a]}: {v}")
    if z < -tol:
        bad.append(f"nonneg z: {z}")
    for j in g.points:
        net = sum(x[a] for a in g.in_arcs[j]) - sum(x[a] for a in g.out_arcs[j])
        want = -z if j == 0 else z if j == g.capacity else 0
        if abs(net - want) > tol:
            bad.append(f"flow_{j}: net inflow {net}, expected {want}")
    for j in g.interior():
        inc, out, out_total = _color_sums(g, x, j)
        for q in range(1, g.num_colors + 1):
            if inc[q] - (out_total - out[q]) > tol:
                bad.append(f"color_{j}_{q}: inflow {inc[q]} exceeds other-color outflow {out_total - out[q]}")
    return bad


def ml_violations(flow: FlowAssignment, tol: float = ROW_TOL) -> list[str]:
    g = flow.graph
    x, z = flow.values, flow.z
    bad = []
    for a, v in enumerate(x):
        if v < -tol:
            bad.append(f"nonneg arc {g.arcs[a]}: {v}")
    sink = 0
    for v in g.vertices:
        inflow = sum(x[a] for a in g.in_arcs[v])
        if v[0] == g.capacity:
            sink += inflow
            continue
        net = inflow - sum(x[a] for a in g.out_arcs[v])
        want = -z if v == (0, 0) else 0
        if abs(net - want) > tol:
            bad.append(f"flow_{v[0]}_{v[1]}: net inflow {net}, expected {want}")
    if abs(sink - z) > tol:
        bad.append(f"flow_{g.capacity}: sink inflow {sink}, expected {z}")
    return bad


def _color_sums(g: CaGraph, x, j):
    Q = g.num_colors
    inc = [0] * (Q + 2)
    out = [0] * (Q + 2)
    for a in g.in_arcs[j]:
        inc[g.arcs[a].color] += x[a]
    for a in g.out_arcs[j]:
        out[g.arcs[a].color] += x[a]
    return inc, out, sum(out)


def decompose_af(flow: FlowAssignment, tol: float = ZERO_TOL) -> list[WeightedPath]:
    """Split a feasible color-alternating flow into weighted 0-to-L paths.

    Paths start with the lowest (head, color) source arc carrying flow. At
    each vertex the walk takes the lowest (head, color) outgoing arc that
    carries flow, differs in color from the arc it arrived on and is not
    blocked: an arc of color ``b`` entered by color ``a`` is blocked when
    some third color ``q`` has its alternation row tight at that vertex.

    The multiplicity of a path is the smallest flow on its arcs, further
    capped by the slack of every third-color row it crosses, so the residual
    stays feasible after each extraction.
    """
    g = flow.graph
    if not isinstance(g, CaGraph):
        raise TypeError("decompose_af expects a flow on the color-alternating graph")
    bad = ca_violations(flow)
    if bad:
        raise DecompositionError(f"input flow is infeasible: {bad[0]}")
    exact = _is_integral(flow.values) and isinstance(flow.z, Integral)
    eps = 0 if exact else tol
    x = [v if v > eps else 0 for v in flow.values]
    z = flow.z if flow.z > eps else 0
    L, Q = g.capacity, g.num_colors
    out_sorted = {j: sorted(g.out_arcs[j], key=lambda a: (g.arcs[a].head, g.arcs[a].color)) for j in g.points}
    paths: list[WeightedPath] = []
    limit = 4 * (len(g.arcs) + len(g.points) * (Q + 1)) + 10
    while z > eps:
        if len(paths) > limit:
            raise DecompositionError("decomposition did not terminate within the arc bound")
        first = next((a for a in out_sorted[0] if x[a] > eps), None)
        if first is None:
            raise DecompositionError(f"z = {z} but no flow leaves vertex 0")
        path = [first]
        caps = [x[first]]
        j, color = g.arcs[first].head, g.arcs[first].color
        while j != L:
            inc, out, out_total = _color_sums(g, x, j)
            slack = [out_total - out[q] - inc[q] for q in range(Q + 1)]
            chosen = None
            for a in out_sorted[j]:
                b = g.arcs[a].color
                if x[a] <= eps or b == color:
                    continue
                third = [slack[q] for q in range(1, Q + 1) if q != color and q != b]
                if any(s <= eps for s in third):
                    continue
                chosen = a
                caps.append(x[a])
                caps.extend(third)
                break
            if chosen is None:
                raise DecompositionError(f"no unblocked outgoing arc at vertex {j} after color {color}")
            path.append(chosen)
            j, color = g.arcs[chosen].head, g.arcs[chosen].color
        d = min(caps)
        for a in path:
            x[a] -= d
            if x[a] <= eps:
                x[a] = 0
        z -= d
        if z <= eps:
            z = 0
        paths.append(WeightedPath(d, tuple(path), tuple(g.arcs[a] for a in path)))
    left = [a for a, v in enumerate(x) if v > eps]
    if left:
        raise DecompositionError(f"residual flow on {len(left)} arcs after z reached zero")
    return paths


def residual_after(flow: FlowAssignment, paths: Sequence[WeightedPath]) -> tuple[list, float]:
    """Subtract every path from ``flow`` without snapping; used by checks."""
    x = list(flow.values)
    z = flow.z
    for p in paths:
        for a in p.arc_ids:
            x[a] -= p.multiplicity
        z -= p.multiplicity
    return x, z


def paths_to_solution(paths: Sequence[WeightedPath], instance: Instance) -> Solution:
    bins = []
    for p in paths:
        m = p.multiplicity
        if not isinstance(m, Integral):
            if abs(m - round(m)) > ZERO_TOL:
                raise DecompositionError(f"fractional multiplicity {m} cannot become bins")
            m = int(round(m))
        assert p.arcs and p.arcs[0].item_id is not None, "a path must open with an item arc"
        pattern = PackingPattern(tuple(a.item_id for a in p.arcs if a.item_id is not None))
        bins.extend([pattern] * int(m))
    return Solution(tuple(bins))


def map_ml_to_ca(flow: FlowAssignment, ca: CaGraph) -> FlowAssignment:
    """Aggregate multilayered flow onto the color-alternating graph.

    Item and source arcs fold onto the CA arc with the same endpoints and
    head color; per-color loss arcs fold onto the single loss arc.
    """
    g = flow.graph
    if not isinstance(g, MlGraph):
        raise TypeError("map_ml_to_ca expects a flow on the multilayered graph")
    bad = ml_violations(flow)
    if bad:
        raise DecompositionError(f"input flow is infeasible: {bad[0]}")
    x = [0] * len(ca.arcs)
    for a, v in enumerate(flow.values):
        if not v:
            continue
        arc = g.arcs[a]
        if arc.kind == LOSS_KIND:
            key = (arc.tail[0], arc.head[0], ca.loss_color)
        else:
            key = (arc.tail[0], arc.head[0], arc.head[1])
        if key not in ca.index:
            raise DecompositionError(f"arc {arc} has no counterpart in the color-alternating graph")
        x[ca.index[key]] += v
    return FlowAssignment(ca, x, flow.z)


def map_ca_to_ml(flow: FlowAssignment, ml: MlGraph, tol: float = ZERO_TOL) -> FlowAssignment:
    """Lift a color-alternating flow onto the multilayered graph.

    The flow is decomposed into paths; each path arc is re-attached to the
    layer of the previous arc's color (the source for the first arc), and a
    closing loss arc stays on the layer of the color it leaves.
    """
    paths = decompose_af(flow, tol)
    x = [0] * len(ml.arcs)
    for p in paths:
        prev = 0
        for arc in p.arcs:
            if arc.item_id is None:
                key = ((arc.tail, prev), (arc.head, prev))
            else:
                key = ((arc.tail, prev), (arc.head, arc.color))
                prev = arc.color
            if key not in ml.index:
                raise DecompositionError(f"path arc {arc} has no multilayered counterpart {key}")
            x[ml.index[key]] += p.multiplicity
    return FlowAssignment(ml, x, flow.z)


def solution_to_ca_flow(sol: Solution, instance: Instance, g: CaGraph) -> FlowAssignment:
    """Overlay one unit path per bin, closing each with a loss arc if needed."""
    x = [0] * len(g.arcs)
    for pat in sol.bins:
        pos = 0
        for iid in pat.ordered:
            it = instance.item(iid)
            key = (pos, pos + it.length, it.color)
            if key not in g.index:
                raise DecompositionError(f"no arc {key} for bin {pat.ordered}")
            x[g.index[key]] += 1
            pos += it.length
        if pos < g.capacity:
            x[g.index[(pos, g.capacity, g.loss_color)]] += 1
    return FlowAssignment(g, x, len(sol.bins))


def solution_to_ml_flow(sol: Solution, instance: Instance, g: MlGraph) -> FlowAssignment:
    x = [0] * len(g.arcs)
    for pat in sol.bins:
        pos, prev = 0, 0
        for iid in pat.ordered:
            it = instance.item(iid)
            key = ((pos, prev), (pos + it.length, it.color))
            if key not in g.index:
                raise DecompositionError(f"no arc {key} for bin {pat.ordered}")
            x[g.index[key]] += 1
            pos, prev = pos + it.length, it.color
        if pos < g.capacity:
            x[g.index[((pos, prev), (g.capacity, prev))]] += 1
    return FlowAssignment(g, x, len(sol.bins))
