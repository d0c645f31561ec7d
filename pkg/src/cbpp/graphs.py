"""Packing points and the two arc-flow graphs.

Both graphs are flat arc lists. Vertices carry index maps to the ids of
their incoming and outgoing arcs so model builders and the decomposition can
walk incident arcs directly.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field

from .core import Instance

SOURCE_KIND = "source"
ITEM_KIND = "item"
LOSS_KIND = "loss"


def normal_patterns(instance: Instance) -> tuple[int, ...]:
    """All demand-bounded subset sums of item lengths up to the capacity.

    Bounded knapsack reachability: item ``u`` may be used 0..d_u times.
    """
    L = instance.capacity
    reach = [False] * (L + 1)
    reach[0] = True
    for it in instance.items:
        # minimal copies of this item needed to reach each point, -1 if unreachable
        used = [0 if r else -1 for r in reach]
        for x in range(it.length, L + 1):
            if used[x] == -1 and used[x - it.length] != -1 and used[x - it.length] < it.demand:
                used[x] = used[x - it.length] + 1
        reach = [u != -1 for u in used]
    return tuple(x for x in range(L + 1) if reach[x])


def full_points(instance: Instance) -> tuple[int, ...]:
    return tuple(range(instance.capacity + 1))


@dataclass(frozen=True, slots=True)
class MlArc:
    tail: tuple[int, int]
    head: tuple[int, int]
    kind: str
    item_id: int | None = None


@dataclass(frozen=True, slots=True)
class CaArc:
    tail: int
    head: int
    color: int
    item_id: int | None = None


@dataclass
class MlGraph:
    """Multilayered graph: one copy of the packing points per color."""

    capacity: int
    num_colors: int
    points: tuple[int, ...]
    vertices: list[tuple[int, int]]
    arcs: list[MlArc]
    out_arcs: dict[tuple[int, int], list[int]] = field(default_factory=dict)
    in_arcs: dict[tuple[int, int], list[int]] = field(default_factory=dict)
    index: dict[tuple[tuple[int, int], tuple[int, int]], int] = field(default_factory=dict)

    @property
    def source(self) -> tuple[int, int]:
        return (0, 0)

    def sinks(self) -> list[tuple[int, int]]:
        return [v for v in self.vertices if v[0] == self.capacity]


@dataclass
class CaGraph:
    """Color-alternating multigraph over the packing points.

    Item arcs carry the color of their item; color ``Q + 1`` marks loss arcs.
    """

    capacity: int
    num_colors: int
    points: tuple[int, ...]
    arcs: list[CaArc]
    out_arcs: dict[int, list[int]] = field(default_factory=dict)
    in_arcs: dict[int, list[int]] = field(default_factory=dict)
    index: dict[tuple[int, int, int], int] = field(default_factory=dict)

    @property
    def vertices(self) -> tuple[int, ...]:
        return self.points

    @property
    def loss_color(self) -> int:
        return self.num_colors + 1

    def interior(self) -> list[int]:
        return [p for p in self.points if 0 < p < self.capacity]


def _check_points(instance: Instance, points) -> tuple[int, ...]:
    pts = tuple(points)
    if not pts or pts[0] != 0 or any(a >= b for a, b in zip(pts, pts[1:])) or pts[-1] > instance.capacity:
        raise ValueError("points must be strictly increasing, start at 0 and stay within capacity")
    # the sink is a vertex even when no subset sum reaches it exactly
    if pts[-1] != instance.capacity:
        pts = pts + (instance.capacity,)
    return pts


def _index(arcs, tail_of, head_of, vertices):
    out_arcs = {v: [] for v in vertices}
    in_arcs = {v: [] for v in vertices}
    for a, arc in enumerate(arcs):
        out_arcs[tail_of(arc)].append(a)
        in_arcs[head_of(arc)].append(a)
    return out_arcs, in_arcs


def build_ml_graph(instance: Instance, points=None) -> MlGraph:
    L, Q = instance.capacity, instance.num_colors
    pts = _check_points(instance, normal_patterns(instance) if points is None else points)
    ptset = set(pts)
    nonzero = [p for p in pts if p > 0]
    # a layer is entered only by arcs of its own color, so colors without items get none
    layers = sorted({it.color for it in instance.items})
    vertices = [(0, 0)] + [(p, q) for q in layers for p in nonzero]
    arcs: list[MlArc] = []
    for it in instance.items:
        if it.length in ptset:
            arcs.append(MlArc((0, 0), (it.length, it.color), SOURCE_KIND, it.id))
    for q in layers:
        for i in nonzero:
            for it in instance.items:
                j = i + it.length
                if it.color != q and j <= L and j in ptset:
                    arcs.append(MlArc((i, q), (j, it.color), ITEM_KIND, it.id))
            if i < L:
                arcs.append(MlArc((i, q), (L, q), LOSS_KIND))
    out_arcs, in_arcs = _index(arcs, lambda a: a.tail, lambda a: a.head, vertices)
    index = {(a.tail, a.head): k for k, a in enumerate(arcs)}
    return MlGraph(L, Q, pts, vertices, arcs, out_arcs, in_arcs, index)


def build_ca_graph(instance: Instance, points=None) -> CaGraph:
    L, Q = instance.capacity, instance.num_colors
    pts = _check_points(instance, normal_patterns(instance) if points is None else points)
    ptset = set(pts)
    arcs: list[CaArc] = []
    by_color = defaultdict(list)
    for it in instance.items:
        by_color[it.color].append(it)
    for q in range(1, Q + 1):
        for it in sorted(by_color[q], key=lambda u: u.length):
            for i in pts:
                j = i + it.length
                if j > L:
                    break
                if j in ptset:
                    arcs.append(CaArc(i, j, q, it.id))
    for i in pts:
        if 0 < i < L:
            arcs.append(CaArc(i, L, Q + 1))
    out_arcs, in_arcs = _index(arcs, lambda a: a.tail, lambda a: a.head, pts)
    index = {(a.tail, a.head, a.color): k for k, a in enumerate(arcs)}
    return CaGraph(L, Q, pts, arcs, out_arcs, in_arcs, index)


def dump_graph(g) -> str:
    """Debug text: one arc per line as ``from to color item_id``."""
    lines = []
    for a in g.arcs:
        if isinstance(a, CaArc):
            lines.append(f"{a.tail} {a.head} {a.color} {a.item_id if a.item_id else '-'}")
        else:
            lines.append(f"{a.tail[0]},{a.tail[1]} {a.head[0]},{a.head[1]} {a.kind} "
                         f"{a.item_id if a.item_id else '-'}")
    return "\n".join(lines) + ("\n" if lines else "")
