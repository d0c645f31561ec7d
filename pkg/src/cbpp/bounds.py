"""Combinatorial lower bound and a first-fit-decreasing primal heuristic."""

from __future__ import annotations

import math

from .core import Instance, PackingPattern, Solution, alternate, ItemMultiset


def lower_bound(instance: Instance) -> int:
    """max(ceil(total length / L), max_q discrepancy of all copies, 1).

    The color term is valid because discrepancy is additive over bins and
    every feasible bin has discrepancy at most one.
    """
    n = instance.total_copies
    if n == 0:
        return 0
    size = -(-instance.total_length // instance.capacity)
    per_color = {}
    for it in instance.items:
        per_color[it.color] = per_color.get(it.color, 0) + it.demand
    color = max(2 * c - n for c in per_color.values())
    return max(size, color, 1)


def ff_heuristic(instance: Instance) -> Solution:
    """First fit over copies sorted by non-increasing length.

    A copy joins the first open bin with room for it whose contents stay
    alternatable (discrepancy <= 1) once the copy is added. Each bin is then
    laid out with :func:`alternate`.
    """
    Q = instance.num_colors
    copies = sorted(((it.length, it.color, it.id) for it in instance.items for _ in range(it.demand)),
                    key=lambda t: (-t[0], t[1], t[2]))
    loads: list[int] = []
    sizes: list[int] = []
    color_counts: list[list[int]] = []
    contents: list[dict[int, int]] = []
    for length, color, iid in copies:
        for b in range(len(loads)):
            if loads[b] + length > instance.capacity:
                continue
            n = sizes[b] + 1
            worst = max(2 * (color_counts[b][q] + (q == color)) - n for q in range(1, Q + 1))
            if worst <= 1:
                break
        else:
            b = len(loads)
            loads.append(0)
            sizes.append(0)
            color_counts.append([0] * (Q + 1))
            contents.append({})
        loads[b] += length
        sizes[b] += 1
        color_counts[b][color] += 1
        contents[b][iid] = contents[b].get(iid, 0) + 1
    return Solution(tuple(alternate(ItemMultiset(c), instance) for c in contents))
