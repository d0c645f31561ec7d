"""End-to-end exact solve of one instance with either arc-flow model."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .bounds import ff_heuristic, lower_bound
from .core import Instance, Solution, VerificationReport, verify_solution
from .decompose import (FlowAssignment, WeightedPath, decompose_af, map_ml_to_ca, paths_to_solution,
                        solution_to_ca_flow, solution_to_ml_flow)
from .errors import CBPPError
from .graphs import build_ca_graph, build_ml_graph, full_points, normal_patterns
from .models import MilpModel, build_af_ca, build_af_ml
from .solver import SolveConfig, SolveResult, external_backend, solve_bnb

MODELS = ("ca", "ml")


class VerificationFailed(CBPPError):
    """A decoded incumbent did not pass solution verification."""


@dataclass
class InstanceSolve:
    model_kind: str
    model: MilpModel
    graph: object
    result: SolveResult
    heuristic: Solution
    solution: Solution | None = None
    paths: list[WeightedPath] = field(default_factory=list)
    verification: VerificationReport | None = None

    @property
    def value(self) -> float:
        return self.result.ub


def build(instance: Instance, model: str = "ca", normal: bool = True):
    """Graph and model for ``instance``; ``normal=False`` keeps every point 0..L."""
    if model not in MODELS:
        raise ValueError(f"unknown model {model!r}; choose from {MODELS}")
    points = normal_patterns(instance) if normal else full_points(instance)
    if model == "ca":
        g = build_ca_graph(instance, points)
        return g, build_af_ca(g, instance)
    g = build_ml_graph(instance, points)
    return g, build_af_ml(g, instance)


def decode(instance: Instance, graph, model: MilpModel, values, ca_graph=None):
    """Turn an integer model point into paths and a packing solution."""
    flow = FlowAssignment.from_vector(graph, values)
    if model.kind == "ml":
        ca_graph = ca_graph or build_ca_graph(instance, graph.points)
        flow = map_ml_to_ca(flow, ca_graph)
    paths = decompose_af(flow)
    return paths, paths_to_solution(paths, instance)


def solve_instance(instance: Instance, model: str = "ca", normal: bool = True,
                   time_limit_ms: int | None = None, node_limit: int | None = None,
                   backend: str = "builtin") -> InstanceSolve:
    """Solve exactly, warm-started by the first-fit heuristic.

    ``z`` is bounded below by :func:`lower_bound` and above by the heuristic
    bin count before solving. The incumbent is decomposed and verified in
    ordered mode; a failed verification raises :class:`VerificationFailed`.
    ``backend`` is ``"builtin"`` or ``"external:<command>"``.
    """
    graph, milp = build(instance, model, normal)
    heur = ff_heuristic(instance)
    milp.set_bounds(milp.z, lb=lower_bound(instance), ub=len(heur))
    if model == "ca":
        hint = solution_to_ca_flow(heur, instance, graph).vector()
    else:
        hint = solution_to_ml_flow(heur, instance, graph).vector()

    if backend == "builtin":
        res = solve_bnb(milp, SolveConfig(time_limit_ms=time_limit_ms, node_limit=node_limit, incumbent=hint))
    elif backend.startswith("external:"):
        timeout = None if time_limit_ms is None else max(time_limit_ms / 1000.0, 1.0) * 2
        res = external_backend(milp, backend[len("external:"):], hint=hint, timeout_s=timeout)
    else:
        raise ValueError(f"unknown backend {backend!r}")

    out = InstanceSolve(model, milp, graph, res, heur)
    if res.incumbent is not None:
        out.paths, out.solution = decode(instance, graph, milp, res.incumbent)
        out.verification = verify_solution(instance, out.solution, "ordered")
        if not out.verification.ok:
            raise VerificationFailed("; ".join(out.verification.violations))
        if len(out.solution) != round(res.ub):
            raise VerificationFailed(f"decoded {len(out.solution)} bins but objective is {res.ub}")
    return out


def lp_bound(instance: Instance, model: str = "ca", normal: bool = True) -> float:
    """Linear relaxation value with ``z`` left at its default bounds."""
    from .solver import solve_lp

    _, milp = build(instance, model, normal)
    sol = solve_lp(milp)
    return sol.objective if sol.status == "optimal" else math.inf
