"""Relaxation solver, branch-and-bound, and an external LP-file backend.

Continuous relaxations go through HiGHS (dual simplex, via scipy), which
returns basic optimal solutions. Branch-and-bound is best-first on the
rounded-up LP bound and branches on the most fractional variable.
"""

from __future__ import annotations

import heapq
import logging
import math
import os
import shlex
import subprocess
import tempfile
import time
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
from scipy import sparse
from scipy.optimize import linprog

from .errors import BackendError, SolutionParseError, SolverError
from .lpformat import emit_lp
from .models import EQ, GE, LE, MilpModel

log = logging.getLogger(__name__)

FEAS_TOL = 1e-7
INT_TOL = 1e-6

OPTIMAL = "optimal"
FEASIBLE = "feasible"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
TIME_LIMIT = "time-limit"


@dataclass
class LpSolution:
    status: str
    objective: float = math.nan
    values: np.ndarray | None = None


@dataclass
class SolveResult:
    status: str
    lb: float
    ub: float
    incumbent: list[int] | None = None
    nodes: int = 0
    elapsed_ms: int = 0
    root_lp: float | None = None
    bound_trace: list[tuple[float, float]] = field(default_factory=list, repr=False)

    @property
    def gap(self) -> float | None:
        """(ub - lb) / ub, or None when no finite positive upper bound exists."""
        if not math.isfinite(self.ub) or not math.isfinite(self.lb):
            return None
        if self.ub <= 0:
            return 0.0 if self.ub == self.lb else None
        return (self.ub - self.lb) / self.ub


@dataclass
class SolveConfig:
    time_limit_ms: int | None = None
    node_limit: int | None = None
    incumbent: Sequence[float] | None = None
    trace: bool = False


class _LPData:
    """Arrays for one model; bounds vary per branch-and-bound node."""

    def __init__(self, model: MilpModel):
        n = model.num_vars
        self.n = n
        self.c = np.zeros(n)
        for k, v in model.objective:
            self.c[k] += v
        ub_rows, ub_rhs, eq_rows, eq_rhs = [], [], [], []
        for con in model.constraints:
            if con.sense == EQ:
                eq_rows.append(con.terms)
                eq_rhs.append(con.rhs)
            elif con.sense == LE:
                ub_rows.append(con.terms)
                ub_rhs.append(con.rhs)
            else:
                ub_rows.append([(k, -a) for k, a in con.terms])
                ub_rhs.append(-con.rhs)
        self.A_ub = self._matrix(ub_rows)
        self.b_ub = np.array(ub_rhs, dtype=float)
        self.A_eq = self._matrix(eq_rows)
        self.b_eq = np.array(eq_rhs, dtype=float)
        self.lb = np.array([v.lb for v in model.variables], dtype=float)
        self.ub = np.array([v.ub for v in model.variables], dtype=float)
        self.integer = np.array([v.integer for v in model.variables], dtype=bool)

    def _matrix(self, rows):
        if not rows:
            return None
        data, ri, ci = [], [], []
        for r, terms in enumerate(rows):
            for k, a in terms:
                ri.append(r)
                ci.append(k)
                data.append(a)
        return sparse.csr_matrix((data, (ri, ci)), shape=(len(rows), self.n))

    def max_violation(self, x: np.ndarray) -> float:
        worst = 0.0
        if self.A_ub is not None:
            worst = max(worst, float(np.max(self.A_ub @ x - self.b_ub, initial=0.0)))
        if self.A_eq is not None and self.A_eq.shape[0]:
            worst = max(worst, float(np.max(np.abs(self.A_eq @ x - self.b_eq), initial=0.0)))
        worst = max(worst, float(np.max(self.lb - x, initial=0.0)), float(np.max(x - self.ub, initial=0.0)))
        return worst

    def solve(self, lb: np.ndarray, ub: np.ndarray, time_limit_s: float | None = None) -> LpSolution:
        if time_limit_s is not None and time_limit_s <= 0:
            return LpSolution(TIME_LIMIT)
        if self.n == 0:
            infeasible = (self.b_ub.size and np.any(self.b_ub < -FEAS_TOL)) or \
                (self.b_eq.size and np.any(np.abs(self.b_eq) > FEAS_TOL))
            return LpSolution(INFEASIBLE) if infeasible else LpSolution(OPTIMAL, 0.0, np.zeros(0))
        if np.any(lb > ub + FEAS_TOL):
            return LpSolution(INFEASIBLE)
        bounds = np.column_stack([lb, np.where(np.isinf(ub), np.nan, ub)])
        bounds = [(l, None if math.isnan(u) else u) for l, u in bounds]
        options = {"primal_feasibility_tolerance": FEAS_TOL, "dual_feasibility_tolerance": FEAS_TOL}
        if time_limit_s is not None:
            options["time_limit"] = time_limit_s
        last = None
        for method in ("highs-ds", "highs-ipm", "highs"):
            res = linprog(self.c, A_ub=self.A_ub, b_ub=self.b_ub if self.A_ub is not None else None,
                          A_eq=self.A_eq, b_eq=self.b_eq if self.A_eq is not None else None,
                          bounds=bounds, method=method, options=options)
            last = res
            if res.status == 1 and time_limit_s is not None:
                return LpSolution(TIME_LIMIT)
            if res.status == 0:
                x = np.clip(res.x, lb, ub)
                viol = self.max_violation(x)
                if viol > 10 * FEAS_TOL:
                    log.debug("method %s returned violation %.3g, retrying", method, viol)
                    continue
                return LpSolution(OPTIMAL, float(self.c @ x), x)
            if res.status == 2:
                return LpSolution(INFEASIBLE)
            if res.status == 3:
                return LpSolution(UNBOUNDED)
        raise SolverError(f"LP solve failed after retries: status={last.status} message={last.message!r}")


def solve_lp(model: MilpModel) -> LpSolution:
    """Optimal basic solution of the continuous relaxation of ``model``."""
    data = _LPData(model)
    return data.solve(data.lb.copy(), data.ub.copy())


def _objective_is_integral(model: MilpModel, data: _LPData) -> bool:
    return all(float(c).is_integer() and data.integer[k] for k, c in model.objective)


def _trivial_bound(data: _LPData) -> float:
    lo = 0.0
    for k, c in enumerate(data.c):
        if c > 0:
            lo += c * data.lb[k]
        elif c < 0:
            lo += c * data.ub[k]
    return lo


def _check_point(data: _LPData, x, tol=FEAS_TOL) -> bool:
    x = np.asarray(x, dtype=float)
    if x.shape != (data.n,):
        return False
    if np.any(np.abs(x[data.integer] - np.round(x[data.integer])) > INT_TOL):
        return False
    return data.max_violation(x) <= tol


def solve_bnb(model: MilpModel, config: SolveConfig | None = None) -> SolveResult:
    """Best-first branch-and-bound over the integer variables of ``model``.

    Node order is (bound, deeper first, creation order). A node is pruned
    once its bound reaches the incumbent value; when the objective has
    integer coefficients on integer variables the bound is the LP value
    rounded up.
    """
    cfg = config or SolveConfig()
    t0 = time.perf_counter()

    def elapsed_ms() -> int:
        return int((time.perf_counter() - t0) * 1000)

    def out_of_time() -> bool:
        return cfg.time_limit_ms is not None and (time.perf_counter() - t0) * 1000 >= cfg.time_limit_ms

    def remaining_s() -> float | None:
        if cfg.time_limit_ms is None:
            return None
        return cfg.time_limit_ms / 1000.0 - (time.perf_counter() - t0)

    data = _LPData(model)
    integral_obj = _objective_is_integral(model, data)

    def node_bound(v: float) -> float:
        return math.ceil(v - INT_TOL) if integral_obj else v

    best_val, best_x = math.inf, None
    if cfg.incumbent is not None:
        hint = np.asarray(cfg.incumbent, dtype=float)
        if _check_point(data, hint):
            best_x = np.where(data.integer, np.round(hint), hint)
            best_val = float(data.c @ best_x)
        else:
            log.warning("incumbent hint rejected: infeasible for the model")

    def result(status, lb, nodes, root=None, trace=()):
        inc = None if best_x is None else [int(round(v)) if data.integer[k] else float(v)
                                           for k, v in enumerate(best_x)]
        return SolveResult(status, lb, best_val, inc, nodes, elapsed_ms(), root, list(trace))

    trivial = node_bound(_trivial_bound(data)) if data.n else 0.0
    if out_of_time():
        return result(TIME_LIMIT, trivial, 0)

    root = data.solve(data.lb.copy(), data.ub.copy(), remaining_s())
    nodes = 1
    if root.status == TIME_LIMIT:
        return result(TIME_LIMIT, min(trivial, best_val), nodes)
    if root.status == INFEASIBLE:
        return result(INFEASIBLE, math.inf, nodes)
    if root.status == UNBOUNDED:
        raise SolverError("relaxation is unbounded; branch-and-bound needs a bounded objective")

    trace: list[tuple[float, float]] = []
    heap: list = []
    seq = 0

    def consider(sol: LpSolution, lb, ub, depth) -> None:
        nonlocal best_val, best_x, seq
        if sol.status != OPTIMAL:
            return
        bound = node_bound(sol.objective)
        if bound >= best_val:
            return
        x = sol.values
        frac = np.abs(x - np.round(x))
        frac[~data.integer] = 0.0
        if np.all(frac <= INT_TOL):
            cand = np.where(data.integer, np.round(x), x)
            if data.max_violation(cand) <= INT_TOL:
                val = float(data.c @ cand)
                if val < best_val:
                    best_val, best_x = val, cand
                return
        seq += 1
        heapq.heappush(heap, (bound, -depth, seq, sol.objective, x, lb, ub))

    consider(root, data.lb.copy(), data.ub.copy(), 0)
    global_lb = node_bound(root.objective)

    while heap:
        if heap[0][0] >= best_val:
            heap.clear()
            break
        if out_of_time():
            return result(TIME_LIMIT, min(heap[0][0], best_val), nodes, root.objective, trace)
        if cfg.node_limit is not None and nodes >= cfg.node_limit:
            status = FEASIBLE if best_x is not None else TIME_LIMIT
            return result(status, min(heap[0][0], best_val), nodes, root.objective, trace)
        bound, negdepth, _, obj, x, lb, ub = heapq.heappop(heap)
        global_lb = max(global_lb, bound)
        frac = np.abs(x - np.round(x))
        frac[~data.integer] = -1.0
        k = int(np.argmax(frac))  # first index among ties
        v = x[k]
        for new_lb, new_ub in ((lb[k], math.floor(v)), (math.ceil(v), ub[k])):
            clb, cub = lb.copy(), ub.copy()
            clb[k], cub[k] = new_lb, new_ub
            child = data.solve(clb, cub, remaining_s())
            nodes += 1
            if child.status == TIME_LIMIT:
                # the parent bound still covers this unexplored subtree
                rest = heap[0][0] if heap else math.inf
                return result(TIME_LIMIT, min(bound, rest, best_val), nodes, root.objective, trace)
            if cfg.trace and child.status == OPTIMAL:
                trace.append((obj, child.objective))
            consider(child, clb, cub, -negdepth + 1)

    if best_x is None:
        return result(INFEASIBLE, math.inf, nodes, root.objective, trace)
    return result(OPTIMAL, best_val, nodes, root.objective, trace)


# -- external backend ------------------------------------------------------

def parse_solution_text(text: str) -> tuple[str, float | None, dict[str, float]]:
    """Parse ``status``/``objective`` lines and ``name value`` pairs.

    Returns (status, objective, values). Status defaults to optimal.
    """
    status, objective, values = OPTIMAL, None, {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise SolutionParseError(f"line {lineno}: expected 'name value', got {raw.strip()!r}")
        key, val = parts
        if key == "status":
            if val not in (OPTIMAL, FEASIBLE, INFEASIBLE):
                raise SolutionParseError(f"line {lineno}: unknown status {val!r}")
            status = val
            continue
        try:
            num = float(val)
        except ValueError:
            raise SolutionParseError(f"line {lineno}: value {val!r} is not a number") from None
        if not math.isfinite(num):
            raise SolutionParseError(f"line {lineno}: non-finite value {val!r}")
        if key == "objective":
            objective = num
        elif key in values:
            raise SolutionParseError(f"line {lineno}: duplicate variable {key!r}")
        else:
            values[key] = num
    if status != INFEASIBLE and objective is None:
        raise SolutionParseError("missing 'objective' line")
    return status, objective, values


def format_solution_text(model: MilpModel, result: SolveResult) -> str:
    if result.incumbent is None:
        return f"status {INFEASIBLE if result.status == INFEASIBLE else FEASIBLE}\n"
    lines = [f"status {OPTIMAL if result.status == OPTIMAL else FEASIBLE}",
             f"objective {result.ub:.17g}"]
    for v, val in zip(model.variables, result.incumbent):
        if val:
            lines.append(f"{v.name} {val}")
    return "\n".join(lines) + "\n"


def external_backend(model: MilpModel, solver_command: str, hint: Sequence[float] | None = None,
                     timeout_s: float | None = None, workdir: str | None = None) -> SolveResult:
    """Solve through an external program that reads an LP file.

    The command is run as ``<solver_command> <model.lp> <solution.txt>``; it
    must write the solution file in the ``status`` / ``objective`` /
    ``name value`` grammar. The returned point is re-verified against the
    model. A claim of infeasibility is rejected when ``hint`` is a feasible
    point.
    """
    t0 = time.perf_counter()
    data = _LPData(model)
    with tempfile.TemporaryDirectory(dir=workdir) as tmp:
        lp_path = os.path.join(tmp, "model.lp")
        sol_path = os.path.join(tmp, "solution.txt")
        with open(lp_path, "w") as fh:
            fh.write(emit_lp(model))
        argv = shlex.split(solver_command) + [lp_path, sol_path]
        try:
            proc = subprocess.run(argv, capture_output=True, text=True, timeout=timeout_s)
        except (OSError, subprocess.TimeoutExpired) as exc:
            raise BackendError(f"could not run {argv[0]!r}: {exc}") from exc
        if proc.returncode != 0:
            raise BackendError(f"solver exited with {proc.returncode}: {proc.stderr.strip()[-500:]}")
        if not os.path.exists(sol_path):
            raise BackendError("solver did not write a solution file")
        with open(sol_path) as fh:
            text = fh.read()
    status, objective, named = parse_solution_text(text)
    elapsed = int((time.perf_counter() - t0) * 1000)
    if status == INFEASIBLE:
        if hint is not None and _check_point(data, hint):
            raise BackendError("external solver claims infeasibility but a verified feasible point exists")
        return SolveResult(INFEASIBLE, math.inf, math.inf, None, 0, elapsed)
    index = {v.name: k for k, v in enumerate(model.variables)}
    x = np.zeros(model.num_vars)
    for name, val in named.items():
        if name not in index:
            raise BackendError(f"solution names unknown variable {name!r}")
        x[index[name]] = val
    if not _check_point(data, x, tol=INT_TOL):
        raise BackendError(f"returned point violates the model (max violation {data.max_violation(x):.3g})")
    val = float(data.c @ x)
    if abs(val - objective) > INT_TOL * max(1.0, abs(val)):
        raise BackendError(f"reported objective {objective} disagrees with recomputed {val}")
    inc = [int(round(v)) if data.integer[k] else float(v) for k, v in enumerate(x)]
    lb = val if status == OPTIMAL else -math.inf
    return SolveResult(status, lb, val, inc, 0, elapsed)


def solve_lp_file(lp_text: str, config: SolveConfig | None = None) -> tuple[MilpModel, SolveResult]:
    """Read an LP file and solve it with the built-in branch-and-bound."""
    from .lpformat import read_lp

    model = read_lp(lp_text)
    return model, solve_bnb(model, config)


def values_by_name(model: MilpModel, values) -> Mapping[str, float]:
    return {v.name: values[k] for k, v in enumerate(model.variables)}
