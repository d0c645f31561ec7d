"""Exact solvers for the colored bin packing problem."""

from .bounds import ff_heuristic, lower_bound
from .core import (DiscrepancyReport, Instance, Item, ItemMultiset, PackingPattern, Solution,
                   alternate, discrepancy, is_alternatable, majority_condition, verify_solution)
from .pipeline import solve_instance

__version__ = "0.1.0"

__all__ = [
    "DiscrepancyReport", "Instance", "Item", "ItemMultiset", "PackingPattern", "Solution",
    "alternate", "discrepancy", "ff_heuristic", "is_alternatable", "lower_bound",
    "majority_condition", "solve_instance", "verify_solution",
]
