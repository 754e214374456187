"""Positivity-preserving SDIRK integration of production-destruction systems."""

from ._pdint import (
    SpecError,
    convergence,
    integrate,
    invariants,
    problem_names,
    steptrace,
    tableau,
)

__all__ = [
    "SpecError",
    "convergence",
    "integrate",
    "invariants",
    "problem_names",
    "steptrace",
    "tableau",
]
