"""Computer-assisted KAM certification for analytic circle-map families.

The pipeline: a Lindstedt candidate for the conjugacy (arnold), enclosed as
Fourier-Taylor models (taylor, fourier), checked against the a-posteriori
KAM theorem (kam), over rotation intervals whose Diophantine content is
bounded rigorously (diophantine), orchestrated by branch and bound (driver).
"""

from .diophantine import DiophantineParams, RotationInterval, select_gamma
from .interval import Interval, IntervalError
from .arnold import ArnoldFamily, lindstedt_candidate, periodic_orbit_bounds
from .kam import (FamilyBounds, KamParameters, ValidationReport, certify_interval,
                  prepare_candidate, search_parameters)
from .driver import AggregateResult, RunConfig, aggregate_with_complement, run_branch_and_bound

__all__ = [
    "AggregateResult", "ArnoldFamily", "DiophantineParams", "FamilyBounds", "Interval",
    "IntervalError", "KamParameters", "RotationInterval", "RunConfig", "ValidationReport",
    "aggregate_with_complement", "certify_interval", "lindstedt_candidate",
    "periodic_orbit_bounds", "prepare_candidate", "run_branch_and_bound", "search_parameters",
    "select_gamma",
]
