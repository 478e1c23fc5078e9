"""Exact diagonal failure inputs, abstaining solvers and derandomisation for an LP/BP/LASSO family."""

from .exactnum import INF, Distance, PNorm, Q, dist_point, dist_segment, dyadic
from .problems import (
    Dims,
    Family,
    InstanceParams,
    ProblemInstance,
    anchor_sets,
    build_instance,
    iota_anchor,
    solve_closed_form,
    validate_separation,
)
from .markov import Diagonal, Exact, Schedule, eval_coord, ground_truth, metered_run
from .adversary import attack_checker, attack_solver, batch_attack, exit_flag_truth
from .trustworthy import Answer, IDontKnow, NotYet, gamma_star, tower_solve

__version__ = "0.1.0"

__all__ = [
    "INF",
    "Distance",
    "PNorm",
    "Q",
    "dist_point",
    "dist_segment",
    "dyadic",
    "Dims",
    "Family",
    "InstanceParams",
    "ProblemInstance",
    "anchor_sets",
    "build_instance",
    "iota_anchor",
    "solve_closed_form",
    "validate_separation",
    "Diagonal",
    "Exact",
    "Schedule",
    "eval_coord",
    "ground_truth",
    "metered_run",
    "attack_checker",
    "attack_solver",
    "batch_attack",
    "exit_flag_truth",
    "Answer",
    "IDontKnow",
    "NotYet",
    "gamma_star",
    "tower_solve",
]
