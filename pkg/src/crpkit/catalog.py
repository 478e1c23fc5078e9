"""Built-in subjects: always-answering solvers and exit-flag checkers used by the attacks and demos."""

from __future__ import annotations

import re
from fractions import Fraction

from .errors import RegistryError
from .exactnum import dist_point
from .problems import anchor_sets
from .randomized import FAIR_COIN, PTM, derandomize_multi_valued, or_ptm
from .subjects import CheckerHandle, SolverHandle, builtin_checker, builtin_solver, source_size
from .trustworthy import Answer, gamma_star_oracle


def blind(oracle, family, dims):
    return anchor_sets(family, dims).y1


def always_y2(oracle, family, dims):
    return anchor_sets(family, dims).y2


def one_query(oracle, family, dims):
    a = anchor_sets(family, dims)
    return a.y1 if oracle(1, 1) >= Fraction(1, 2) else a.y2


def origin(oracle, family, dims):
    return (Fraction(0),) * dims.N1


def snap_at(m: int):
    """Compare u1 and u2 at precision m and answer the anchor of the larger one."""

    def snap(oracle, family, dims):
        a = anchor_sets(family, dims)
        return a.y2 if oracle(1, m) < oracle(2, m) else a.y1

    return snap


def always_one(oracle, family, dims):
    return 1


def always_zero(oracle, family, dims):
    return 0


def resolve_checker(solver: SolverHandle, budget: int = 10) -> CheckerHandle:
    """Checker that re-solves with the comparison routine and accepts iff the solver lands within kappa."""

    def resolve(oracle, family, dims):
        ref = gamma_star_oracle(oracle, family, dims, budget)
        if not isinstance(ref, Answer):
            return 0
        return 1 if dist_point(solver(oracle, family, dims), ref.v, family.p).le(family.kappa) else 0

    name = f"ReSolve[{solver.id}]" if budget == 10 else f"ReSolve[{solver.id};{budget}]"
    return CheckerHandle(name, resolve, "builtin", source_size(resolve_checker))


def randomized_flag_ptm() -> PTM:
    """Checker PTM that says 1 with probability 3/4 and 0 otherwise, ignoring its input."""
    return or_ptm(lambda ctx: 1, name="Flag34")


RANDOM_CHECKERS = {"Flag34": randomized_flag_ptm}


def derandomized_checker(ptm: PTM, p: Fraction, y0: int) -> CheckerHandle:
    """Deterministic checker obtained by running the multi-valued derandomiser on every call."""

    def derand(oracle, family, dims):
        return derandomize_multi_valued(ptm, FAIR_COIN, (oracle, family, dims), p, y0)[0]

    name = f"Derand[{ptm.id};{p.numerator}/{p.denominator};{y0}]"
    return CheckerHandle(name, derand, "builtin", source_size(derandomized_checker))


SOLVERS = {
    "Blind": builtin_solver("Blind", blind),
    "AlwaysY2": builtin_solver("AlwaysY2", always_y2),
    "OneQuery": builtin_solver("OneQuery", one_query),
    "SnapAt(4)": SolverHandle("SnapAt(4)", snap_at(4), "builtin", source_size(snap_at)),
    "SnapAt(8)": SolverHandle("SnapAt(8)", snap_at(8), "builtin", source_size(snap_at)),
    "Origin": builtin_solver("Origin", origin),
}

# The solvers whose answers always sit on the anchor segment.
ANCHORED_SOLVERS = ("Blind", "AlwaysY2", "OneQuery", "SnapAt(4)", "SnapAt(8)")

CHECKERS = {
    "Always1": builtin_checker("Always1", always_one),
    "Always0": builtin_checker("Always0", always_zero),
}

_RESOLVE = re.compile(r"ReSolve\[(?P<solver>[^;\]]+)(?:;(?P<budget>\d+))?\]$")
_DERAND = re.compile(r"Derand\[(?P<ptm>[^;]+);(?P<num>\d+)/(?P<den>\d+);(?P<y0>[01])\]$")
_SNAP = re.compile(r"SnapAt\((?P<m>\d+)\)$")


def lookup_solver(name: str) -> SolverHandle:
    if name in SOLVERS:
        return SOLVERS[name]
    m = _SNAP.match(name)
    if m and int(m["m"]) >= 1:
        return SolverHandle(name, snap_at(int(m["m"])), "builtin", source_size(snap_at))
    raise RegistryError(f"unknown solver {name!r}")


def lookup_checker(name: str) -> CheckerHandle:
    if name in CHECKERS:
        return CHECKERS[name]
    m = _RESOLVE.match(name)
    if m:
        return resolve_checker(lookup_solver(m["solver"]), int(m["budget"] or 10))
    m = _DERAND.match(name)
    if m and m["ptm"] in RANDOM_CHECKERS:
        return derandomized_checker(RANDOM_CHECKERS[m["ptm"]](), Fraction(int(m["num"]), int(m["den"])), int(m["y0"]))
    raise RegistryError(f"unknown checker {name!r}")
