"""Solvers that abstain instead of hallucinating.

The basic routine compares phi_1(n) and phi_2(n). On the family every
single-valued instance has |u1 - u2| > 0, and each approximation is within
2^-n of the truth, so a gap wider than 2 * 2^-n proves which u is larger and
hence which anchor is the exact minimiser. Inputs corresponding to iota^0
never produce such a gap, so the solvers below abstain on them forever.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Hashable, Iterable, Optional, Union

from .errors import ContractError, DomainError, NotApplicableError
from .exactnum import dyadic
from .markov import Exact, MarkovInput, eval_coord
from .problems import Dims, Family, anchor_sets


@dataclass(frozen=True)
class Answer:
    v: tuple
    at: Optional[int] = field(default=None, compare=False)


class _Token:
    def __init__(self, name: str):
        self._name = name

    def __repr__(self):
        return self._name

    def __reduce__(self):
        return self._name


IDontKnow = _Token("IDontKnow")
NotYet = _Token("NotYet")

Verdict = Union[Answer, _Token]


def format_verdict(v: Verdict) -> str:
    from .exactnum import format_vec

    if isinstance(v, Answer):
        return f"Answer {format_vec(v.v[:2])} at n'={v.at}" if v.at is not None else f"Answer {format_vec(v.v[:2])}"
    return "I don't know" if v is IDontKnow else "not yet"


def gamma_star_oracle(query: Callable[[int, int], Fraction], family: Family, dims: Dims, max_budget: int) -> Verdict:
    """The comparison routine over a bare oracle ``query(i, n)``."""
    anchors = anchor_sets(family, dims)
    for n in range(1, max_budget + 1):
        delta = query(1, n) - query(2, n)
        bound = 2 * dyadic(n)
        if delta > bound:
            return Answer(anchors.y1, n)
        if delta < -bound:
            return Answer(anchors.y2, n)
    return NotYet


def gamma_star(inp: MarkovInput, max_budget: int) -> Verdict:
    return gamma_star_oracle(lambda i, n: eval_coord(inp, i, n), inp.family, inp.dims, max_budget)


def single_valued_indicator(inp: MarkovInput, n: int) -> int:
    if n < 1:
        raise DomainError("n must be >= 1")
    for m in range(1, n + 1):
        if abs(eval_coord(inp, 1, m) - eval_coord(inp, 2, m)) > 2 * dyadic(m):
            return 1
    return 0


def tower_solve(inp: MarkovInput, n: int) -> Verdict:
    """n-th member of the giving-up tower: an exact anchor or IDontKnow."""
    if single_valued_indicator(inp, n):
        out = gamma_star(inp, n)
        if not isinstance(out, Answer):
            raise ContractError("indicator fired but the routine found no answer")
        return out
    return IDontKnow


class GivingUpAI:
    """Tower Gamma_n built from a monotone indicator and a partial solver.

    Monotonicity of the indicator is policed on every call: n-1 is checked
    alongside n, and every observation is remembered so that a later 0 above
    an earlier 1 is reported as well.
    """

    def __init__(self, indicator: Callable[[MarkovInput, int], int], partial_solver: Callable[[MarkovInput], tuple]):
        self.indicator = indicator
        self.partial_solver = partial_solver
        self._fired: dict = {}
        self._quiet: dict = {}

    def _observe(self, inp: Hashable, n: int, value: int) -> None:
        if value:
            self._fired[inp] = min(n, self._fired.get(inp, n))
        else:
            self._quiet[inp] = max(n, self._quiet.get(inp, n))
        if inp in self._fired and inp in self._quiet and self._quiet[inp] > self._fired[inp]:
            raise ContractError(
                f"indicator not monotone: 1 at n={self._fired[inp]} but 0 at n={self._quiet[inp]}"
            )

    def __call__(self, inp: MarkovInput, n: int) -> Verdict:
        if n < 1:
            raise DomainError("n must be >= 1")
        value = int(self.indicator(inp, n))
        self._observe(inp, n, value)
        if n > 1:
            self._observe(inp, n - 1, int(self.indicator(inp, n - 1)))
        if not value:
            return IDontKnow
        out = self.partial_solver(inp)
        return out if isinstance(out, Answer) else Answer(tuple(out))


def build_giving_up_ai(indicator, partial_solver) -> GivingUpAI:
    return GivingUpAI(indicator, partial_solver)


@dataclass
class IdkRegistry:
    """Which inputs a tower eventually answers ("know") versus abstains on."""

    entries: dict = field(default_factory=dict)

    def know(self) -> set:
        return {k for k, v in self.entries.items() if v == "know"}

    def dont_know(self) -> set:
        return {k for k, v in self.entries.items() if v == "dont-know"}


def idk_registry(tower: Callable[[MarkovInput, int], Verdict], inputs: Iterable[MarkovInput], n: int) -> IdkRegistry:
    reg = IdkRegistry()
    for inp in inputs:
        reg.entries[inp] = "know" if isinstance(tower(inp, n), Answer) else "dont-know"
    return reg


def selective_solver(inp: MarkovInput, phi0: MarkovInput, budget: int) -> Verdict:
    """Answer y^1 on the one registered iota^0 representative; otherwise run the routine."""
    if inp == phi0:
        return Answer(anchor_sets(inp.family, inp.dims).y1)
    return gamma_star(inp, budget)


def crp4_demo_solver(inp: MarkovInput, phi0: MarkovInput) -> Answer:
    """Solver on the restricted class: the registered phi0 plus exact inputs with u1 != u2."""
    anchors = anchor_sets(inp.family, inp.dims)
    if inp == phi0:
        return Answer(tuple((a + b) / 2 for a, b in zip(anchors.y1, anchors.y2)))
    if not isinstance(inp, Exact) or inp.inst.u1 == inp.inst.u2:
        raise NotApplicableError("input is neither the registered phi0 nor an exact input with u1 != u2")
    a, b = eval_coord(inp, 1, 1), eval_coord(inp, 2, 1)
    return Answer(anchors.y1 if a > b else anchors.y2)
