"""Computable pre-measures on bit strings, probabilistic machines on finite tapes, and derandomisation.

A probabilistic machine is modelled as a deterministic map from (input, finite
bit string) to either an output or :data:`NeedsMoreBits`. Both derandomisers
enumerate every tape of length t (lexicographically), group the halting tapes
by output and compare cylinder masses against exact rational thresholds.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Hashable, Iterable, Optional

from .errors import BudgetExhausted, ContractError, DomainError
from .exactnum import Q, dyadic


class _NeedsMoreBits:
    def __repr__(self):
        return "NeedsMoreBits"

    def __reduce__(self):
        return "NeedsMoreBits"


NeedsMoreBits = _NeedsMoreBits()


def _check_bits(s: str) -> None:
    if any(c not in "01" for c in s):
        raise DomainError(f"bit string may only contain 0 and 1, got {s!r}")


@dataclass(frozen=True)
class PreMeasure:
    """``r(sigma, n)`` approximates rho(sigma) to within 2^-n; ``exact`` means the error is zero."""

    r: Callable[[str, int], Fraction] = field(compare=False)
    exact: bool = False
    name: str = "custom"

    def __call__(self, sigma: str, n: int) -> Fraction:
        _check_bits(sigma)
        return self.r(sigma, n)


def bernoulli_premeasure(p) -> PreMeasure:
    p = Q(p)
    if not 0 <= p <= 1:
        raise DomainError(f"Bernoulli parameter {p} outside [0, 1]")

    def r(sigma: str, n: int) -> Fraction:
        k = sigma.count("1")
        return p ** k * (1 - p) ** (len(sigma) - k)

    return PreMeasure(r, True, f"bernoulli({p})")


FAIR_COIN = bernoulli_premeasure(Fraction(1, 2))


def _ceil_log2(m: int) -> int:
    return (max(1, m) - 1).bit_length()


def cylinder_mass(pm: PreMeasure, strings: Iterable[str], n: int) -> Fraction:
    """Approximate mass of the union of cylinders over ``strings`` to within 2^-n."""
    strings = list(strings)
    if len(set(strings)) != len(strings):
        raise DomainError("cylinder strings must be pairwise distinct")
    if len({len(s) for s in strings}) > 1:
        raise DomainError("cylinder strings must share one length")
    m = n + _ceil_log2(len(strings))
    return sum((pm(s, m) for s in strings), Fraction(0))


@dataclass(frozen=True)
class PTM:
    """Deterministic map (input, bits) -> output or NeedsMoreBits."""

    id: str
    fn: Callable[[Any, str], Any] = field(compare=False, repr=False)
    always_halts: bool = False

    def __call__(self, inp, bits: str):
        return self.fn(inp, bits)


def run_ptm(ptm: PTM, inp, bits: str):
    """Run on a finite tape, checking that the first halting prefix agrees with the full tape."""
    _check_bits(bits)
    out = ptm(inp, bits)
    for L in range(len(bits)):
        early = ptm(inp, bits[:L])
        if early is not NeedsMoreBits:
            if early != out:
                raise ContractError(
                    f"{ptm.id} is not prefix consistent: {bits[:L]!r} -> {early!r} but {bits!r} -> {out!r}"
                )
            break
    return out


def outputs_at_depth(ptm: PTM, inp, t: int) -> dict:
    """Map output -> list of length-t tapes producing it, in first-seen lexicographic order.

    A prefix that already halts stands for all its extensions, so the machine
    is only called on the halting frontier.
    """
    groups: dict = {}

    def walk(prefix: str) -> None:
        out = ptm(inp, prefix)
        if out is not NeedsMoreBits:
            rest = t - len(prefix)
            for tail in itertools.product("01", repeat=rest):
                groups.setdefault(out, []).append(prefix + "".join(tail))
            return
        if len(prefix) == t:
            return
        walk(prefix + "0")
        walk(prefix + "1")

    walk("")
    return groups


def derandomize_single_valued(ptm: PTM, pm: PreMeasure, inp, max_depth: int = 16) -> tuple:
    """Return ``(output, depth)`` for the first output whose mass exceeds 1/2 + 2^-t."""
    for t in range(1, max_depth + 1):
        groups = outputs_at_depth(ptm, inp, t)
        threshold = Fraction(1, 2) + dyadic(t)
        for y, tapes in groups.items():
            if cylinder_mass(pm, tapes, t) > threshold:
                return y, t
    raise BudgetExhausted(f"{ptm.id}: no output cleared 1/2 + 2^-t up to depth {max_depth}")


def precision_for(p) -> int:
    """Smallest n0 with 2^-n0 < p - 1/2."""
    gap = Q(p) - Fraction(1, 2)
    if gap <= 0:
        raise DomainError("success probability must exceed 1/2")
    n = 0
    while dyadic(n) >= gap:
        n += 1
    return n


def derandomize_multi_valued(ptm: PTM, pm: PreMeasure, inp, p, y0: Hashable, max_depth: int = 24) -> tuple:
    """Return ``(output, depth)``: a majority output at precision n0, or ``y0`` once every tape halts."""
    n0 = precision_for(p)
    for t in range(1, max_depth + 1):
        groups = outputs_at_depth(ptm, inp, t)
        for y, tapes in groups.items():
            if cylinder_mass(pm, tapes, n0) > Fraction(1, 2):
                return y, t
        if sum(len(v) for v in groups.values()) == 2 ** t:
            return y0, t
    raise BudgetExhausted(f"{ptm.id}: tapes still running at depth {max_depth}")


def or_ptm(truth: Callable[[Any], Any], flip: Optional[Callable[[Any], Any]] = None, name: str = "OR") -> PTM:
    """Outputs truth(x) when bit 1 or bit 2 is 0, otherwise flip(truth(x)). Success 3/4 under the fair coin."""
    flip = flip or (lambda g: 1 - g)

    def fn(x, bits: str):
        if bits[:1] == "0":
            return truth(x)
        if len(bits) < 2:
            return NeedsMoreBits
        return truth(x) if bits[1] == "0" else flip(truth(x))

    return PTM(name, fn, always_halts=True)


def constant_ptm(c, name: Optional[str] = None) -> PTM:
    return PTM(name or f"Const[{c}]", lambda x, bits: c, always_halts=True)


def coin_ptm(name: str = "Coin") -> PTM:
    """Outputs its first bit: each value has probability exactly 1/2."""
    return PTM(name, lambda x, bits: int(bits[0]) if bits else NeedsMoreBits, always_halts=True)
