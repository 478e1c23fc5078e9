"""Exact rational arithmetic helpers, l_p distances and ball membership.

Rationals are :class:`fractions.Fraction` throughout. Distances are never
materialised as irrational numbers: a :class:`Distance` stores the p-th power
of the distance (or the max-coordinate for p = inf) and answers threshold
queries by comparing against ``r ** p``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence, Union

from .errors import DimensionError, DomainError, UnsupportedNormError

Rational = Fraction
Vec = tuple  # tuple[Fraction, ...]

RationalLike = Union[Fraction, int, str]


def Q(x: RationalLike, den: int | None = None) -> Fraction:
    """Coerce ``x`` to a Fraction. Strings are parsed with :func:`parse_rational`."""
    if den is not None:
        return Fraction(x, den)
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("bool is not a rational")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return parse_rational(x, strict=False)
    raise TypeError(f"cannot interpret {x!r} as an exact rational")


def format_rational(q: Fraction) -> str:
    """Canonical text form ``num/den`` (the denominator is always written)."""
    q = Fraction(q)
    return f"{q.numerator}/{q.denominator}"


def parse_rational(text: str, strict: bool = True) -> Fraction:
    """Parse ``num/den``.

    With ``strict`` the text must already be canonical: explicit positive
    denominator and gcd(num, den) = 1. Otherwise plain integers and
    reducible fractions are accepted.
    """
    s = text.strip()
    if "/" in s:
        num_s, den_s = s.split("/", 1)
        try:
            num, den = int(num_s), int(den_s)
        except ValueError:
            raise DomainError(f"malformed rational {text!r}") from None
        if den == 0:
            raise DomainError(f"zero denominator in {text!r}")
        if strict:
            if den < 0 or math.gcd(num, den) != 1:
                raise DomainError(f"non-canonical rational {text!r}")
            if s != f"{num}/{den}":
                raise DomainError(f"non-canonical rational {text!r}")
        return Fraction(num, den)
    if strict:
        raise DomainError(f"rational {text!r} lacks an explicit denominator")
    try:
        return Fraction(int(s))
    except ValueError:
        raise DomainError(f"malformed rational {text!r}") from None


def dyadic(n: int) -> Fraction:
    """Exactly 2**-n."""
    if n < 0:
        raise DomainError("dyadic precision must be nonnegative")
    return Fraction(1, 1 << n)


def vec(*xs: RationalLike) -> tuple:
    return tuple(Q(x) for x in xs)


def unit(d: int, j: int, scale: RationalLike = 1) -> tuple:
    """``scale * e_j`` in Q^d, with j counted from 1."""
    if not 1 <= j <= d:
        raise DimensionError(f"basis index {j} outside 1..{d}")
    s = Q(scale)
    return tuple(s if i == j - 1 else Fraction(0) for i in range(d))


def format_vec(v: Sequence[Fraction]) -> str:
    return "(" + ",".join(_short(x) for x in v) + ")"


def _short(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


@dataclass(frozen=True)
class PNorm:
    """Exponent of an l_p norm; ``p`` is a positive int or ``math.inf``."""

    p: Union[int, float] = math.inf

    def __post_init__(self):
        p = self.p
        if p == math.inf:
            object.__setattr__(self, "p", math.inf)
            return
        if isinstance(p, bool) or not isinstance(p, int) or p < 1:
            raise DomainError(f"p must be a positive integer or inf, got {p!r}")

    @property
    def is_inf(self) -> bool:
        return self.p == math.inf

    @classmethod
    def parse(cls, text) -> "PNorm":
        if isinstance(text, PNorm):
            return text
        if isinstance(text, (int, float)) and not isinstance(text, bool):
            return cls(text if text == math.inf else int(text))
        t = str(text).strip().lower()
        if t in ("inf", "infinity", "oo"):
            return cls(math.inf)
        try:
            return cls(int(t))
        except ValueError:
            raise DomainError(f"cannot parse norm exponent {text!r}") from None

    def __str__(self):
        return "inf" if self.is_inf else str(self.p)


INF = PNorm(math.inf)


@dataclass(frozen=True)
class Distance:
    """Exact handle on an l_p distance.

    ``power`` is ``dist ** p`` for finite p and ``dist`` itself for p = inf,
    so every threshold query is a comparison of rationals.
    """

    p: PNorm
    power: Fraction

    def _rhs(self, r: Fraction) -> Fraction:
        return r if self.p.is_inf else r ** self.p.p

    def le(self, r: RationalLike) -> bool:
        r = Q(r)
        return r >= 0 and self.power <= self._rhs(r)

    def lt(self, r: RationalLike) -> bool:
        r = Q(r)
        return r > 0 and self.power < self._rhs(r)

    def gt(self, r: RationalLike) -> bool:
        return not self.le(r)

    def ge(self, r: RationalLike) -> bool:
        return not self.lt(r)

    def exact(self) -> Fraction | None:
        """The distance itself when it is guaranteed rational (p = 1 or inf)."""
        if self.p.is_inf or self.p.p == 1:
            return self.power
        return None

    def record(self) -> dict:
        return {"p": str(self.p), "power": format_rational(self.power)}


def _check_same_length(*vs: Sequence) -> int:
    n = len(vs[0])
    if n < 1 or any(len(v) != n for v in vs):
        raise DimensionError(f"vector lengths differ or are empty: {[len(v) for v in vs]}")
    return n


def _power_sum(diffs: Iterable[Fraction], p: PNorm) -> Fraction:
    if p.is_inf:
        return max((abs(d) for d in diffs), default=Fraction(0))
    return sum((abs(d) ** p.p for d in diffs), Fraction(0))


def dist_point(x: Sequence[Fraction], y: Sequence[Fraction], p: PNorm | int | str = INF) -> Distance:
    p = PNorm.parse(p)
    _check_same_length(x, y)
    return Distance(p, _power_sum((a - b for a, b in zip(x, y)), p))


def dist_segment(x, a, b, p: PNorm | int | str = INF) -> Distance:
    """Distance from ``x`` to the segment {t a + (1-t) b : t in [0,1]}.

    Supported for p in {1, 2, inf}. For p = 2 the clamped orthogonal
    projection is used; for p = 1 and inf the objective is convex and
    piecewise linear in t, so its minimum sits at a breakpoint or endpoint.
    """
    p = PNorm.parse(p)
    if not (p.is_inf or p.p in (1, 2)):
        raise UnsupportedNormError(f"segment distance supports p in {{1,2,inf}}, got {p}")
    _check_same_length(x, a, b)
    c = [xi - bi for xi, bi in zip(x, b)]  # x - b
    d = [ai - bi for ai, bi in zip(a, b)]  # a - b
    if not any(d):
        return dist_point(x, a, p)

    def at(t: Fraction) -> Fraction:
        return _power_sum((ci - t * di for ci, di in zip(c, d)), p)

    if not p.is_inf and p.p == 2:
        t = sum((ci * di for ci, di in zip(c, d)), Fraction(0)) / sum((di * di for di in d), Fraction(0))
        t = min(max(t, Fraction(0)), Fraction(1))
        return Distance(p, at(t))

    candidates = {Fraction(0), Fraction(1)}
    for ci, di in zip(c, d):
        if di:
            candidates.add(ci / di)
    if p.is_inf:
        n = len(c)
        for i in range(n):
            for j in range(i + 1, n):
                for s in (1, -1):
                    den = d[i] - s * d[j]
                    if den:
                        candidates.add((c[i] - s * c[j]) / den)
    best = min(at(t) for t in candidates if 0 <= t <= 1)
    return Distance(p, best)
