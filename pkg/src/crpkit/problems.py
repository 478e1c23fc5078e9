"""The input family Omega_{N1,N2}(theta) for LP, basis pursuit and LASSO.

Every instance has the form (b, U(u1, u2)) with b = 2*kappa*e_1 and

    U row 1      = (u1, u2, 0, ..., 0)
    U row i >= 2 = e_{i+1}^T

so the instance is determined by the pair (u1, u2), which lives in
L_theta = {(u1, u2) in [theta, 1/2]^2 : at most one u_i differs from 1/2}.
Minimisers are known in closed form; :func:`brute_force_oracle` gives an
independent grid-search check of those formulas.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from typing import Optional, Union

import numpy as np

from .errors import ConfigurationError, DimensionError, DomainError
from .exactnum import (
    INF,
    Distance,
    PNorm,
    Q,
    dist_point,
    dist_segment,
    format_rational,
    parse_rational,
    unit,
)

KINDS = ("LP", "BP", "LASSO")
HALF = Fraction(1, 2)


@dataclass(frozen=True)
class Family:
    """Problem kind plus the constants shared by every member of the family."""

    kind: str = "LP"
    kappa: Fraction = Fraction(1, 10)
    eta: Optional[Fraction] = None
    lam: Optional[Fraction] = None
    p: PNorm = INF
    theta: Fraction = Fraction(1, 4)
    checked: bool = field(default=True, compare=False, repr=False)

    def __post_init__(self):
        kind = self.kind.upper()
        if kind not in KINDS:
            raise DomainError(f"unknown problem kind {self.kind!r}")
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "kappa", Q(self.kappa))
        object.__setattr__(self, "theta", Q(self.theta))
        object.__setattr__(self, "p", PNorm.parse(self.p))
        if self.eta is not None:
            object.__setattr__(self, "eta", Q(self.eta))
        if self.lam is not None:
            object.__setattr__(self, "lam", Q(self.lam))
        if self.kappa <= 0:
            raise DomainError("kappa must be positive")
        if not Fraction(1, 8) <= self.theta <= Fraction(1, 4):
            raise DomainError(f"theta={self.theta} outside [1/8, 1/4]")
        if kind == "BP":
            if self.eta is None:
                raise DomainError("BP family needs eta")
            if not 0 <= self.eta <= 2 * self.kappa:
                raise DomainError("BP closed form needs 0 <= eta <= 2*kappa")
        if kind == "LASSO":
            if self.lam is None:
                raise DomainError("LASSO family needs lambda")
            # max-u is 1/2 on the whole family, so max-u >= lambda/(4 kappa) iff lambda <= 2 kappa
            if not 0 < self.lam <= 2 * self.kappa:
                raise DomainError("LASSO closed form needs 0 < lambda <= 2*kappa")
        if self.checked:
            validate_separation(self)

    @classmethod
    def lp(cls, **kw) -> "Family":
        return cls("LP", **kw)

    @classmethod
    def bp(cls, eta=Fraction(1, 20), **kw) -> "Family":
        return cls("BP", eta=eta, **kw)

    @classmethod
    def lasso(cls, lam=Fraction(1, 20), **kw) -> "Family":
        return cls("LASSO", lam=lam, **kw)

    @property
    def anchor_scale(self) -> Fraction:
        """Coordinate of y^1 / y^2: the minimiser scale when max-u = 1/2."""
        k = self.kappa
        if self.kind == "LP":
            return 4 * k
        if self.kind == "BP":
            return 2 * (2 * k - self.eta)
        return 2 * (2 * k - self.lam)

    def record(self) -> str:
        parts = [self.kind, f"kappa={format_rational(self.kappa)}"]
        if self.kind == "BP":
            parts.append(f"eta={format_rational(self.eta)}")
        if self.kind == "LASSO":
            parts.append(f"lambda={format_rational(self.lam)}")
        parts += [f"p={self.p}", f"theta={format_rational(self.theta)}"]
        return " ".join(parts)

    @classmethod
    def from_record(cls, text: str, checked: bool = True) -> "Family":
        kind, *fields = text.split()
        kv = dict(f.split("=", 1) for f in fields)
        return cls(
            kind,
            kappa=parse_rational(kv["kappa"]),
            eta=parse_rational(kv["eta"]) if "eta" in kv else None,
            lam=parse_rational(kv["lambda"]) if "lambda" in kv else None,
            p=PNorm.parse(kv["p"]),
            theta=parse_rational(kv["theta"]),
            checked=checked,
        )


@dataclass(frozen=True)
class Dims:
    N1: int
    N2: int = 1

    def __post_init__(self):
        if self.N1 < 2 or self.N2 < 1:
            raise DimensionError(f"need N1 >= 2 and N2 >= 1, got N1={self.N1}, N2={self.N2}")
        if self.N1 < self.N2 + 1:
            raise DimensionError(f"U needs N1 >= N2 + 1, got N1={self.N1}, N2={self.N2}")

    @property
    def k(self) -> int:
        """Number of approximation programs: N2 entries of b plus N2*N1 of U."""
        return self.N2 + self.N2 * self.N1


@dataclass(frozen=True)
class InstanceParams:
    u1: Fraction
    u2: Fraction

    def __post_init__(self):
        object.__setattr__(self, "u1", Q(self.u1))
        object.__setattr__(self, "u2", Q(self.u2))


def in_L_theta(u1: Fraction, u2: Fraction, theta: Fraction) -> bool:
    if not (theta <= u1 <= HALF and theta <= u2 <= HALF):
        return False
    return u1 == HALF or u2 == HALF


@dataclass(frozen=True)
class Point:
    v: tuple

    def dist(self, x, p: PNorm) -> Distance:
        return dist_point(x, self.v, p)

    def points(self):
        return (self.v,)


@dataclass(frozen=True)
class Segment:
    a: tuple
    b: tuple

    def dist(self, x, p: PNorm) -> Distance:
        return dist_segment(x, self.a, self.b, p)

    def points(self):
        return (self.a, self.b)

    @property
    def midpoint(self) -> tuple:
        return tuple((x + y) / 2 for x, y in zip(self.a, self.b))


SolutionSet = Union[Point, Segment]


@dataclass(frozen=True)
class ProblemInstance:
    family: Family
    dims: Dims
    params: InstanceParams

    @property
    def u1(self) -> Fraction:
        return self.params.u1

    @property
    def u2(self) -> Fraction:
        return self.params.u2

    @property
    def U(self) -> tuple:
        N1, N2 = self.dims.N1, self.dims.N2
        rows = [(self.u1, self.u2) + (Fraction(0),) * (N1 - 2)]
        for i in range(2, N2 + 1):
            rows.append(unit(N1, i + 1))
        return tuple(rows)

    @property
    def b(self) -> tuple:
        return unit(self.dims.N2, 1, 2 * self.family.kappa)

    def coords(self) -> tuple:
        """Values f_1..f_k: U row-major (so f_1 = u1, f_2 = u2), then b."""
        flat = tuple(x for row in self.U for x in row)
        return flat + self.b

    def f(self, i: int) -> Fraction:
        if not 1 <= i <= self.dims.k:
            raise DimensionError(f"coordinate index {i} outside 1..{self.dims.k}")
        N1, N2 = self.dims.N1, self.dims.N2
        if i <= N1 * N2:
            r, c = divmod(i - 1, N1)
            if r == 0:
                return (self.u1, self.u2)[c] if c < 2 else Fraction(0)
            return Fraction(1) if c == r + 1 else Fraction(0)
        return 2 * self.family.kappa if i == N1 * N2 + 1 else Fraction(0)

    def record(self) -> str:
        return (
            f"{self.family.record()} N1={self.dims.N1} N2={self.dims.N2} "
            f"u1={format_rational(self.u1)} u2={format_rational(self.u2)}"
        )

    @classmethod
    def from_record(cls, text: str) -> "ProblemInstance":
        fields = text.split()
        extra = {f.split("=", 1)[0]: f.split("=", 1)[1] for f in fields[1:]}
        fam_fields = [fields[0]] + [f for f in fields[1:] if f.split("=")[0] in ("kappa", "eta", "lambda", "p", "theta")]
        family = Family.from_record(" ".join(fam_fields))
        return build_instance(
            family,
            Dims(int(extra["N1"]), int(extra["N2"])),
            InstanceParams(parse_rational(extra["u1"]), parse_rational(extra["u2"])),
        )


def build_instance(family: Family, dims: Dims, params: InstanceParams) -> ProblemInstance:
    if not in_L_theta(params.u1, params.u2, family.theta):
        raise DomainError(f"(u1, u2) = ({params.u1}, {params.u2}) not in L_theta for theta={family.theta}")
    return ProblemInstance(family, dims, params)


def _scale(inst: ProblemInstance) -> Fraction:
    fam, u = inst.family, max(inst.u1, inst.u2)
    k = fam.kappa
    if fam.kind == "LP":
        return 2 * k / u
    if fam.kind == "BP":
        return (2 * k - fam.eta) / u
    return (4 * u * k - fam.lam) / (2 * u * u)


def solve_closed_form(inst: ProblemInstance) -> SolutionSet:
    d = inst.dims.N1
    s = _scale(inst)
    if inst.u1 > inst.u2:
        return Point(unit(d, 1, s))
    if inst.u2 > inst.u1:
        return Point(unit(d, 2, s))
    return Segment(unit(d, 1, s), unit(d, 2, s))


@dataclass(frozen=True)
class AnchorSets:
    S0: Segment
    y1: tuple
    y2: tuple

    @property
    def S1(self) -> tuple:
        return self.y1

    @property
    def S2(self) -> tuple:
        return self.y2


def anchor_sets(family: Family, dims: Dims) -> AnchorSets:
    validate_separation(family)
    s = family.anchor_scale
    y1, y2 = unit(dims.N1, 1, s), unit(dims.N1, 2, s)
    return AnchorSets(Segment(y1, y2), y1, y2)


def iota_anchor(family: Family, dims: Dims, j: int, t: int = 1) -> ProblemInstance:
    """iota^0 = U(1/2, 1/2); iota^1_t = U(1/2, 1/2 - 4^-t); iota^2_t = U(1/2 - 4^-t, 1/2)."""
    if j == 0:
        u = (HALF, HALF)
    elif j in (1, 2):
        if t < 1:
            raise DomainError("anchor sequence index t must be >= 1")
        low = HALF - Fraction(1, 4 ** t)
        u = (HALF, low) if j == 1 else (low, HALF)
    else:
        raise DomainError(f"anchor index j must be 0, 1 or 2, got {j}")
    return build_instance(family, dims, InstanceParams(*u))


def validate_separation(family: Family) -> None:
    """Raise ConfigurationError unless dist_p(y1, y2) > 2 kappa exactly."""
    s = family.anchor_scale
    d = dist_point((s, Fraction(0)), (Fraction(0), s), family.p)
    if s <= 0 or d.le(2 * family.kappa):
        raise ConfigurationError(
            f"anchors y1, y2 of {family.kind} are not more than 2*kappa apart in l_{family.p} "
            f"(dist^p = {d.power}, (2 kappa)^p = {d._rhs(2 * family.kappa)})",
            distance=d,
        )


@dataclass(frozen=True)
class Objective:
    value: Fraction
    feasible: bool


def _residual(inst: ProblemInstance, x) -> tuple:
    return tuple(sum((a * xi for a, xi in zip(row, x)), Fraction(0)) - bi for row, bi in zip(inst.U, inst.b))


def objective_value(inst: ProblemInstance, x) -> Objective:
    if len(x) != inst.dims.N1:
        raise DimensionError(f"x has length {len(x)}, expected {inst.dims.N1}")
    x = tuple(Q(v) for v in x)
    r = _residual(inst, x)
    fam = inst.family
    if fam.kind == "LP":
        return Objective(sum(x, Fraction(0)), all(v == 0 for v in r) and all(v >= 0 for v in x))
    l1 = sum((abs(v) for v in x), Fraction(0))
    sq = sum((v * v for v in r), Fraction(0))
    if fam.kind == "BP":
        return Objective(l1, sq <= fam.eta ** 2)
    return Objective(fam.lam * l1 + sq, True)


def optimal_value(inst: ProblemInstance) -> Fraction:
    return objective_value(inst, solve_closed_form(inst).points()[0]).value


def grid_gap_bound(inst: ProblemInstance, step: Fraction) -> Fraction:
    """Upper bound on (best grid objective) - (true optimum) for brute_force_oracle.

    LP: the minimiser's x1 is within one step of a feasible grid value and the
    objective along the feasible line has slope |1 - u1/u2|.
    BP: rounding the nonzero minimiser coordinate up by < step stays feasible
    (needs u_max*step <= 2 eta) and raises ||x||_1 by < step.
    LASSO: rounding both coordinates to the nearest grid value moves each by
    <= step/2; expand the objective around the minimiser.
    """
    step = Q(step)
    u1, u2, fam = inst.u1, inst.u2, inst.family
    if fam.kind == "LP":
        return step * abs(1 - u1 / u2)
    if fam.kind == "BP":
        if max(u1, u2) * step > 2 * fam.eta:
            raise DomainError("grid step too coarse for the BP feasibility slab")
        return step
    h = step / 2
    umax = max(u1, u2)
    resid = fam.lam / (2 * umax)
    return fam.lam * 2 * h + 2 * resid * (u1 + u2) * h + ((u1 + u2) * h) ** 2


def _lcm(*xs: int) -> int:
    return reduce(lambda a, b: a * b // math.gcd(a, b), xs, 1)


def _int_array(values, bound: int):
    dtype = np.int64 if bound < 2 ** 62 else object
    return np.asarray(values, dtype=dtype)


def brute_force_search(inst: ProblemInstance, grid_step) -> tuple:
    """Grid search for a minimiser; returns (x, exact objective at x).

    Grid: x1, x2 in step*{0, 1, ...} inside [0, 6 kappa / theta]. For LP the
    search runs along the feasible line u1 x1 + u2 x2 = 2 kappa; BP and LASSO
    scan the full 2-D grid. All arithmetic is integer after scaling by a
    common denominator.
    """
    h = Q(grid_step)
    if h <= 0:
        raise DomainError("grid step must be positive")
    fam = inst.family
    box = 6 * fam.kappa / fam.theta
    m = int(box / h)
    ks = np.arange(m + 1, dtype=np.int64)
    u1, u2, two_k = inst.u1, inst.u2, 2 * fam.kappa
    N1 = inst.dims.N1

    def embed(x1: Fraction, x2: Fraction) -> tuple:
        return (x1, x2) + (Fraction(0),) * (N1 - 2)

    if fam.kind == "LP":
        best = None
        for k1 in range(m + 1):
            x1 = k1 * h
            x2 = (two_k - u1 * x1) / u2
            if x2 < 0 or x2 > box:
                continue
            val = x1 + x2
            if best is None or val < best[1]:
                best = (embed(x1, x2), val)
        return best

    consts = [u1 * h, u2 * h, two_k] + ([fam.eta] if fam.kind == "BP" else [fam.lam * h])
    D = _lcm(*(c.denominator for c in consts))
    A, B, C = (int(c * D) for c in consts[:3])
    bound = (abs(A) * m + abs(B) * m + abs(C)) ** 2 + abs(int(consts[3] * D)) * D * 2 * m
    K1, K2 = np.meshgrid(_int_array(ks, bound), _int_array(ks, bound), indexing="ij")
    r = A * K1 + B * K2 - C  # residual * D
    if fam.kind == "BP":
        E = int(fam.eta * D)
        feas = np.abs(r) <= E
        if not feas.any():
            raise DomainError("no feasible grid point; refine the grid step")
        score = np.where(feas, K1 + K2, 2 * m + 1)
    else:
        Lm = int(fam.lam * h * D)
        score = Lm * D * (K1 + K2) + r * r
    idx = int(np.argmin(score))
    k1, k2 = divmod(idx, m + 1)
    x = embed(k1 * h, k2 * h)
    return x, objective_value(inst, x).value


def brute_force_oracle(inst: ProblemInstance, grid_step) -> tuple:
    return brute_force_search(inst, grid_step)[0]


def sample_params(rng: random.Random, theta: Fraction, max_den: int = 64) -> InstanceParams:
    """Random member of L_theta with bounded denominators; (1/2, 1/2) included with small probability."""
    if rng.random() < 0.1:
        return InstanceParams(HALF, HALF)
    while True:
        den = rng.randint(1, max_den)
        lo = math.ceil(theta * den)
        hi = math.floor(HALF * den)
        if lo <= hi:
            break
    other = Fraction(rng.randint(lo, hi), den)
    return InstanceParams(HALF, other) if rng.random() < 0.5 else InstanceParams(other, HALF)
