"""Inputs given as approximation programs, and the fuel-metered diagonal engine.

Three descriptor forms are supported:

* :class:`Exact` returns f_i(iota) at every precision.
* :class:`Schedule` returns f_i(iota^0) below a switch precision t and
  f_i(iota^j_t) from t on.
* :class:`Diagonal` runs a subject against its own coordinates and commits to
  whichever anchor instance falsifies the subject's answer.

Fuel rules for :func:`metered_run`:

R1  every run pays 1 up front and aborts if it cannot.
R2  a query phi_i(n') pays 1, then replays the subject with pool
    c = min(n', remaining). The child's consumption is charged to the parent.
    A complete child with verdict v in {1, 2} and fuel t' answers
    f_i(iota^v_t'); verdict 3 answers f_i(iota^0). An aborted child answers
    f_i(iota^0) when c = n', and aborts the parent when c < n'.
R3  an aborted run is charged its entire pool.
R4  a run may complete with zero fuel left.

Runs are memoised on (descriptor, pool); a run is a pure function of both.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional, Union

from .errors import ContractError, DimensionError, DomainError, ProtocolError
from .exactnum import dist_point
from .problems import (
    Dims,
    Family,
    ProblemInstance,
    anchor_sets,
    iota_anchor,
)
from .subjects import CheckerHandle, SolverHandle

PLAIN = "plain"
EXITFLAG = "exitflag"
HEADER = "crpkit-descriptor/1"


@dataclass(frozen=True)
class SubjectRef:
    solver: SolverHandle
    checker: Optional[CheckerHandle] = None
    mode: str = PLAIN

    def __post_init__(self):
        if self.mode not in (PLAIN, EXITFLAG):
            raise DomainError(f"unknown subject mode {self.mode!r}")
        if self.mode == EXITFLAG and self.checker is None:
            raise DomainError("exit-flag mode needs a checker")
        if self.mode == PLAIN and self.checker is not None:
            raise DomainError("plain mode takes no checker")


@dataclass(frozen=True)
class Exact:
    inst: ProblemInstance

    @property
    def family(self) -> Family:
        return self.inst.family

    @property
    def dims(self) -> Dims:
        return self.inst.dims


@dataclass(frozen=True)
class Schedule:
    family: Family
    dims: Dims
    j: int
    t: int

    def __post_init__(self):
        if self.j not in (1, 2):
            raise DomainError(f"schedule branch must be 1 or 2, got {self.j}")
        if self.t < 1:
            raise DomainError("schedule switch point t must be >= 1")


@dataclass(frozen=True)
class Diagonal:
    family: Family
    dims: Dims
    subject: SubjectRef

    @classmethod
    def plain(cls, family: Family, dims: Dims, solver: SolverHandle) -> "Diagonal":
        return cls(family, dims, SubjectRef(solver))

    @classmethod
    def exitflag(cls, family: Family, dims: Dims, solver: SolverHandle, checker: CheckerHandle) -> "Diagonal":
        return cls(family, dims, SubjectRef(solver, checker, EXITFLAG))


Descriptor = Union[Exact, Schedule, Diagonal]
# A descriptor already carries everything an input needs (family, dims, k).
MarkovInput = Descriptor


def coord_count(inp: MarkovInput) -> int:
    return inp.dims.k


@dataclass(frozen=True)
class Complete:
    verdict: int
    fuel: int
    answer: tuple
    flag: Optional[int] = None


@dataclass(frozen=True)
class Aborted:
    charged: Union[int, float]


RunOutcome = Union[Complete, Aborted]


class _Abort(BaseException):
    """Unwinds a metered run. Derives from BaseException so subjects cannot swallow it."""


_memo: dict = {}
_memo_lock = threading.RLock()


def clear_memo() -> None:
    with _memo_lock:
        _memo.clear()


def _check_pool(pool) -> None:
    if pool == math.inf:
        return
    if isinstance(pool, bool) or not isinstance(pool, int) or pool < 0:
        raise DomainError(f"fuel pool must be a nonnegative integer or inf, got {pool!r}")


def _check_answer(answer, dims: Dims, who: str) -> tuple:
    if not isinstance(answer, (tuple, list)) or len(answer) != dims.N1:
        raise ContractError(f"{who} must return a vector of length {dims.N1}, got {answer!r}")
    if not all(isinstance(x, (Fraction, int)) and not isinstance(x, bool) for x in answer):
        raise ContractError(f"{who} returned non-rational coordinates: {answer!r}")
    return tuple(Fraction(x) for x in answer)


def _check_flag(flag, who: str) -> int:
    if flag not in (0, 1) or isinstance(flag, bool):
        raise ContractError(f"{who} must return 0 or 1, got {flag!r}")
    return int(flag)


def _check_query(inp: MarkovInput, i, n) -> None:
    if isinstance(i, bool) or not isinstance(i, int) or not 1 <= i <= inp.dims.k:
        raise DimensionError(f"coordinate index {i!r} outside 1..{inp.dims.k}")
    if isinstance(n, bool) or not isinstance(n, int) or n < 1:
        raise DomainError(f"precision must be a positive integer, got {n!r}")


def in_kappa_ball_of_y2(answer: tuple, family: Family, dims: Dims) -> bool:
    y2 = anchor_sets(family, dims).y2
    return dist_point(answer, y2, family.p).le(family.kappa)


def _verdict(subject: SubjectRef, answer: tuple, flag: Optional[int], family: Family, dims: Dims) -> int:
    near_y2 = in_kappa_ball_of_y2(answer, family, dims)
    if subject.mode == PLAIN:
        return 1 if near_y2 else 2
    if flag == 0:
        return 3
    return 1 if near_y2 else 2


def _outcome_instance(diag: Diagonal, out: RunOutcome) -> ProblemInstance:
    if isinstance(out, Complete) and out.verdict in (1, 2):
        return iota_anchor(diag.family, diag.dims, out.verdict, out.fuel)
    return iota_anchor(diag.family, diag.dims, 0)


def metered_run(diag: Diagonal, pool=math.inf) -> RunOutcome:
    """Run the subject of ``diag`` against ``diag``'s own coordinates under rules R1-R4."""
    if not isinstance(diag, Diagonal):
        raise DomainError("metered_run needs a Diagonal descriptor")
    _check_pool(pool)
    key = (diag, pool)
    with _memo_lock:
        hit = _memo.get(key)
    if hit is not None:
        return hit
    out = _run(diag, pool)
    with _memo_lock:
        _memo[key] = out
    return out


def _run(diag: Diagonal, pool) -> RunOutcome:
    if pool < 1:
        return Aborted(pool)
    consumed = 1
    family, dims, subject = diag.family, diag.dims, diag.subject

    def oracle(i: int, n: int) -> Fraction:
        nonlocal consumed
        _check_query(diag, i, n)
        if pool - consumed < 1:
            raise _Abort
        consumed += 1
        c = min(n, pool - consumed)
        child = metered_run(diag, c)
        if isinstance(child, Complete):
            consumed += child.fuel
            return _outcome_instance(diag, child).f(i)
        consumed += child.charged
        if c < n:
            raise _Abort
        return iota_anchor(family, dims, 0).f(i)

    try:
        answer = _check_answer(subject.solver(oracle, family, dims), dims, f"solver {subject.solver.id}")
        flag = None
        if subject.mode == EXITFLAG:
            flag = _check_flag(subject.checker(oracle, family, dims), f"checker {subject.checker.id}")
    except _Abort:
        return Aborted(pool)
    return Complete(_verdict(subject, answer, flag, family, dims), consumed, answer, flag)


def eval_coord(inp: MarkovInput, i: int, n: int) -> Fraction:
    """phi_i(n) for the given input."""
    _check_query(inp, i, n)
    if isinstance(inp, Exact):
        return inp.inst.f(i)
    if isinstance(inp, Schedule):
        if n < inp.t:
            return iota_anchor(inp.family, inp.dims, 0).f(i)
        return iota_anchor(inp.family, inp.dims, inp.j, inp.t).f(i)
    if isinstance(inp, Diagonal):
        out = metered_run(inp, n)
        if isinstance(out, Complete) and out.verdict in (1, 2) and out.fuel <= n:
            return iota_anchor(inp.family, inp.dims, out.verdict, out.fuel).f(i)
        return iota_anchor(inp.family, inp.dims, 0).f(i)
    raise DomainError(f"not a Markov input: {inp!r}")


def oracle_for(inp: MarkovInput) -> Callable[[int, int], Fraction]:
    return lambda i, n: eval_coord(inp, i, n)


def ground_truth(inp: MarkovInput) -> ProblemInstance:
    """The instance the input corresponds to (privileged: reads the descriptor)."""
    if isinstance(inp, Exact):
        return inp.inst
    if isinstance(inp, Schedule):
        return iota_anchor(inp.family, inp.dims, inp.j, inp.t)
    if isinstance(inp, Diagonal):
        return _outcome_instance(inp, metered_run(inp, math.inf))
    raise DomainError(f"not a Markov input: {inp!r}")


# --- canonical serialisation -------------------------------------------------


def serialize(inp: MarkovInput) -> str:
    lines = [HEADER]
    if isinstance(inp, Exact):
        lines += ["tag=exact", f"instance={inp.inst.record()}"]
    elif isinstance(inp, Schedule):
        lines += [
            "tag=schedule",
            f"family={inp.family.record()}",
            f"N1={inp.dims.N1}",
            f"N2={inp.dims.N2}",
            f"j={inp.j}",
            f"t={inp.t}",
        ]
    elif isinstance(inp, Diagonal):
        s = inp.subject
        lines += [
            "tag=diagonal",
            f"family={inp.family.record()}",
            f"N1={inp.dims.N1}",
            f"N2={inp.dims.N2}",
            f"mode={s.mode}",
            f"solver={s.solver.reference()}",
        ]
        if s.checker is not None:
            lines.append(f"checker={s.checker.reference()}")
    else:
        raise DomainError(f"not a Markov input: {inp!r}")
    return "\n".join(lines) + "\n"


def _parse_reference(text: str):
    """Split ``builtin NAME size=S`` or ``external NAME size=S cmd=...``."""
    kind, rest = text.split(" ", 1)
    if kind == "builtin":
        name, size = rest.rsplit(" size=", 1)
        return kind, name, int(size), None
    if kind == "external":
        head, cmd = rest.split(" cmd=", 1)
        name, size = head.rsplit(" size=", 1)
        return kind, name, int(size), cmd
    raise ProtocolError(f"unknown subject kind {kind!r}")


def _default_resolver(role: str, kind: str, name: str, size: int, command: Optional[str]):
    from . import catalog, protocol

    if kind == "external":
        make = protocol.external_solver if role == "solver" else protocol.external_checker
        return make(name, command, size)
    handle = catalog.lookup_solver(name) if role == "solver" else catalog.lookup_checker(name)
    if handle.declared_size != size:
        raise ContractError(f"built-in {name} has size {handle.declared_size}, descriptor says {size}")
    return handle


def parse_descriptor(text: str, resolver: Optional[Callable] = None) -> MarkovInput:
    """Inverse of :func:`serialize`. ``resolver(role, kind, name, size, cmd)`` maps subject references to handles."""
    lines = text.strip("\n").split("\n")
    if not lines or lines[0] != HEADER:
        raise ProtocolError("missing descriptor header")
    kv = {}
    for line in lines[1:]:
        key, sep, value = line.partition("=")
        if not sep:
            raise ProtocolError(f"malformed descriptor line {line!r}")
        kv[key] = value
    tag = kv.get("tag")
    try:
        if tag == "exact":
            return Exact(ProblemInstance.from_record(kv["instance"]))
        family = Family.from_record(kv["family"])
        dims = Dims(int(kv["N1"]), int(kv["N2"]))
        if tag == "schedule":
            return Schedule(family, dims, int(kv["j"]), int(kv["t"]))
        if tag == "diagonal":
            resolve = resolver or _default_resolver
            solver = resolve("solver", *_parse_reference(kv["solver"]))
            checker = resolve("checker", *_parse_reference(kv["checker"])) if "checker" in kv else None
            return Diagonal(family, dims, SubjectRef(solver, checker, kv["mode"]))
    except KeyError as e:
        raise ProtocolError(f"descriptor lacks field {e}") from None
    raise ProtocolError(f"unknown descriptor tag {tag!r}")


def descriptor_bytes(inp: MarkovInput) -> int:
    """Canonical record length plus the declared code size of any embedded subjects."""
    n = len(serialize(inp).encode("utf-8"))
    if isinstance(inp, Diagonal):
        n += inp.subject.solver.declared_size
        if inp.subject.checker is not None:
            n += inp.subject.checker.declared_size
    return n


def engine_constant(inp: MarkovInput) -> int:
    """C in ``descriptor_bytes <= subject sizes + C + digits(N1)``: everything but the dimension digits."""
    return len(serialize(inp).encode("utf-8")) - len(str(inp.dims.N1))
