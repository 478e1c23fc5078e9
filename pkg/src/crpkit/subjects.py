"""Handles for the algorithms under test: solvers, exit-flag checkers and their oracle variants.

A handle is a named, total, deterministic callable. Solvers map
``(oracle, family, dims)`` to an answer vector; checkers map the same
arguments to 0 or 1. The ``oracle`` is a callable ``oracle(i, n)`` returning
the i-th approximation program evaluated at precision n. Oracle-equipped and
input-level handles see the whole input descriptor instead.
"""

from __future__ import annotations

import inspect
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

Oracle = Callable[[int, int], Fraction]


def source_size(fn: Callable) -> int:
    """Byte length of a function's source, used as the declared size of built-ins."""
    try:
        return len(inspect.getsource(fn).encode("utf-8"))
    except (OSError, TypeError):
        return 0


@dataclass(frozen=True)
class _Handle:
    id: str
    fn: Callable = field(compare=False, repr=False)
    kind: str = "builtin"
    declared_size: int = 0
    command: Optional[str] = None

    def reference(self) -> str:
        """Text used for this handle inside canonical descriptor records."""
        if self.kind == "external":
            return f"external {self.id} size={self.declared_size} cmd={self.command}"
        return f"builtin {self.id} size={self.declared_size}"


@dataclass(frozen=True)
class SolverHandle(_Handle):
    def __call__(self, oracle: Oracle, family, dims) -> tuple:
        return self.fn(oracle, family, dims)


@dataclass(frozen=True)
class CheckerHandle(_Handle):
    def __call__(self, oracle: Oracle, family, dims) -> int:
        return self.fn(oracle, family, dims)


@dataclass(frozen=True)
class OracleSolverHandle(_Handle):
    """Solver handed the whole input plus a probe vector that may lie in the true solution set."""

    def __call__(self, inp, probe: tuple) -> tuple:
        return self.fn(inp, probe)


@dataclass(frozen=True)
class OracleCheckerHandle(_Handle):
    def __call__(self, inp, probe: tuple) -> int:
        return self.fn(inp, probe)


@dataclass(frozen=True)
class InputSolverHandle(_Handle):
    """Solver that reads the input descriptor directly; produced by oracle stripping."""

    def __call__(self, inp) -> tuple:
        return self.fn(inp)


@dataclass(frozen=True)
class InputCheckerHandle(_Handle):
    def __call__(self, inp) -> int:
        return self.fn(inp)


def builtin_solver(name: str, fn: Callable) -> SolverHandle:
    return SolverHandle(name, fn, "builtin", source_size(fn))


def builtin_checker(name: str, fn: Callable) -> CheckerHandle:
    return CheckerHandle(name, fn, "builtin", source_size(fn))
