"""Harness configuration: an INI-style key/value file with rationals written as ``num/den``.

Example::

    [family]
    kind = BP
    kappa = 1/10
    eta = 1/20
    p = inf
    theta = 1/4

    [dims]
    N1 = 2
    N2 = 1

    [run]
    alpha = 1/20
    iteration_cap = 24
    selector_budget = 256
    timeout = 30
    out_dir = certificates

    [solvers]
    ExtBlind = external 812 python3 -m crpkit.external solver Blind
    Blind2 = builtin Blind
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Optional

from . import catalog, protocol
from .errors import ConfigurationError, RegistryError
from .exactnum import PNorm, parse_rational
from .problems import Dims, Family, validate_separation
from .subjects import CheckerHandle, SolverHandle


@dataclass
class HarnessConfig:
    family: Family = field(default_factory=Family.lp)
    dims: Dims = field(default_factory=lambda: Dims(2, 1))
    alpha: Fraction = Fraction(1, 20)
    iteration_cap: int = 24
    selector_budget: int = 256
    timeout: float = protocol.DEFAULT_TIMEOUT
    out_dir: Path = Path("certificates")
    solvers: dict = field(default_factory=dict)
    checkers: dict = field(default_factory=dict)

    def __post_init__(self):
        validate_separation(self.family)

    def solver(self, name: str) -> SolverHandle:
        if name in self.solvers:
            return self._build("solver", name, self.solvers[name])
        return catalog.lookup_solver(name)

    def checker(self, name: str) -> CheckerHandle:
        if name in self.checkers:
            return self._build("checker", name, self.checkers[name])
        return catalog.lookup_checker(name)

    def _build(self, role: str, name: str, entry: str):
        kind, _, rest = entry.strip().partition(" ")
        if kind == "builtin":
            return self.solver(rest.strip()) if role == "solver" else self.checker(rest.strip())
        if kind == "external":
            size, _, command = rest.strip().partition(" ")
            if not size.isdigit() or not command:
                raise ConfigurationError(f"external {role} {name}: expected 'external SIZE COMMAND'")
            make = protocol.external_solver if role == "solver" else protocol.external_checker
            return make(name, command, int(size), self.timeout)
        raise RegistryError(f"{role} {name}: unknown entry kind {kind!r}")

    def resolver(self):
        """Descriptor resolver that knows this config's external subjects."""

        def resolve(role, kind, name, size, command):
            if kind == "external":
                make = protocol.external_solver if role == "solver" else protocol.external_checker
                return make(name, command, size, self.timeout)
            return self.solver(name) if role == "solver" else self.checker(name)

        return resolve


def _family_from_section(sec) -> Family:
    kind = sec.get("kind", "LP").upper()
    kw = dict(
        kappa=parse_rational(sec.get("kappa", "1/10")),
        p=PNorm.parse(sec.get("p", "inf")),
        theta=parse_rational(sec.get("theta", "1/4")),
    )
    if kind == "BP":
        kw["eta"] = parse_rational(sec.get("eta", "1/20"))
    if kind == "LASSO":
        kw["lam"] = parse_rational(sec.get("lambda", "1/20"))
    return Family(kind, **kw)


def load_config(path: Optional[str | Path] = None, text: Optional[str] = None) -> HarnessConfig:
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    if path is not None:
        with open(path, encoding="utf-8") as fh:
            parser.read_file(fh)
    elif text is not None:
        parser.read_string(text)
    fam_sec = parser["family"] if parser.has_section("family") else {}
    dims_sec = parser["dims"] if parser.has_section("dims") else {}
    run = parser["run"] if parser.has_section("run") else {}
    try:
        return HarnessConfig(
            family=_family_from_section(fam_sec),
            dims=Dims(int(dims_sec.get("N1", 2)), int(dims_sec.get("N2", 1))),
            alpha=parse_rational(run.get("alpha", "1/20")),
            iteration_cap=int(run.get("iteration_cap", 24)),
            selector_budget=int(run.get("selector_budget", 256)),
            timeout=float(run.get("timeout", protocol.DEFAULT_TIMEOUT)),
            out_dir=Path(run.get("out_dir", "certificates")),
            solvers=dict(parser["solvers"]) if parser.has_section("solvers") else {},
            checkers=dict(parser["checkers"]) if parser.has_section("checkers") else {},
        )
    except ConfigurationError:
        raise
    except ValueError as e:
        raise ConfigurationError(str(e)) from None
