"""Diagonal attacks that produce exactly checkable failure certificates.

Every certificate is re-verified before it is returned. A failed
re-verification raises :class:`CertificateError`, which always signals an
engine defect rather than a property of the subject under attack.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .errors import CertificateError, DeterminismError, DomainError, NotApplicableError
from .exactnum import Distance, PNorm, dist_point, dist_segment, format_rational, parse_rational
from .markov import (
    Complete,
    Diagonal,
    MarkovInput,
    _check_answer,
    _check_flag,
    descriptor_bytes,
    engine_constant,
    ground_truth,
    metered_run,
    oracle_for,
    parse_descriptor,
    serialize,
)
from .problems import (
    Dims,
    Family,
    Point,
    ProblemInstance,
    Segment,
    anchor_sets,
    iota_anchor,
    solve_closed_form,
)
from .subjects import (
    CheckerHandle,
    InputCheckerHandle,
    InputSolverHandle,
    OracleCheckerHandle,
    OracleSolverHandle,
    SolverHandle,
)
from .trustworthy import NotYet, gamma_star

DEFAULT_ALPHA = Fraction(1, 20)


# --- helpers ----------------------------------------------------------------


def _vec_record(v) -> list:
    return [format_rational(x) for x in v]


def _vec_parse(items) -> tuple:
    return tuple(parse_rational(x) for x in items)


def _set_record(s) -> dict:
    if isinstance(s, Point):
        return {"kind": "point", "v": _vec_record(s.v)}
    return {"kind": "segment", "a": _vec_record(s.a), "b": _vec_record(s.b)}


def _set_parse(d: dict):
    if d["kind"] == "point":
        return Point(_vec_parse(d["v"]))
    return Segment(_vec_parse(d["a"]), _vec_parse(d["b"]))


def replay_solver(solver: SolverHandle, inp: MarkovInput) -> tuple:
    """The solver's answer when it queries the input's coordinates directly."""
    return _check_answer(solver(oracle_for(inp), inp.family, inp.dims), inp.dims, f"solver {solver.id}")


def replay_checker(checker: CheckerHandle, inp: MarkovInput) -> int:
    return _check_flag(checker(oracle_for(inp), inp.family, inp.dims), f"checker {checker.id}")


# --- certificates -------------------------------------------------------------


@dataclass(frozen=True)
class FailureCertificate:
    solver: str
    descriptor: str
    descriptor_bytes: int
    instance: ProblemInstance
    truth: object
    answer: tuple
    distance: Distance
    fuel: int
    verdict: int

    @property
    def kappa(self) -> Fraction:
        return self.instance.family.kappa

    def record(self) -> dict:
        inst = self.instance
        return {
            "type": "failure",
            "solver": self.solver,
            "family": inst.family.record(),
            "N1": inst.dims.N1,
            "N2": inst.dims.N2,
            "descriptor": self.descriptor,
            "descriptor_bytes": self.descriptor_bytes,
            "ground_truth": inst.record(),
            "truth": _set_record(self.truth),
            "answer": _vec_record(self.answer),
            "distance": self.distance.record(),
            "kappa": format_rational(self.kappa),
            "fuel": self.fuel,
            "verdict": self.verdict,
        }

    @classmethod
    def from_record(cls, rec: dict) -> "FailureCertificate":
        inst = ProblemInstance.from_record(rec["ground_truth"])
        d = rec["distance"]
        return cls(
            rec["solver"],
            rec["descriptor"],
            rec["descriptor_bytes"],
            inst,
            _set_parse(rec["truth"]),
            _vec_parse(rec["answer"]),
            Distance(PNorm.parse(d["p"]), parse_rational(d["power"])),
            rec["fuel"],
            rec["verdict"],
        )


@dataclass(frozen=True)
class ExitFlagCertificate:
    solver: str
    checker: str
    descriptor: str
    descriptor_bytes: int
    instance: ProblemInstance
    truth: object
    answer: tuple
    checker_output: int
    truth_flag: int
    fuel: int
    verdict: int
    alpha: Fraction = DEFAULT_ALPHA
    range_violation: bool = False
    range_distance: Optional[Distance] = field(default=None)

    def record(self) -> dict:
        inst = self.instance
        rec = {
            "type": "exitflag",
            "solver": self.solver,
            "checker": self.checker,
            "family": inst.family.record(),
            "N1": inst.dims.N1,
            "N2": inst.dims.N2,
            "descriptor": self.descriptor,
            "descriptor_bytes": self.descriptor_bytes,
            "ground_truth": inst.record(),
            "truth": _set_record(self.truth),
            "answer": _vec_record(self.answer),
            "checker_output": self.checker_output,
            "truth_flag": self.truth_flag,
            "kappa": format_rational(inst.family.kappa),
            "alpha": format_rational(self.alpha),
            "fuel": self.fuel,
            "verdict": self.verdict,
            "range_violation": self.range_violation,
        }
        if self.range_distance is not None:
            rec["range_distance"] = self.range_distance.record()
        return rec

    @classmethod
    def from_record(cls, rec: dict) -> "ExitFlagCertificate":
        rd = rec.get("range_distance")
        return cls(
            rec["solver"],
            rec["checker"],
            rec["descriptor"],
            rec["descriptor_bytes"],
            ProblemInstance.from_record(rec["ground_truth"]),
            _set_parse(rec["truth"]),
            _vec_parse(rec["answer"]),
            rec["checker_output"],
            rec["truth_flag"],
            rec["fuel"],
            rec["verdict"],
            parse_rational(rec["alpha"]),
            rec["range_violation"],
            Distance(PNorm.parse(rd["p"]), parse_rational(rd["power"])) if rd else None,
        )


def certificate_from_record(rec: dict):
    if rec.get("type") == "failure":
        return FailureCertificate.from_record(rec)
    if rec.get("type") == "exitflag":
        return ExitFlagCertificate.from_record(rec)
    raise CertificateError(f"unknown certificate type {rec.get('type')!r}")


def _expected_instance(cert) -> ProblemInstance:
    inst = cert.instance
    if cert.verdict in (1, 2):
        return iota_anchor(inst.family, inst.dims, cert.verdict, cert.fuel)
    return iota_anchor(inst.family, inst.dims, 0)


def _check(cond: bool, msg: str) -> None:
    if not cond:
        raise CertificateError(msg)


def verify_certificate(cert, rerun: bool = False, resolver=None) -> None:
    """Exact re-verification from the certificate's own data.

    The static part needs only the problem family and exact arithmetic: it
    recomputes the true solution set, the distance and the flag. With
    ``rerun`` the descriptor is re-parsed, its ground truth recomputed and
    the subject replayed.
    """
    inst, fam = cert.instance, cert.instance.family
    _check(cert.truth == solve_closed_form(inst), "stored solution set differs from the closed form")
    _check(inst == _expected_instance(cert), "ground truth does not match verdict and fuel")
    _check(len(cert.answer) == inst.dims.N1, "answer has the wrong length")
    y2 = anchor_sets(fam, inst.dims).y2
    near_y2 = dist_point(cert.answer, y2, fam.p).le(fam.kappa)
    d = cert.truth.dist(cert.answer, fam.p)
    if isinstance(cert, FailureCertificate):
        _check(cert.verdict in (1, 2), "plain attacks only yield verdicts 1 and 2")
        _check(d == cert.distance, "stored distance differs from the recomputed one")
        _check(d.gt(fam.kappa), "answer is within kappa of the true solution set")
        _check((cert.verdict == 1) == near_y2, "verdict disagrees with the answer region")
    else:
        flag = 1 if d.le(fam.kappa) else 0
        _check(flag == cert.truth_flag, "stored truth flag differs from the recomputed one")
        _check(cert.checker_output in (0, 1), "checker output must be 0 or 1")
        if cert.range_violation:
            s0 = anchor_sets(fam, inst.dims).S0
            rd = dist_segment(cert.answer, s0.a, s0.b, fam.p)
            _check(rd == cert.range_distance, "stored range distance differs from the recomputed one")
            _check(rd.gt(cert.alpha), "answer is within alpha of the solution range")
        else:
            _check(cert.checker_output != cert.truth_flag, "checker output agrees with the truth")
            expect = 3 if cert.checker_output == 0 else (1 if near_y2 else 2)
            _check(cert.verdict == expect, "verdict disagrees with checker output and answer region")
    _check(descriptor_bytes_ok(cert), "descriptor byte count is inconsistent")
    if rerun:
        inp = parse_descriptor(cert.descriptor, resolver)
        _check(serialize(inp) == cert.descriptor, "descriptor does not round-trip")
        _check(ground_truth(inp) == inst, "descriptor's ground truth differs from the certificate")
        _check(replay_solver(inp.subject.solver, inp) == cert.answer, "solver replay gives a different answer")
        if isinstance(cert, ExitFlagCertificate):
            _check(replay_checker(inp.subject.checker, inp) == cert.checker_output, "checker replay differs")


def descriptor_bytes_ok(cert) -> bool:
    return cert.descriptor_bytes >= len(cert.descriptor.encode("utf-8"))


def verify_record(rec: dict, rerun: bool = False, resolver=None):
    cert = certificate_from_record(rec)
    verify_certificate(cert, rerun, resolver)
    return cert


# --- attacks -----------------------------------------------------------------


def _uncapped(diag: Diagonal) -> Complete:
    out = metered_run(diag, math.inf)
    if not isinstance(out, Complete):
        raise DeterminismError("uncapped run aborted")
    return out


def attack_solver(solver: SolverHandle, family: Family, dims: Dims) -> FailureCertificate:
    diag = Diagonal.plain(family, dims, solver)
    out = _uncapped(diag)
    answer = replay_solver(solver, diag)
    if answer != out.answer:
        raise DeterminismError(f"{solver.id} answered {out.answer} inside the run and {answer} on replay")
    inst = ground_truth(diag)
    truth = solve_closed_form(inst)
    cert = FailureCertificate(
        solver.id,
        serialize(diag),
        descriptor_bytes(diag),
        inst,
        truth,
        answer,
        truth.dist(answer, family.p),
        out.fuel,
        out.verdict,
    )
    verify_certificate(cert)
    return cert


def check_fuel_contract(diag: Diagonal, below: int = 2, above: int = 3) -> int:
    """Check F3/F4 around the uncapped fuel t; returns t."""
    out = _uncapped(diag)
    t = out.fuel
    for pool in range(max(0, t - below), t + above + 1):
        capped = metered_run(diag, pool)
        if pool < t and isinstance(capped, Complete):
            raise DeterminismError(f"run completed with pool {pool} below its fuel {t}")
        if pool >= t and capped != out:
            raise DeterminismError(f"run at pool {pool} gave {capped}, uncapped gave {out}")
    return t


@dataclass(frozen=True)
class BatchReport:
    certificates: list
    lengths: list
    dims: list
    declared_size: int
    constant: int

    def bound(self, d: int) -> int:
        return self.declared_size + self.constant + len(str(d))


def batch_attack(solver: SolverHandle, family: Family, K: int, base_N1: int = 2) -> BatchReport:
    if K < 1:
        raise DomainError("K must be >= 1")
    certs, lengths, ds, consts = [], [], [], set()
    for d in range(base_N1, base_N1 + K):
        dims = Dims(d, 1)
        cert = attack_solver(solver, family, dims)
        certs.append(cert)
        lengths.append(cert.descriptor_bytes)
        ds.append(d)
        consts.add(engine_constant(Diagonal.plain(family, dims, solver)))
    if len(consts) != 1:
        raise CertificateError(f"engine constant varies across the batch: {sorted(consts)}")
    report = BatchReport(certs, lengths, ds, solver.declared_size, consts.pop())
    for d, n in zip(ds, lengths):
        if n > report.bound(d):
            raise CertificateError(f"descriptor at d={d} has {n} bytes, above the bound {report.bound(d)}")
    return report


def exit_flag_truth(solver: SolverHandle, inp: MarkovInput) -> int:
    answer = replay_solver(solver, inp)
    return 1 if solve_closed_form(ground_truth(inp)).dist(answer, inp.family.p).le(inp.family.kappa) else 0


def attack_checker(
    solver: SolverHandle, checker: CheckerHandle, family: Family, dims: Dims, alpha: Fraction = DEFAULT_ALPHA
) -> ExitFlagCertificate:
    diag = Diagonal.exitflag(family, dims, solver, checker)
    out = _uncapped(diag)
    answer = replay_solver(solver, diag)
    if answer != out.answer:
        raise DeterminismError(f"{solver.id} answered differently on replay")
    e = replay_checker(checker, diag)
    if e != out.flag:
        raise DeterminismError(f"{checker.id} flagged differently on replay")
    inst = ground_truth(diag)
    truth = solve_closed_form(inst)
    truth_flag = 1 if truth.dist(answer, family.p).le(family.kappa) else 0
    s0 = anchor_sets(family, dims).S0
    rd = dist_segment(answer, s0.a, s0.b, family.p)
    violation = rd.gt(alpha)
    cert = ExitFlagCertificate(
        solver.id,
        checker.id,
        serialize(diag),
        descriptor_bytes(diag),
        inst,
        truth,
        answer,
        e,
        truth_flag,
        out.fuel,
        out.verdict,
        alpha,
        violation,
        rd if violation else None,
    )
    verify_certificate(cert)
    return cert


# --- oracle stripping --------------------------------------------------------


def verdict_extractor(inp: MarkovInput, budget: int):
    """1 or 2 when a run with ``budget`` fuel completes with that verdict, else NotYet."""
    if not isinstance(inp, Diagonal):
        raise NotApplicableError("verdict extraction needs a Diagonal input")
    out = metered_run(inp, budget)
    if isinstance(out, Complete) and out.verdict in (1, 2):
        return out.verdict
    return NotYet


def _select_branch(inp: MarkovInput, budget: int) -> int:
    if isinstance(inp, Diagonal):
        v = verdict_extractor(inp, budget)
    else:
        ans = gamma_star(inp, budget)
        v = NotYet if ans is NotYet else (1 if ans.v == anchor_sets(inp.family, inp.dims).y1 else 2)
    if v is NotYet:
        raise NotApplicableError(f"branch selector exhausted its budget of {budget}")
    return v


def strip_oracle_checker(oracle_checker: OracleCheckerHandle, family: Family, budget: int = 256) -> InputCheckerHandle:
    def stripped(inp):
        a = anchor_sets(family, inp.dims)
        c1, c2 = oracle_checker(inp, a.y1), oracle_checker(inp, a.y2)
        if c1 == c2:
            return c1
        return c1 if _select_branch(inp, budget) == 1 else c2

    return InputCheckerHandle(f"Stripped[{oracle_checker.id}]", stripped)


def strip_oracle_solver(oracle_solver: OracleSolverHandle, family: Family, budget: int = 256) -> InputSolverHandle:
    def stripped(inp):
        a = anchor_sets(family, inp.dims)
        s1, s2 = oracle_solver(inp, a.y1), oracle_solver(inp, a.y2)
        if s1 == s2:
            return s1
        return s1 if _select_branch(inp, budget) == 1 else s2

    return InputSolverHandle(f"Stripped[{oracle_solver.id}]", stripped)


def probe_respecting_checker(solver: SolverHandle, omega: Fraction = Fraction(0)) -> OracleCheckerHandle:
    """Privileged oracle checker: correct whenever its probe lies within omega of the true solution set."""

    def check(inp, probe):
        truth = exit_flag_truth(solver, inp)
        valid = solve_closed_form(ground_truth(inp)).dist(probe, inp.family.p).le(omega)
        return truth if valid else 1 - truth

    return OracleCheckerHandle(f"ProbeRespecting[{solver.id}]", check)
