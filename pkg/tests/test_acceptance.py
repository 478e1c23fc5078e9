"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py`` or ``python3 tests/test_acceptance.py``.
"""

import itertools
import random
import sys
from fractions import Fraction as F

import numpy as np
import pytest

from crpkit import catalog
from crpkit.adversary import (
    attack_checker,
    attack_solver,
    batch_attack,
    check_fuel_contract,
    exit_flag_truth,
    probe_respecting_checker,
    strip_oracle_checker,
    verify_certificate,
)
from crpkit.markov import Diagonal, Exact, Schedule, clear_memo, eval_coord, ground_truth
from crpkit.problems import (
    Dims,
    Family,
    brute_force_search,
    build_instance,
    grid_gap_bound,
    iota_anchor,
    objective_value,
    optimal_value,
    sample_params,
    solve_closed_form,
)
from crpkit.randomized import (
    FAIR_COIN,
    NeedsMoreBits,
    derandomize_multi_valued,
    derandomize_single_valued,
    or_ptm,
    run_ptm,
)
from crpkit.store import payload
from crpkit.trustworthy import Answer, IDontKnow, tower_solve

KAPPA = F(1, 10)
FAMILIES = (Family.lp(), Family.bp(eta=F(1, 20)), Family.lasso(lam=F(1, 20)))
ANCHORED = [catalog.SOLVERS[n] for n in catalog.ANCHORED_SOLVERS]
LP, D2 = FAMILIES[0], Dims(2)


def _announce(capsys, number: int, title: str, body) -> None:
    error = None
    try:
        body()
    except Exception as exc:  # reported, then re-raised
        error = exc
    with capsys.disabled():
        status = "PASS" if error is None else "FAIL"
        print(f"\n[criterion {number:2d}] {status}  {title}")
    if error is not None:
        raise error


def test_criterion_01_closed_forms(capsys):
    def body():
        rng = random.Random(2024)
        step = F(1, 200)
        for fam in FAMILIES:
            for _ in range(20):
                inst = build_instance(fam, D2, sample_params(rng, fam.theta))
                _, val = brute_force_search(inst, step)
                gap = val - optimal_value(inst)
                assert 0 <= gap <= grid_gap_bound(inst, step), (fam.kind, inst.params, gap)
                if fam.kind != "LASSO":
                    assert all(objective_value(inst, v).feasible for v in solve_closed_form(inst).points())

    _announce(capsys, 1, "closed-form optimum vs grid oracle at step 1/200", body)


def _float_sup_distance(answer, solution) -> float:
    a = np.array([float(x) for x in answer])
    pts = [np.array([float(x) for x in v]) for v in solution.points()]
    if len(pts) == 1:
        return float(np.max(np.abs(a - pts[0])))
    ts = np.linspace(0.0, 1.0, 2001)
    return min(float(np.max(np.abs(a - (t * pts[0] + (1 - t) * pts[1])))) for t in ts)


def test_criterion_02_solver_attacks(capsys):
    def body():
        for solver, fam, N1 in itertools.product(ANCHORED, FAMILIES, range(2, 9)):
            cert = attack_solver(solver, fam, Dims(N1))
            assert cert.distance.gt(KAPPA)
            verify_certificate(cert, rerun=True)
            if fam.p.is_inf:
                assert _float_sup_distance(cert.answer, cert.truth) > float(KAPPA)

    _announce(capsys, 2, "attack_solver certificates, 5 solvers x 3 families x N1=2..8", body)


def test_criterion_03_hand_traces(capsys):
    def body():
        blind = attack_solver(catalog.SOLVERS["Blind"], LP, D2)
        assert (blind.verdict, blind.fuel) == (2, 1)
        assert blind.instance == iota_anchor(LP, D2, 2, 1)
        assert blind.distance.exact() == F(2, 5)
        oq = attack_solver(catalog.SOLVERS["OneQuery"], LP, D2)
        assert (oq.verdict, oq.fuel) == (2, 3)
        assert oq.instance == iota_anchor(LP, D2, 2, 3)

    _announce(capsys, 3, "hand traces for Blind and OneQuery", body)


def test_criterion_04_fuel_contract(capsys):
    def body():
        for solver, fam, N1 in itertools.product(catalog.SOLVERS.values(), FAMILIES, (2, 3, 5)):
            t = check_fuel_contract(Diagonal.plain(fam, Dims(N1), solver), below=2, above=3)
            assert t >= 1

    _announce(capsys, 4, "fuel threshold contract at pools t-2..t+3", body)


def _generated_inputs(count: int, seed: int) -> list:
    rng = random.Random(seed)
    out = []
    while len(out) < count:
        fam = rng.choice(FAMILIES)
        dims = Dims(rng.randint(2, 5))
        kind = rng.randrange(3)
        if kind == 0:
            out.append(Exact(build_instance(fam, dims, sample_params(rng, fam.theta))))
        elif kind == 1:
            out.append(Schedule(fam, dims, rng.choice((1, 2)), rng.randint(1, 20)))
        else:
            out.append(Diagonal.plain(fam, dims, rng.choice(list(catalog.SOLVERS.values()))))
    return out


def test_criterion_05_correspondence(capsys):
    def body():
        for inp in _generated_inputs(200, 5):
            truth = ground_truth(inp)
            for i in range(1, inp.dims.k + 1):
                fi = truth.f(i)
                for n in range(1, 25):
                    assert abs(eval_coord(inp, i, n) - fi) <= F(1, 2**n), (inp, i, n)

    _announce(capsys, 5, "correspondence |phi_i(n) - f_i| <= 2^-n on 200 inputs, n <= 24", body)


def _trust_inputs() -> list:
    """(input, is_iota0, schedule_t or None)."""
    rng = random.Random(6)
    items = []
    for fam, j, t, N1 in itertools.product(FAMILIES, (1, 2), range(1, 11), range(2, 10)):
        items.append((Schedule(fam, Dims(N1), j, t), False, t))
    for _ in range(450):
        fam = rng.choice(FAMILIES)
        inst = build_instance(fam, Dims(rng.randint(2, 6)), sample_params(rng, fam.theta))
        items.append((Exact(inst), inst.u1 == inst.u2, None))
    for fam, N1 in itertools.product(FAMILIES, range(2, 10)):
        items.append((Exact(iota_anchor(fam, Dims(N1), 0)), True, None))
    for solver, fam, N1 in itertools.product(ANCHORED, FAMILIES, (2, 3, 4)):
        items.append((Diagonal.plain(fam, Dims(N1), solver), False, None))
        flagged = Diagonal.exitflag(fam, Dims(N1), solver, catalog.CHECKERS["Always0"])
        items.append((flagged, ground_truth(flagged).u1 == ground_truth(flagged).u2, None))
    return items


def test_criterion_06_trustworthy_tower(capsys):
    def body():
        items = _trust_inputs()
        assert len(items) >= 1000
        for inp, iota0, t in items:
            truth = solve_closed_form(ground_truth(inp))
            horizon = 2 * t + 6 if t else 24
            seen = None
            for n in range(1, horizon + 1):
                v = tower_solve(inp, n)
                if isinstance(v, Answer):
                    assert truth.dist(v.v, inp.family.p).le(0), (inp, n)
                    assert seen is None or seen == v
                    seen = v
                else:
                    assert v is IDontKnow
                    assert seen is None, "abstained after answering"
                if t is not None:
                    assert isinstance(v, Answer) == (n >= 2 * t + 2), (inp, n)
            if iota0:
                assert seen is None

    _announce(capsys, 6, "giving-up tower never wrong on >= 1000 inputs", body)


def test_criterion_07_checker_attacks(capsys):
    def body():
        for solver, fam in itertools.product(ANCHORED, FAMILIES):
            checkers = [catalog.CHECKERS["Always1"], catalog.CHECKERS["Always0"], catalog.resolve_checker(solver, 10)]
            for checker in checkers:
                cert = attack_checker(solver, checker, fam, D2)
                assert not cert.range_violation
                assert cert.checker_output != cert.truth_flag
                verify_certificate(cert, rerun=True)

    _announce(capsys, 7, "attack_checker against Always1, Always0 and ReSolve", body)


def test_criterion_08_oracle_stripping(capsys):
    def body():
        for solver, fam in itertools.product(ANCHORED, FAMILIES):
            stripped = strip_oracle_checker(probe_respecting_checker(solver), fam)
            inputs = [Schedule(fam, D2, j, t) for j in (1, 2) for t in range(1, 11)]
            inputs += [Diagonal.plain(fam, D2, other) for other in ANCHORED]
            for inp in inputs:
                assert stripped(inp) == exit_flag_truth(solver, inp), (solver.id, inp)

    _announce(capsys, 8, "stripped probe-respecting checker matches the true exit flag", body)


def _majority(ptm, x, t: int):
    weights = {}
    for bits in itertools.product("01", repeat=t):
        tape = "".join(bits)
        y = run_ptm(ptm, x, tape)
        if y is not NeedsMoreBits:
            weights[y] = weights.get(y, 0) + F(1, 2**t)
    return max(weights, key=weights.get), weights


def test_criterion_09_derandomization(capsys):
    def body():
        truth = lambda x: (x * x + 1) % 3 % 2  # noqa: E731
        ptm = or_ptm(truth)
        for x in range(50):
            y, t = derandomize_single_valued(ptm, FAIR_COIN, x)
            major, weights = _majority(ptm, x, t)
            assert (y, t) == (truth(x), 3) and y == major and weights[y] == F(3, 4)
            assert derandomize_multi_valued(ptm, FAIR_COIN, x, F(3, 4), 1 - truth(x))[0] == truth(x)
        flag_ptm = catalog.randomized_flag_ptm()
        for solver, y0 in itertools.product(ANCHORED, (0, 1)):
            checker = catalog.derandomized_checker(flag_ptm, F(3, 4), y0)
            cert = attack_checker(solver, checker, LP, D2)
            assert cert.checker_output != cert.truth_flag and not cert.range_violation
            verify_certificate(cert, rerun=True)

    _announce(capsys, 9, "derandomization of the OR-PTM and the randomized-checker pipeline", body)


def test_criterion_10_length_accounting(capsys):
    def body():
        for solver in ANCHORED:
            report = batch_attack(solver, LP, 10)
            assert len(report.certificates) == 10
            for d, n in zip(report.dims, report.lengths):
                assert n <= report.bound(d)
            assert len({n - len(str(d)) for d, n in zip(report.dims, report.lengths)}) == 1

    _announce(capsys, 10, "batch K=10 descriptor lengths within declared size + C + digits(d)", body)


def _full_run() -> list:
    clear_memo()
    certs = []
    for solver, fam, N1 in itertools.product(ANCHORED, FAMILIES, (2, 3, 4)):
        certs.append(attack_solver(solver, fam, Dims(N1)))
    for solver, fam in itertools.product(ANCHORED, FAMILIES):
        for checker in (catalog.CHECKERS["Always1"], catalog.CHECKERS["Always0"], catalog.resolve_checker(solver, 10)):
            certs.append(attack_checker(solver, checker, fam, D2))
    certs.append(attack_checker(ANCHORED[0], catalog.derandomized_checker(catalog.randomized_flag_ptm(), F(3, 4), 1), LP, D2))
    certs.extend(batch_attack(ANCHORED[2], LP, 10).certificates)
    return [payload(c) for c in certs]


def test_criterion_11_determinism(capsys):
    def body():
        first, second = _full_run(), _full_run()
        assert len(first) == len(second) > 0
        assert first == second

    _announce(capsys, 11, "two full runs give byte-identical certificate payloads", body)


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
