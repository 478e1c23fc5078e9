"""Command-line front end.

Exit codes: 0 success, 2 configuration or registry problem, 3 protocol
error, 4 certificate re-check failure (a defect), 5 solver outside the
alpha-range, 6 subject broke determinism or its contract.
"""

from __future__ import annotations

import argparse
import csv
import random
import sys
from pathlib import Path

from . import adversary, catalog
from .config import HarnessConfig, load_config
from .errors import (
    BudgetExhausted,
    CertificateError,
    ConfigurationError,
    ContractError,
    DeterminismError,
    DimensionError,
    DomainError,
    NotApplicableError,
    ProtocolError,
    RegistryError,
)
from .exactnum import PNorm, format_vec, parse_rational
from .markov import Diagonal, Exact, Schedule, descriptor_bytes, parse_descriptor, serialize
from .problems import (
    Dims,
    Family,
    InstanceParams,
    brute_force_search,
    build_instance,
    grid_gap_bound,
    optimal_value,
    sample_params,
)
from .store import CertificateStore
from .trustworthy import format_verdict, tower_solve

EXIT_OK, EXIT_CONFIG, EXIT_PROTOCOL, EXIT_RECHECK, EXIT_RANGE, EXIT_CONTRACT = 0, 2, 3, 4, 5, 6


def _distance_text(d) -> str:
    exact = d.exact()
    if exact is not None:
        return str(exact)
    return f"({d.power})^(1/{d.p})"


def _family(args, cfg: HarnessConfig) -> Family:
    if not args.kind:
        return cfg.family
    kind = args.kind.upper()
    kw = {"kappa": cfg.family.kappa, "p": cfg.family.p, "theta": cfg.family.theta}
    if args.kappa:
        kw["kappa"] = parse_rational(args.kappa, strict=False)
    if args.p:
        kw["p"] = PNorm.parse(args.p)
    if kind == "BP":
        kw["eta"] = parse_rational(args.eta, strict=False) if args.eta else (cfg.family.eta or parse_rational("1/20"))
    if kind == "LASSO":
        kw["lam"] = parse_rational(args.lam, strict=False) if args.lam else (cfg.family.lam or parse_rational("1/20"))
    return Family(kind, **kw)


def _store(args, cfg: HarnessConfig) -> CertificateStore:
    return CertificateStore(Path(args.out) if args.out else cfg.out_dir)


def cmd_attack(args, cfg: HarnessConfig) -> int:
    solver = cfg.solver(args.solver)
    family = _family(args, cfg)
    report = adversary.batch_attack(solver, family, args.count, args.N1 or cfg.dims.N1)
    store = _store(args, cfg)
    print(f"solver {solver.id} (declared size {solver.declared_size}), engine constant C = {report.constant}")
    print("N1  fuel  verdict  distance  bytes  bound")
    for d, cert, n in zip(report.dims, report.certificates, report.lengths):
        store.append(cert)
        print(f"{d:<3} {cert.fuel:<5} {cert.verdict:<8} {_distance_text(cert.distance):<9} {n:<6} {report.bound(d)}")
    print(f"{len(report.certificates)} certificate(s) written to {store.root}")
    return EXIT_OK


def cmd_trustworthy(args, cfg: HarnessConfig) -> int:
    text = Path(args.descriptor).read_text(encoding="utf-8")
    inp = parse_descriptor(text, cfg.resolver())
    print(format_verdict(tower_solve(inp, args.budget)))
    return EXIT_OK


def cmd_verify_formulas(args, cfg: HarnessConfig) -> int:
    step = parse_rational(args.step, strict=False)
    rng = random.Random(args.seed)
    families = [_family(args, cfg)] if args.kind else [
        Family.lp(kappa=cfg.family.kappa, p=cfg.family.p, theta=cfg.family.theta),
        Family.bp(eta=cfg.family.eta or parse_rational("1/20"), kappa=cfg.family.kappa, p=cfg.family.p, theta=cfg.family.theta),
        Family.lasso(lam=cfg.family.lam or parse_rational("1/20"), kappa=cfg.family.kappa, p=cfg.family.p, theta=cfg.family.theta),
    ]
    ok = True
    for fam in families:
        worst, worst_bound = None, None
        for _ in range(args.samples):
            inst = build_instance(fam, cfg.dims, sample_params(rng, fam.theta))
            _, val = brute_force_search(inst, step)
            gap = val - optimal_value(inst)
            bound = grid_gap_bound(inst, step)
            if gap < 0 or gap > bound:
                ok = False
                print(f"  violation at u=({inst.u1},{inst.u2}): gap {gap}, bound {bound}")
            if worst is None or gap > worst:
                worst, worst_bound = gap, bound
        status = "pass" if ok else "FAIL"
        print(f"{fam.record()}: {args.samples} samples, max gap {worst} (bound there {worst_bound}) {status}")
    return EXIT_OK if ok else EXIT_RECHECK


def _print_exitflag(cert) -> int:
    print(f"solver {cert.solver}, checker {cert.checker}")
    print(f"ground truth {cert.instance.record()}")
    print(f"verdict {cert.verdict}, fuel {cert.fuel}, answer {format_vec(cert.answer[:2])}")
    if cert.range_violation:
        print(f"range violation: answer is {_distance_text(cert.range_distance)} from the solution range (alpha {cert.alpha})")
        return EXIT_RANGE
    print(f"checker said {cert.checker_output}, true exit flag {cert.truth_flag}")
    return EXIT_OK


def cmd_attack_exitflag(args, cfg: HarnessConfig) -> int:
    family = _family(args, cfg)
    dims = Dims(args.N1 or cfg.dims.N1, 1)
    cert = adversary.attack_checker(cfg.solver(args.solver), cfg.checker(args.checker), family, dims, cfg.alpha)
    _store(args, cfg).append(cert)
    return _print_exitflag(cert)


def cmd_attack_random_checker(args, cfg: HarnessConfig) -> int:
    family = _family(args, cfg)
    dims = Dims(args.N1 or cfg.dims.N1, 1)
    if args.ptm not in catalog.RANDOM_CHECKERS:
        raise RegistryError(f"unknown randomized checker {args.ptm!r}")
    p = parse_rational(args.p, strict=False)
    y0 = int(args.y0)
    ptm = catalog.RANDOM_CHECKERS[args.ptm]()
    checker = catalog.derandomized_checker(ptm, p, y0)
    cert = adversary.attack_checker(cfg.solver(args.solver), checker, family, dims, cfg.alpha)
    _store(args, cfg).append(cert)
    return _print_exitflag(cert)


def cmd_report(args, cfg: HarnessConfig) -> int:
    store = _store(args, cfg)
    certs = store.load(rerun=args.rerun, resolver=cfg.resolver())
    rows = [c.record() for c in certs]
    cols = ("type", "solver", "checker", "N1", "verdict", "fuel", "descriptor_bytes")
    if args.csv:
        w = csv.writer(sys.stdout)
        w.writerow(cols)
        for r in rows:
            w.writerow([r.get(c, "") for c in cols])
    else:
        for r in rows:
            print("  ".join(f"{c}={r.get(c, '-')}" for c in cols))
        print(f"{len(rows)} certificate(s) re-verified")
    return EXIT_OK


def cmd_descriptor(args, cfg: HarnessConfig) -> int:
    family = _family(args, cfg)
    dims = Dims(args.N1 or cfg.dims.N1, args.N2 or cfg.dims.N2)
    if args.form == "exact":
        inp = Exact(build_instance(family, dims, InstanceParams(parse_rational(args.u1, False), parse_rational(args.u2, False))))
    elif args.form == "schedule":
        inp = Schedule(family, dims, args.j, args.t)
    else:
        inp = Diagonal.plain(family, dims, cfg.solver(args.solver))
    text = serialize(inp)
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
        print(f"wrote {args.output} ({descriptor_bytes(inp)} descriptor bytes)")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="harness config file")
    common.add_argument("--kind", help="override the family kind (LP, BP, LASSO)")
    common.add_argument("--kappa")
    common.add_argument("--eta")
    common.add_argument("--lam", help="LASSO lambda")
    common.add_argument("--p", help="norm exponent: positive integer or inf")
    common.add_argument("--N1", type=int)
    common.add_argument("--out", help="certificate directory")

    ap = argparse.ArgumentParser(prog="crpkit", description="Diagonal failure inputs and abstaining solvers")
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("attack", parents=[common], help="certify failures of an always-answering solver")
    s.add_argument("solver")
    s.add_argument("--count", "-K", type=int, default=1)
    s.set_defaults(func=cmd_attack)

    s = sub.add_parser("trustworthy", parents=[common], help="run the giving-up tower on a descriptor file")
    s.add_argument("descriptor")
    s.add_argument("--budget", "-n", type=int, required=True)
    s.set_defaults(func=cmd_trustworthy)

    s = sub.add_parser("verify-formulas", parents=[common], help="compare closed forms against grid search")
    s.add_argument("--samples", type=int, default=20)
    s.add_argument("--step", default="1/100")
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_verify_formulas)

    s = sub.add_parser("attack-exitflag", parents=[common], help="certify a wrong exit flag")
    s.add_argument("solver")
    s.add_argument("checker")
    s.set_defaults(func=cmd_attack_exitflag)

    s = sub.add_parser("attack-random-checker", parents=[common], help="derandomize a checker, then attack it")
    s.add_argument("solver")
    s.add_argument("ptm")
    s.add_argument("--success", dest="p", default="3/4", help="success probability bound p > 1/2")
    s.add_argument("--y0", default="1")
    s.set_defaults(func=cmd_attack_random_checker)

    s = sub.add_parser("report", parents=[common], help="re-verify and list stored certificates")
    s.add_argument("--csv", action="store_true")
    s.add_argument("--rerun", action="store_true", help="also replay subjects from the descriptors")
    s.set_defaults(func=cmd_report)

    s = sub.add_parser("descriptor", parents=[common], help="write a canonical input descriptor")
    s.add_argument("form", choices=("exact", "schedule", "diagonal"))
    s.add_argument("--u1", default="1/2")
    s.add_argument("--u2", default="1/2")
    s.add_argument("--j", type=int, default=1)
    s.add_argument("--t", type=int, default=1)
    s.add_argument("--N2", type=int)
    s.add_argument("--solver", default="Blind")
    s.add_argument("--output", "-o")
    s.set_defaults(func=cmd_descriptor)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config) if args.config else HarnessConfig()
        return args.func(args, cfg)
    except (ConfigurationError, RegistryError, DomainError, DimensionError, OSError) as e:
        print(f"configuration error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except ProtocolError as e:
        print(f"protocol error: {e}", file=sys.stderr)
        return EXIT_PROTOCOL
    except CertificateError as e:
        print(f"certificate re-check failed: {e}", file=sys.stderr)
        return EXIT_RECHECK
    except (DeterminismError, ContractError, NotApplicableError, BudgetExhausted) as e:
        print(f"subject error: {e}", file=sys.stderr)
        return EXIT_CONTRACT


if __name__ == "__main__":
    sys.exit(main())
