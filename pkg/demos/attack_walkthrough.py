"""Build a diagonal input against a solver and read the failure certificate it produces.

    python3 demos/attack_walkthrough.py
"""

import math

from crpkit import catalog
from crpkit.adversary import attack_solver, verify_certificate
from crpkit.exactnum import format_vec
from crpkit.markov import Diagonal, eval_coord, metered_run
from crpkit.problems import Dims, Family

family, dims = Family.lp(), Dims(2)

# OneQuery reads coordinate 1 at precision 1, then commits to the y2 endpoint.
solver = catalog.SOLVERS["OneQuery"]
diag = Diagonal.plain(family, dims, solver)

print("Approximations the diagonal input hands out (coordinate 1):")
for n in range(1, 7):
    print(f"  n={n}: {eval_coord(diag, 1, n)}")

run = metered_run(diag, math.inf)
print(f"\nUncapped run: verdict {run.verdict}, fuel {run.fuel}, answer {format_vec(run.answer)}")
print("Capped runs around the fuel threshold:")
for pool in range(run.fuel - 2, run.fuel + 2):
    print(f"  pool {pool}: {type(metered_run(diag, pool)).__name__}")

cert = attack_solver(solver, family, dims)
verify_certificate(cert, rerun=True)
print(f"\nGround truth: u1={cert.instance.u1} u2={cert.instance.u2}")
print(f"Solver answer {format_vec(cert.answer[:2])} lies {cert.distance.exact()} from the solution set")
print(f"(tolerance kappa = {family.kappa}); certificate re-verified from its descriptor.")

print("\nEvery built-in solver fails somewhere:")
for name in catalog.ANCHORED_SOLVERS:
    c = attack_solver(catalog.SOLVERS[name], family, dims)
    print(f"  {name:10s} verdict {c.verdict}  fuel {c.fuel:3d}  distance {c.distance.exact()}")
