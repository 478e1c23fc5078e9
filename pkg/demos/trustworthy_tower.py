"""A solver that may say "I don't know" but is never wrong once it answers.

    python3 demos/trustworthy_tower.py
"""

from fractions import Fraction

from crpkit.markov import Exact, Schedule
from crpkit.problems import Dims, Family, InstanceParams, build_instance, iota_anchor
from crpkit.trustworthy import format_verdict, tower_solve

family, dims = Family.lp(), Dims(2)

inputs = {
    "schedule j=1 t=3": Schedule(family, dims, 1, 3),
    "schedule j=2 t=1": Schedule(family, dims, 2, 1),
    "degenerate u1=u2": Exact(iota_anchor(family, dims, 0)),
    "exact u=(1/2,1/3)": Exact(build_instance(family, dims, InstanceParams(Fraction(1, 2), Fraction(1, 3)))),
}

for label, inp in inputs.items():
    print(label)
    for n in (2, 4, 6, 8, 12, 20):
        print(f"  n={n:2d}: {format_verdict(tower_solve(inp, n))}")

# Schedule inputs look degenerate until step t, so the tower needs n >= 2t+2
# before the separation of u1 and u2 is visible above the approximation error.
