"""Turn a randomized exit-flag checker into a deterministic one, then defeat it.

    python3 demos/derandomization.py
"""

from fractions import Fraction

from crpkit import catalog
from crpkit.adversary import attack_checker
from crpkit.problems import Dims, Family
from crpkit.randomized import FAIR_COIN, derandomize_multi_valued, derandomize_single_valued, or_ptm, outputs_at_depth

ptm = or_ptm(lambda x: x % 2)
print("OR machine on input 1: output probabilities by tape depth")
for t in range(1, 4):
    masses = {y: sum(FAIR_COIN(s, 0) for s in tapes) for y, tapes in outputs_at_depth(ptm, 1, t).items()}
    print(f"  depth {t}: " + ", ".join(f"{y} -> {m}" for y, m in sorted(masses.items())))

print("single-valued derandomizer:", derandomize_single_valued(ptm, FAIR_COIN, 1))
print("multi-valued derandomizer (p=3/4):", derandomize_multi_valued(ptm, FAIR_COIN, 1, Fraction(3, 4), 0))

checker = catalog.derandomized_checker(catalog.randomized_flag_ptm(), Fraction(3, 4), 1)
cert = attack_checker(catalog.SOLVERS["Blind"], checker, Family.lp(), Dims(2))
print(f"\n{checker.id} against Blind: checker said {cert.checker_output}, true exit flag {cert.truth_flag}")
