"""The fireworks game and beating budgeted function oracles.

A uniform random test count k in 0..n-1 wins against every seller with
probability exactly 1 - 1/n, and the stepwise description (take the first
firework with probability 1/n, the next with 1/(n-1), ...) induces exactly
the same law. The same schedule drives the take/test protocol that beats a
total function oracle somewhere on its graph.
"""
from fractions import Fraction as F

from lll_toolkit import (ConstantOracle, DivergeAtOracle, IdentityOracle,
                         Tape, beat_many, beat_with_k, loss_probability,
                         sequential_take_distribution,
                         win_probability_exact)

print("worst-case win probabilities:")
for n in (1, 2, 10, 100):
    print(f"  n = {n:3d}: {win_probability_exact(n)}")

print("\nexact loss against each seller choice (n = 10):")
for K in (0, 5, 9, 12, None):
    label = "all good" if K is None else f"K = {K}"
    print(f"  {label:9s}: {loss_probability(10, K)}")

assert sequential_take_distribution(100) == (F(1, 100),) * 100
print("\nstepwise take/test law equals the uniform law for n = 100")

print("\nbeating the identity oracle (epsilon = 1/4, so k in 0..3):")
for k in range(4):
    result = beat_with_k(IdentityOracle(), k)
    table = {u: result.value(u) for u in range(result.frontier + 1)}
    print(f"  k = {k}: {result.status}, table {table}")

print("\none row per oracle, error shares epsilon/2, epsilon/4, ...:")
oracles = [IdentityOracle(), ConstantOracle(9),
           DivergeAtOracle(frozenset({2}))]
result = beat_many(oracles, F(1, 4), Tape(seed=3))
for i, row in enumerate(result.rows):
    print(f"  row {i}: n = {result.row_ns[i]}, k = {row.k}, {row.status}")
