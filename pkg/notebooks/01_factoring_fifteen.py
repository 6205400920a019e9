"""
Factoring 15 step by step
=========================

Walk through one order-finding run for N = 15 with base A = 7, printing the
joint register contents after the modular exponentiation and after the QFT.
"""

# %%
import numpy as np

from shorlab import Problem, Stage, dense_state, extract_factors, infer_period

problem = Problem.create(15, 7, n=4, m=4)
print("order of 7 mod 15:", problem.order)

# %% After modular exponentiation every input value x sits next to 7**x mod 15.
for x, f, amp in dense_state(problem, Stage.POST_MODEXP).entries:
    print(f"|{x:2d}>|{f:2d}>  {amp.real:+.3f}")

# %% After the QFT only multiples of M / r = 4 survive; the phases differ per residue.
for p, f, amp in dense_state(problem, Stage.POST_QFT).entries:
    print(f"|{p:2d}>|{f:2d}>  {amp:.3f}")

# %% Sample the input register and work back to factors.
rng = np.random.default_rng(3)
d = problem.distribution
for c in d.sample(rng, size=6):
    cands = [cand.r for cand in infer_period(int(c), problem.M, problem.N)]
    print(f"measured {int(c):2d} -> period candidates {cands}")

print("factors from r = 4:", extract_factors(7, 4, 15))
