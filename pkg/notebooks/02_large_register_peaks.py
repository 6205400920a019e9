"""
Peaks for N = 119
=================

With A = 92 the order is 16, which divides M = 2**14, so the post-QFT
outcomes sit exactly on the multiples of 1024. Printing them in binary shows
the ten low zero bits shared by every outcome.
"""

# %%
from shorlab import Problem
from shorlab.audit import reproduce_eq21

problem = Problem.create(119, 92, n=14)
d = problem.distribution
for p in d.support():
    print(f"{int(p):5d}  {int(p):014b}  mass {d.mass(int(p)):.4f}")

# %% Fourteen bits are needed to hold 15 * 1024.
print(reproduce_eq21().evidence)

# %% Shrinking the register to 13 bits moves the peaks to multiples of 512.
small = Problem.create(119, 92, n=13).distribution
print(small.support()[:4], "...")
