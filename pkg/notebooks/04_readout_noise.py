"""
Readout noise
=============

Each bit of a measured register flips independently with probability 1 - F.
The chance of reading a whole register correctly decays like F**n.
"""

# %%
import numpy as np

from shorlab import Problem, ReadoutModel, apply_readout_noise, register_fidelity, run_standard

for n in (10, 100, 1000):
    print(f"F=0.99, n={n:4d}: register fidelity {register_fidelity(ReadoutModel(0.99), n):.3g}")

# %% Success rate of the standard pipeline on N = 21 as F drops.
problem = Problem.create(21, 2)
for F in (1.0, 0.99, 0.95, 0.9):
    model = ReadoutModel(F)
    wins = sum(run_standard(problem, seed=s, readout=model).succeeded for s in range(2000))
    print(f"F={F:.2f}  success rate {wins / 2000:.3f}")

# %% A single noisy readout of value 0 shows which bits flipped.
rng = np.random.default_rng(1)
print(np.binary_repr(int(apply_readout_noise(0, 16, ReadoutModel(0.8), rng)), 16))
