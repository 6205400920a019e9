"""
Auditing quantitative claims
============================

Every claim is checked against the simulator and classified. The sweep at
the end prints the success rate per modulus with a Wilson interval.
"""

# %%
from shorlab.audit import run_all, success_sweep, sweep_to_csv

for report in run_all(seed=0):
    print(f"{report.claim_id:14s} {report.verdict.value}")

# %% Counterexamples to the power-of-two form of the order.
pow2 = [r for r in run_all(seed=0) if r.claim_id == "pow2form"][0]
print(pow2.evidence["counterexamples"][:5])

# %% Standard-strategy success for a few small moduli.
print(sweep_to_csv(success_sweep([15, 21, 33, 35], trials=500, seed=0)))
