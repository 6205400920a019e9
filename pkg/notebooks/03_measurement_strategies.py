"""
Comparing measurement strategies
================================

The same instance run through each strategy, then the exact single-run
success probability of the standard and output-first pipelines.
"""

# %%
from shorlab import Problem, run_accumulate, run_nmr_ensemble, run_output_first, run_skip_qft, run_standard
from shorlab.audit import exact_success_probability

problem = Problem.create(21, 2)
for runner in (run_standard, run_output_first, run_skip_qft):
    rec = runner(problem, seed=5)
    print(f"{rec.strategy.value:13s} samples={rec.samples} period={rec.period} "
          f"factors={rec.factors} failure={rec.failure}")

rec = run_accumulate(problem, 3, seed=5, source="skip_qft")
print("accumulate   ", rec.samples, rec.period, rec.factors, rec.failure)

# %% Ensemble averaging only reads off periods that are powers of two.
for A in (7, 11, 2):
    ens = run_nmr_ensemble(Problem.create(15, A, n=3), 10**4, seed=0)
    print(f"A={A:2d}  bit means {[round(m, 2) for m in ens.bit_means]}  r~{ens.r_estimate}  verified={ens.verified}")

# %% Measuring the output register first does not change the input-register statistics.
for strategy in ("standard", "output_first"):
    print(strategy, round(exact_success_probability(problem, strategy), 6))
