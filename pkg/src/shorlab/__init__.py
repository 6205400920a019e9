"""Exact simulation of Shor order finding built on the branch decomposition
of the post-modexp state, with several measurement strategies and an audit
of quantitative claims about them."""

__version__ = "0.1.0"

from .noise import ReadoutModel, apply_readout_noise, register_fidelity
from .numtheory import (
    CandidateSource,
    ExtractionFailure,
    FactoringInstance,
    FailureReason,
    PeriodCandidate,
    SharedFactor,
    extract_factors,
    infer_period,
    mod_pow,
    multiplicative_order,
    qubit_budget,
    register_size_for,
)
from .qstate import (
    DenseState,
    Distribution,
    PeriodicState,
    Problem,
    Stage,
    apply_modexp,
    dense_state,
    measure_input,
    measure_output_first,
    prepare_uniform,
    qft_distribution,
)
from .strategies import (
    EnsembleReport,
    RunRecord,
    Strategy,
    run_accumulate,
    run_nmr_ensemble,
    run_output_first,
    run_skip_qft,
    run_standard,
)
