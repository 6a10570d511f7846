"""Sparse recovery under structured sensing-matrix perturbation.

The package covers the full pipeline: instance generation for the model
``y = (A + B diag(beta)) x + e``, conic solvers with optimality
certificates, recovery strategies (oracle, nominal, two-part sparse,
alternating, positive-signal, relaxation check), restricted-isometry
analysis and recovery-bound constants, a direction-of-arrival front end,
and an experiment harness with a command-line interface.

Plot rendering lives in :mod:`perturbcs.plotting` and is imported on
demand so that importing the package does not load the plotting stack.
"""

from .analysis import (
    BoundReport,
    DRipReport,
    RipReport,
    baseline_bound_constants,
    compressible_bound_constants,
    compute_drip,
    compute_ric,
    drip_threshold,
    error_metrics,
    max_perturbation_radius,
    sparse_bound_constants,
    spectral_norm,
)
from .doa import (
    DoaEstimate,
    DoaGrid,
    DoaModel,
    DoaScene,
    build_grid_model,
    estimate_doa,
    gen_two_source_scene,
    grid_truth,
    min_sensors_for_condition,
    model_error_bound,
    mse_lower_bound,
    simulate_scene,
    steering_derivative,
    steering_vector,
)
from .harness import (
    DoaConfig,
    DoaRunResult,
    ExperimentConfig,
    SpectraConfig,
    SpectraResult,
    StrategyOutcome,
    SweepAggregate,
    SweepResult,
    TrialRecord,
    export_results,
    get_preset,
    import_results,
    preset_names,
    run_doa,
    run_preset,
    run_spectra,
    run_sweep,
    run_trial,
)
from .model import (
    ROLE_ENSEMBLE,
    ROLE_NOISE,
    ROLE_PERTURBATION,
    ROLE_SIGNAL,
    CompressibleSpec,
    GroundTruth,
    MeasurementSet,
    SensingEnsemble,
    best_k_term,
    gen_gaussian_ensemble,
    gen_noise,
    gen_perturbation,
    gen_signal,
    measure,
    stream,
)
from .recovery import (
    AaOptions,
    RecoveryResult,
    effectiveness_check,
    recover_aa_p_bpdn,
    recover_nominal_bpdn,
    recover_oracle_bpdn,
    recover_pp_bpdn,
    recover_relax_check,
    recover_tps_bpdn,
)
from .solvers import (
    BoxLsProblem,
    SocL1Problem,
    SolverOptions,
    SolverResult,
    solve_box_ls,
    solve_pos_p1,
    solve_relaxed,
    solve_socl1,
)

__version__ = "0.1.0"
