"""Tail checks and restricted isometry experiments for isotropic
log-concave random matrices.

The package splits into ensembles (samplers and seeding), spectra (moment
growth models and sparsity thresholds), sparse_norms (exact and heuristic
submatrix norms, nets, block decompositions), tailcheck (Monte Carlo
calibration harnesses), and recovery (certificates, l1 decoding, phase
diagrams).  The ``lcsparse`` console script drives all of them.
"""

from .ensembles import (
    EnsembleKind,
    EnsembleSpec,
    ISOTROPY_COV_TOL,
    ISOTROPY_MEAN_TOL,
    IsotropyReport,
    RngStream,
    SampleMatrix,
    empirical_psi1,
    isotropy_report,
    l1_ball_radius,
    sample_block,
    sample_matrix,
    sample_vector,
)
from .errors import BudgetExceeded, ConvergenceFailure
from .recovery import (
    BasisPursuitResult,
    PhaseDiagram,
    RecoveryTrial,
    RipCertificate,
    basis_pursuit,
    phase_diagram,
    recovery_trial,
    rip_admissible_m,
    rip_certificate,
)
from .sparse_norms import (
    BlockSizes,
    NetDecomposition,
    RipDeviation,
    SubmatrixResult,
    akm_exact,
    akm_lower,
    akm_profile,
    choose_block_sizes,
    delta_m_exact,
    delta_m_lower,
    entropy_bound,
    epsilon_net_sparse_sphere,
    g_function,
    k_prime,
    lambda_km,
    lambda_m,
    operator_norm,
    sparse_net_project,
    split_interaction_bound,
)
from .spectra import (
    M0Result,
    SigmaModel,
    count_exceed,
    empirical_sigma_model,
    m0_threshold,
    m1_threshold,
    omega_cutoff,
    rearrange_desc,
    sigma_estimate,
    top_m_norm,
    top_m_norm_rows,
)
from .tailcheck import (
    CalibrationReport,
    SurvivalCurve,
    TailReport,
    calibrate_constant,
    check_count_moments,
    check_euclid_norm,
    check_gram_convergence,
    check_order_stat,
    check_projection_sup,
    check_submatrix_tail,
    check_weighted_sum,
    log_survival_slope,
    survival_curve,
)

__version__ = "0.1.0"

__all__ = [
    "BasisPursuitResult",
    "BlockSizes",
    "BudgetExceeded",
    "CalibrationReport",
    "ConvergenceFailure",
    "EnsembleKind",
    "EnsembleSpec",
    "ISOTROPY_COV_TOL",
    "ISOTROPY_MEAN_TOL",
    "IsotropyReport",
    "M0Result",
    "NetDecomposition",
    "PhaseDiagram",
    "RecoveryTrial",
    "RipCertificate",
    "RipDeviation",
    "RngStream",
    "SampleMatrix",
    "SigmaModel",
    "SubmatrixResult",
    "SurvivalCurve",
    "TailReport",
    "akm_exact",
    "akm_lower",
    "akm_profile",
    "basis_pursuit",
    "calibrate_constant",
    "check_count_moments",
    "check_euclid_norm",
    "check_gram_convergence",
    "check_order_stat",
    "check_projection_sup",
    "check_submatrix_tail",
    "check_weighted_sum",
    "choose_block_sizes",
    "count_exceed",
    "delta_m_exact",
    "delta_m_lower",
    "empirical_psi1",
    "empirical_sigma_model",
    "entropy_bound",
    "epsilon_net_sparse_sphere",
    "g_function",
    "isotropy_report",
    "k_prime",
    "l1_ball_radius",
    "lambda_km",
    "lambda_m",
    "log_survival_slope",
    "m0_threshold",
    "m1_threshold",
    "omega_cutoff",
    "operator_norm",
    "phase_diagram",
    "rearrange_desc",
    "recovery_trial",
    "rip_admissible_m",
    "rip_certificate",
    "sample_block",
    "sample_matrix",
    "sample_vector",
    "sigma_estimate",
    "sparse_net_project",
    "split_interaction_bound",
    "survival_curve",
    "top_m_norm",
    "top_m_norm_rows",
]
