"""Phase estimation in a three-arm interferometer with correlated reference-phase noise."""

__version__ = "0.1.0"

from .channel import (
    DephasingParams,
    Gaussian,
    Kicks,
    PureProbe,
    cp_check,
    dephase,
    dephase_general,
    ensemble_average_channel,
    noise_to_dephasing,
)
from .classical import (
    CoherentConfig,
    asymptotic_variance,
    error_prop_variance,
    four_arm_variance,
    idiff_moments,
    mc_classical_oracle,
)
from .entanglement import (
    distillable_entanglement,
    kappa_gain_region,
    mc_state,
    optimize_q_entanglement,
    rel_entropy_coherence,
)
from .interferometer import (
    CountRecord,
    EstimationReport,
    InterferometerConfig,
    bootstrap_precision,
    fisher_information,
    locally_unbiased_estimate,
    optimal_projectors,
    outcome_probs,
    sample_counts,
    visibility,
)
from .metrology import (
    classical_fi,
    modes_asymmetry_norm,
    q_opt,
    qfi_closed,
    qfi_max,
    qfi_numeric,
    rel_entropy_asymmetry,
    sld,
)
