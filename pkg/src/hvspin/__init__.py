"""Monte Carlo laboratory for deterministic hidden-variable models of spin measurements."""

from .analytic import (
    ChshSettings,
    JointProbabilities,
    chsh_value,
    inner_integral_reduction,
    local_baseline_correlation,
    single_spin_expectation,
    singlet_conditional,
    singlet_correlation,
    singlet_joint_probabilities,
)
from .diagnostics import asymmetry_probe, chsh_scan, no_signaling_audit, outcome_dependence_audit
from .estimator import (
    EstimateWithError,
    JointCounts,
    RunConfig,
    correlation_estimate,
    expectation_estimate,
    marginal_estimates,
    run_trials,
)
from .geometry import SeededRng, UnitVector3, Vector3, cap_solid_angle_above, dot, sample_unit_vector, sgn
from .models import (
    COMPLETE,
    LOCAL_BASELINE,
    SINGLE_SPIN,
    SUFFICIENT_CONDITION,
    HiddenPair,
    ModelKind,
    ModelSpec,
    SettingPair,
    complete_outcomes,
    local_baseline_outcomes,
    single_spin_outcome,
    sufficient_condition_product,
)

__version__ = "0.1.0"
