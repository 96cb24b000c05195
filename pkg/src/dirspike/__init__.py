"""Toolkit for an excitable spiking system whose state carries a direction.

A fast vector state relaxes in a radially symmetric double-well potential
reshaped by a slow adaptation variable; input above threshold triggers
stereotyped norm spikes whose direction aligns with the input.  The package
provides integrators for the full and radial systems, phase-plane and
threshold analysis, excitability classification, randomised property
suites, and a closed-loop navigation scenario driven by the same dynamics.
"""

from .errors import (
    ConfigError,
    DimensionMismatch,
    DirspikeError,
    IntegrationBlowup,
    NormVanished,
    NoSubcriticalWindow,
    ObstacleSingularity,
    ThresholdBracketError,
)
from .model import (
    BistableStructureReport,
    GradientEnvelopeReport,
    ModelParams,
    adaptation,
    check_bistable_structure,
    check_gradient_envelope,
    envelope_constants,
    frozen_radial_equilibria,
    full_grad,
    pitchfork_thresholds,
    potential,
    radial_grad,
)
from .simulate import (
    DetectorConfig,
    FullState,
    ReducedState,
    SpikeTrain,
    Trajectory,
    detect_spikes,
    fi_curve,
    simulate_full,
    simulate_reduced,
    step_full,
    step_reduced,
    write_spikes_json,
    write_trajectory_csv,
)
from .analysis import (
    AlignmentReport,
    EquilibriumKind,
    EquilibriumPoint,
    FICurveReport,
    NullclineCurve,
    ThresholdReport,
    alignment_check,
    classify_point,
    classify_type,
    find_equilibria,
    jacobian,
    nullcline_r,
    nullcline_xs,
    reduced_rhs,
    threshold_scan,
)
from .navigation import (
    NavMetrics,
    NavParams,
    NavScenario,
    NavTrajectory,
    ReferencePath,
    RobotState,
    act,
    obstacle_input,
    run_scenario,
    step_nav,
    tracking_input,
    write_metrics_json,
    write_nav_csv,
)
from .vectors import cosine, inner, norm

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # errors
    "DirspikeError", "DimensionMismatch", "ConfigError", "NoSubcriticalWindow",
    "IntegrationBlowup", "NormVanished", "ThresholdBracketError", "ObstacleSingularity",
    # model
    "ModelParams", "potential", "radial_grad", "full_grad", "adaptation",
    "pitchfork_thresholds", "envelope_constants", "frozen_radial_equilibria",
    "GradientEnvelopeReport", "check_gradient_envelope",
    "BistableStructureReport", "check_bistable_structure",
    # simulate
    "FullState", "ReducedState", "Trajectory", "SpikeTrain", "DetectorConfig",
    "step_full", "step_reduced", "simulate_full", "simulate_reduced",
    "detect_spikes", "fi_curve", "write_trajectory_csv", "write_spikes_json",
    # analysis
    "EquilibriumKind", "EquilibriumPoint", "NullclineCurve", "reduced_rhs",
    "nullcline_r", "nullcline_xs", "jacobian", "classify_point",
    "find_equilibria", "ThresholdReport", "threshold_scan", "FICurveReport",
    "classify_type", "AlignmentReport", "alignment_check",
    # navigation
    "NavParams", "ReferencePath", "RobotState", "NavScenario", "NavTrajectory",
    "NavMetrics", "act", "tracking_input", "obstacle_input", "step_nav",
    "run_scenario", "write_nav_csv", "write_metrics_json",
    # vectors
    "inner", "norm", "cosine",
]
