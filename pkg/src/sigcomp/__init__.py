"""Compensator-based signal detection in mixtures with unknown background."""

__version__ = "0.1.0"

from .density import (
    DEFAULT_QUAD,
    FAST_QUAD,
    DensityModel,
    QuadratureSpec,
    SearchRegion,
    make_bump_mixture,
    mixture,
    normalize,
)
from .compensator import (
    InferenceReport,
    ScoreGeometry,
    TwoSampleEstimate,
    compensator_delta,
    estimate_two_sample,
    score_geometry,
    test_z1,
)
from .parametric import (
    DeltaMethodPieces,
    MleResult,
    ParametricProposal,
    delta_method_pieces,
    fit_mle,
    standard_family,
    test_z2,
)
from .nobkg import (
    SensitivityGrid,
    SignalRegion,
    Theta0Estimate,
    estimate_theta0,
    sensitivity_scan,
    signal_region,
    test_z3,
    theoretical_type1,
)
from .lrt import (
    LrtFit,
    chi2bar01_cdf,
    chi2bar01_quantile,
    delta_tilde,
    fit_lrt,
    spurious_proposal,
)
from .montecarlo import McScenario, McSummary, run_campaign, run_grid

__all__ = [
    "__version__",
    "SearchRegion", "QuadratureSpec", "DensityModel", "DEFAULT_QUAD", "FAST_QUAD",
    "normalize", "mixture", "make_bump_mixture",
    "ScoreGeometry", "TwoSampleEstimate", "InferenceReport",
    "score_geometry", "compensator_delta", "estimate_two_sample", "test_z1",
    "ParametricProposal", "MleResult", "DeltaMethodPieces",
    "fit_mle", "delta_method_pieces", "test_z2", "standard_family",
    "SignalRegion", "Theta0Estimate", "SensitivityGrid",
    "signal_region", "estimate_theta0", "test_z3", "sensitivity_scan",
    "theoretical_type1",
    "LrtFit", "fit_lrt", "chi2bar01_cdf", "chi2bar01_quantile",
    "delta_tilde", "spurious_proposal",
    "McScenario", "McSummary", "run_campaign", "run_grid",
]
