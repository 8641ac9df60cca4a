"""Subspace identification with eigenvalue-region constraints built from step-response priors."""

from .constrain import InfeasibleError, SdpProblem, SdpSolution, solve_constrained, verify_solution
from .features import (BoundedPriors, FeatureConfig, PriorEstimates, StepFeatures, aggregate_priors,
                       apply_tuning, extract_features, priors_from_features, regions_from_priors)
from .lti import (ContinuousStateSpace, DiscreteStateSpace, SignalRecord, TransferFunction, c2d_zoh,
                  colored_noise, frequency_response, markov_parameters, prbs, second_order_tf,
                  simulate, step_response, tf_to_ss)
from .regions import (LmiRegion, cardioid_circle, cardioid_ellipse_conservative, cardioid_ellipse_inner,
                      circle_region, conic_region, critical_zeta, ellipse_region, intersect,
                      settling_circle, stability_circle)
from .subspace import HankelConfig, IdentificationResult, pi_moesp

__version__ = "0.1.0"

__all__ = [
    "BoundedPriors", "ContinuousStateSpace", "DiscreteStateSpace", "FeatureConfig", "HankelConfig",
    "IdentificationResult", "InfeasibleError", "LmiRegion", "PriorEstimates", "SdpProblem",
    "SdpSolution", "SignalRecord", "StepFeatures", "TransferFunction", "aggregate_priors",
    "apply_tuning", "c2d_zoh", "cardioid_circle", "cardioid_ellipse_conservative",
    "cardioid_ellipse_inner", "circle_region", "colored_noise", "conic_region", "critical_zeta",
    "ellipse_region", "extract_features", "frequency_response", "intersect", "markov_parameters",
    "pi_moesp", "prbs", "priors_from_features", "regions_from_priors", "second_order_tf",
    "settling_circle", "simulate", "solve_constrained", "stability_circle", "step_response",
    "tf_to_ss", "verify_solution",
]
