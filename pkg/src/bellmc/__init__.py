"""Event-based Monte Carlo laboratory for two-photon polarization
coincidence experiments under local (factorizable) detection models.

The package simulates source emission, propagation to two polarizers,
reduction of the transverse impact point modulo each polarizer's rotated
lattice cell, and per-device Bernoulli outcomes; it then assembles
CHSH-type and Clauser-Horn statistics with exact-count reproducibility,
and checks them against independent closed-form and quadrature oracles.
"""

__version__ = "0.1.0"

from .config import ExperimentConfig, load_config, parse_angle
from .engine import (
    CoincidenceResult,
    QuadResult,
    RunConfig,
    run_coincidence,
    run_qm_reference,
    run_quad,
)
from .errors import (
    AnalysisError,
    BellmcError,
    ConfigParseError,
    ConfigurationError,
    GeometryError,
    OracleApplicabilityError,
    ResourceError,
    StatisticsError,
)
from .geometry import (
    ArmGeometry,
    EffectiveImpactParameter,
    Lattice,
    effective_impact,
    impact_histogram,
    propagate,
)
from .hidden import HiddenVariableSample, PolarizationState, SourceDistribution, SourceState
from .inequalities import (
    CHSH_BOUND,
    TSIRELSON_BOUND,
    SettingsQuad,
    bell_residual,
    ch_statistic,
    chsh,
    inequality_report,
    maximize_settings,
    setting_independence_test,
)
from .models import DetectionModel, ImpactModulationParams, build_model
from .stats import Estimate, binomial_estimate

__all__ = [
    "AnalysisError",
    "ArmGeometry",
    "BellmcError",
    "CHSH_BOUND",
    "CoincidenceResult",
    "ConfigParseError",
    "ConfigurationError",
    "DetectionModel",
    "EffectiveImpactParameter",
    "Estimate",
    "ExperimentConfig",
    "GeometryError",
    "HiddenVariableSample",
    "ImpactModulationParams",
    "Lattice",
    "OracleApplicabilityError",
    "PolarizationState",
    "QuadResult",
    "ResourceError",
    "RunConfig",
    "SettingsQuad",
    "SourceDistribution",
    "SourceState",
    "StatisticsError",
    "TSIRELSON_BOUND",
    "bell_residual",
    "binomial_estimate",
    "build_model",
    "ch_statistic",
    "chsh",
    "effective_impact",
    "impact_histogram",
    "inequality_report",
    "load_config",
    "maximize_settings",
    "parse_angle",
    "propagate",
    "run_coincidence",
    "run_qm_reference",
    "run_quad",
    "setting_independence_test",
    "__version__",
]
