"""fdcell: outage and rate analysis of a full-duplex access point serving
spatially random uplink/downlink user pairs.

The package is organized as:

- :mod:`fdcell.model`      scenario configuration and per-realization physics
- :mod:`fdcell.geometry`   spatial sampling (Poisson disk, user selection)
- :mod:`fdcell.specfun`    quadrature, series, and special-function kernels
- :mod:`fdcell.analytic`   closed forms, bounds, integrals, asymptotics
- :mod:`fdcell.montecarlo` deterministic parallel Monte Carlo estimators
- :mod:`fdcell.cli`        sweep / validate / figure command line
"""

__version__ = "0.1.0"

from .errors import DomainError, UnstableEstimateError, ValidationError
from .model import (
    FadingDraw,
    HdCondition,
    HdPowerPolicy,
    ScenarioConfig,
    Selection,
    TopologySample,
    load_scenario,
    parse_scenario_text,
    validate_scenario,
)

__all__ = [
    "DomainError",
    "UnstableEstimateError",
    "ValidationError",
    "ScenarioConfig",
    "TopologySample",
    "FadingDraw",
    "Selection",
    "HdPowerPolicy",
    "HdCondition",
    "validate_scenario",
    "parse_scenario_text",
    "load_scenario",
    "__version__",
]
