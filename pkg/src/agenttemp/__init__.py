"""Temperature measurement in two-state agent systems."""

from .domain import (
    ConvergenceError,
    CountRecord,
    DomainError,
    EstimateMethod,
    MisuseError,
    SpinConfiguration,
    SurplusEstimate,
    SystemParams,
    TemperatureReading,
    Topology,
    UnboundedTemperatureError,
    Variant,
    validate_params,
)
from .meanfield import (
    characteristic_curve,
    effective_field,
    measure_temperature,
    measure_temperature_ideal,
    measure_temperature_taylor,
    occupation_probabilities,
    self_consistent_surplus,
)

__version__ = "0.1.0"
