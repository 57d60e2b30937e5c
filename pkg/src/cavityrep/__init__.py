"""Secret key rates of quantum repeaters built from single emitters in optical cavities."""
from .combinatorics import z_factor
from .errors import (
    ConsistencyError,
    DegeneratePurificationError,
    DivergenceError,
    InvalidStateError,
    ParameterError,
    RepeaterError,
)
from .gates import GateModel, make_gate
from .generation import LinkParams, generate_one_photon, generate_two_photon
from .rates import RepeaterConfig, TimingBreakdown, distribution_rate, final_fidelity
from .secret import RateReport, build_report, secret_fraction
from .states import entanglement_swap, purify, werner

__all__ = [
    "ConsistencyError",
    "DegeneratePurificationError",
    "DivergenceError",
    "GateModel",
    "InvalidStateError",
    "LinkParams",
    "ParameterError",
    "RateReport",
    "RepeaterConfig",
    "RepeaterError",
    "TimingBreakdown",
    "build_report",
    "distribution_rate",
    "entanglement_swap",
    "final_fidelity",
    "generate_one_photon",
    "generate_two_photon",
    "make_gate",
    "purify",
    "secret_fraction",
    "werner",
    "z_factor",
]
