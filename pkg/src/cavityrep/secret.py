"""Six-state secret-key fraction and per-station key rates."""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ParameterError
from .rates import RepeaterConfig, distribution_rate
from .states import bell_fidelity, check_state, to_werner

P_SIFT = 1.0


def binary_entropy(p: float) -> float:
    if not 0.0 <= p <= 1.0:
        raise ParameterError(f"probability must lie in [0, 1], got {p}")
    if p == 0.0 or p == 1.0:
        return 0.0
    return -p * math.log2(p) - (1.0 - p) * math.log2(1.0 - p)


def secret_fraction_raw(F: float) -> float:
    """Unclamped six-state fraction; negative below the threshold fidelity."""
    if not 0.0 <= F <= 1.0:
        raise ParameterError(f"fidelity must lie in [0, 1], got {F}")
    e = 2.0 * (1.0 - F) / 3.0
    inner = min(1.0, max(0.0, (1.0 - 1.5 * e) / (1.0 - e)))
    return 1.0 - binary_entropy(e) - e - (1.0 - e) * binary_entropy(inner)


def secret_fraction(F: float) -> float:
    """Asymptotic six-state key fraction of a Werner pair with phi+ weight ``F``, clamped at 0."""
    return max(0.0, secret_fraction_raw(F))


@dataclass(frozen=True)
class RateReport:
    final_fidelity: float
    distribution_rate: float
    secret_fraction: float
    secret_key_rate: float
    normalized_rate: float
    stations: int
    p_sift: float = P_SIFT


def build_report(config: RepeaterConfig, fidelity, dist_rate: float, p_sift: float = P_SIFT) -> RateReport:
    """Fill a :class:`RateReport`; ``fidelity`` may be a number or a density matrix."""
    if not isinstance(fidelity, (int, float)):
        fidelity = bell_fidelity(to_werner(check_state(fidelity)))
    if not 0.0 <= fidelity <= 1.0:
        raise ParameterError(f"fidelity must lie in [0, 1], got {fidelity}")
    if dist_rate < 0:
        raise ParameterError(f"distribution rate must be non-negative, got {dist_rate}")
    f = secret_fraction(fidelity)
    secret = dist_rate * p_sift * f
    stations = config.stations
    return RateReport(fidelity, dist_rate, f, secret, secret / stations, stations, p_sift)


def evaluate(config: RepeaterConfig) -> tuple[RateReport, object]:
    """Distribution rate and secret-key report of one configuration."""
    result = distribution_rate(config)
    return build_report(config, result.state, result.rate), result
