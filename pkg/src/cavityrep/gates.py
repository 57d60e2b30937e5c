"""Effective models of the two-qubit gates used for purification and swapping."""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ParameterError

ROTATION_TIME = 10e-6  # single-qubit rotations, s
HERALDED_ERROR = 4e-5
ION_TRAP_FIDELITY = 0.993
ION_TRAP_GATE_TIME = 50e-6


@dataclass(frozen=True)
class GateModel:
    """A CNOT/CZ gate seen through its error, success probability and duration.

    ``error`` is ``1 - F`` where ``F`` is the gate fidelity that enters the
    depolarizing noise model; ``success_prob`` is below one only for heralded
    gates.
    """

    error: float
    success_prob: float
    gate_time: float
    name: str = "gate"

    def __post_init__(self):
        if not 0.0 <= self.error <= 1.0:
            raise ParameterError(f"gate error must lie in [0, 1], got {self.error}")
        if not 0.0 <= self.success_prob <= 1.0:
            raise ParameterError(f"gate success probability must lie in [0, 1], got {self.success_prob}")
        if self.gate_time < 0:
            raise ParameterError(f"gate time must be non-negative, got {self.gate_time}")

    @property
    def fidelity(self) -> float:
        # fidelities below 1/4 are not reachable by a depolarizing channel
        return max(0.25, 1.0 - self.error)

    @property
    def heralded(self) -> bool:
        return self.success_prob < 1.0


def _check_cooperativity(C: float) -> None:
    if not C > 0:
        raise ParameterError(f"cooperativity must be positive, got {C}")


def gate1(C: float, gamma: float) -> GateModel:
    """Heralded CZ gate: constant error, failure probability ~ 6/sqrt(C)."""
    _check_cooperativity(C)
    if not gamma > 0:
        raise ParameterError(f"gamma must be positive, got {gamma}")
    root = math.sqrt(C)
    return GateModel(
        error=HERALDED_ERROR,
        success_prob=max(0.0, 1.0 - 6.0 / root),
        gate_time=377.0 / (gamma * root) + ROTATION_TIME,
        name="gate1",
    )


def gate2(C: float, eta_d: float) -> GateModel:
    """Deterministic reflection/teleportation CNOT with error 1.2/(eta_d C)."""
    _check_cooperativity(C)
    if not 0.0 < eta_d <= 1.0:
        raise ParameterError(f"eta_d must lie in (0, 1], got {eta_d}")
    return GateModel(error=min(1.0, 1.2 / (eta_d * C)), success_prob=1.0, gate_time=ROTATION_TIME, name="gate2")


def gate3(C: float) -> GateModel:
    """Direct cavity gate without heralding, error 3.6/sqrt(C)."""
    _check_cooperativity(C)
    return GateModel(error=min(1.0, 3.6 / math.sqrt(C)), success_prob=1.0, gate_time=ROTATION_TIME, name="gate3")


def ion_trap_gate() -> GateModel:
    return GateModel(error=1.0 - ION_TRAP_FIDELITY, success_prob=1.0, gate_time=ION_TRAP_GATE_TIME, name="ion")


def perfect_gate() -> GateModel:
    return GateModel(error=0.0, success_prob=1.0, gate_time=0.0, name="perfect")


GATE_NAMES = ("gate1", "gate2", "gate3", "ion", "perfect")


def make_gate(name: str, C: float, gamma: float, eta_d: float) -> GateModel:
    if name == "gate1":
        return gate1(C, gamma)
    if name == "gate2":
        return gate2(C, eta_d)
    if name == "gate3":
        return gate3(C)
    if name == "ion":
        return ion_trap_gate()
    if name == "perfect":
        return perfect_gate()
    raise ParameterError(f"unknown gate {name!r}; expected one of {GATE_NAMES}")
