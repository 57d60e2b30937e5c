"""Heralded entanglement generation in one elementary link.

Two schemes are modeled: the two-photon (two-click) scheme, which heralds phi+
with unit fidelity in the absence of dark counts, and the single-photon
(one-click) scheme, whose fidelity trades off against the excitation
probability ``eps_sq``.  All returned states are expressed in the phi+ frame.

The closed-form coefficients come in two flavours selected by ``formulas``:

``"verbatim"``
    the literal expressions, renormalized so the state has unit trace;
``"corrected"`` (default)
    the same event bookkeeping with the inconsistent terms repaired so that the
    coefficients sum exactly to one and the success probability is the sum of
    the event probabilities.
"""
from __future__ import annotations

import math
import sys
from dataclasses import dataclass, replace

import numpy as np

from .errors import ConsistencyError, ParameterError
from .states import apply_local, bell_diagonal, check_state, projector

ONE_PHOTON = "one_photon"
TWO_PHOTON = "two_photon"
SCHEMES = (ONE_PHOTON, TWO_PHOTON)
CAVITY = "cavity"
ION_TRAP = "ion_trap"
ION_COLLECTION = 0.10

NORMALIZATION_TOL = 1e-9


@dataclass(frozen=True)
class LinkParams:
    """Physical parameters of one elementary link.

    Units: ``gamma`` rad/s, ``l0``/``l_att`` km, ``r_dark`` Hz, ``tau_local`` s,
    ``c_fiber`` km/s.  Defaults are the values used in all optimizations.
    """

    cooperativity: float = 100.0
    gamma: float = 2 * math.pi * 6e6
    eta_d: float = 0.5
    l0: float = 50.0
    l_att: float = 22.0
    r_dark: float = 25.0
    tau_local: float = 10e-6
    c_fiber: float = 2e5

    def __post_init__(self):
        if not self.cooperativity > 0:
            raise ParameterError(f"cooperativity must be positive, got {self.cooperativity}")
        if not self.gamma > 0:
            raise ParameterError(f"gamma must be positive, got {self.gamma}")
        if not 0.0 <= self.eta_d <= 1.0:
            raise ParameterError(f"eta_d must lie in [0, 1], got {self.eta_d}")
        if not self.l0 > 0:
            raise ParameterError(f"elementary link length must be positive, got {self.l0}")
        if not self.l_att > 0:
            raise ParameterError(f"attenuation length must be positive, got {self.l_att}")
        if self.r_dark < 0:
            raise ParameterError(f"dark count rate must be non-negative, got {self.r_dark}")
        if self.tau_local < 0:
            raise ParameterError(f"tau_local must be non-negative, got {self.tau_local}")
        if not self.c_fiber > 0:
            raise ParameterError(f"signal speed must be positive, got {self.c_fiber}")

    def with_length(self, l0: float) -> "LinkParams":
        return replace(self, l0=l0)

    @property
    def attempt_time(self) -> float:
        """Duration of one generation attempt, L0/c + tau_local."""
        return self.l0 / self.c_fiber + self.tau_local


@dataclass(frozen=True)
class GenerationAttempt:
    state: np.ndarray
    success_prob: float
    T: float
    eps_sq: float | None = None
    p_phot: float = 0.0
    p_dark: float = 0.0


def _check_window(T: float) -> None:
    if not T > 0:
        raise ParameterError(f"emission window T must be positive, got {T}")


def photon_emission_prob(params: LinkParams, T: float) -> float:
    """Probability that an excited emitter puts a photon into the fiber within [0, T]."""
    _check_window(T)
    C = params.cooperativity
    return 4 * C / (1 + 4 * C) * -math.expm1(-params.gamma * (1 + 4 * C) * T)


def free_space_emission_prob(params: LinkParams, T: float, collection: float = ION_COLLECTION) -> float:
    """Emission probability of a bare emitter collected with a lens."""
    _check_window(T)
    if not 0.0 <= collection <= 1.0:
        raise ParameterError(f"collection efficiency must lie in [0, 1], got {collection}")
    return collection * -math.expm1(-params.gamma * T)


def saturation_window(params: LinkParams, emitter: str = CAVITY) -> float:
    """Window beyond which the emission probability is flat: 10 decay times."""
    if emitter == ION_TRAP:
        return 10.0 / params.gamma
    return 10.0 / (params.gamma * (1 + 4 * params.cooperativity))


def fiber_transmission(params: LinkParams) -> float:
    # each photon travels half the link to the central station
    return math.exp(-params.l0 / (2 * params.l_att))


def dark_count_prob(params: LinkParams, T: float) -> float:
    _check_window(T)
    return -math.expm1(-params.r_dark * T)


def one_photon_coefficients(
    eta_d: float,
    eta_f: float,
    p_phot: float,
    p_dark: float,
    eps_sq: float,
    formulas: str = "corrected",
) -> dict[str, float]:
    """Coefficients of the single-click state in the psi+ frame.

    Returns ``F1`` (psi+), ``alpha1`` (each of phi+ and phi-), ``beta1`` (psi-),
    ``alpha1_t`` (|00><00|), ``beta1_t`` (|11><11|) and ``p_click``.
    """
    e2 = eps_sq
    e4 = eps_sq**2
    P = p_phot
    Pd = p_dark
    dd = Pd * (1 - Pd)
    eta = eta_d * eta_f

    if formulas == "verbatim":
        both_decay = 0.5 * e2 * (1 - P) ** 2 * dd
        bunched = 2 * (1 - eta) * eta * P**2 * e4 * (1 - Pd) ** 2
        click_two = (2 * eta - eta**2) * P**2 * e4
    elif formulas == "corrected":
        # both emitters excited and both decaying needs eps^4; two photons
        # bunch into one detector, so one click whenever at least one is seen
        both_decay = 0.5 * e4 * (1 - P) ** 2 * dd
        bunched = (2 * eta - eta**2) * P**2 * e4 * (1 - Pd)
        click_two = bunched
    else:
        raise ParameterError(f"unknown formula set {formulas!r}")

    lost_at_detector = 2 * eta_f * (1 - eta_d) * P * e2 * (1 - e2) * dd
    lost_in_fiber = 2 * (1 - eta_f) * P * e2 * (1 - e2) * dd
    seen_other_decayed = 0.5 * eta * P * e4 * (1 - P) * (1 - Pd)
    lost_other_decayed = (1 - eta) * P * e4 * (1 - P) * dd
    one_decayed = (1 - e2) * e2 * (1 - P) * dd

    F = (
        2 * eta * P * e2 * (1 - e2) * (1 - Pd)
        + lost_at_detector
        + seen_other_decayed
        + lost_in_fiber
        + lost_other_decayed
        + one_decayed
        + both_decay
    )
    alpha = both_decay
    beta = seen_other_decayed + lost_in_fiber + lost_other_decayed + one_decayed + both_decay + lost_at_detector
    alpha_t = 2 * (1 - e2) ** 2 * dd + 2 * one_decayed
    beta_t = (
        2 * seen_other_decayed
        + 2 * lost_other_decayed
        + 2 * (1 - eta) ** 2 * P**2 * e4 * dd
        + bunched
    )
    p_click = (
        2 * eta * P * e2 * (1 - P * e2) * (1 - Pd)
        + click_two
        + 2 * (1 - e2 * P) ** 2 * dd
        + 2 * (1 - eta) ** 2 * P**2 * e4 * dd
        + 4 * (1 - eta) * P * e2 * (1 - e2 * P) * dd
    )
    weights = {"F1": F, "alpha1": alpha, "beta1": beta, "alpha1_t": alpha_t, "beta1_t": beta_t}
    return _normalize(weights, p_click, multiplicity={"alpha1": 2}, formulas=formulas)


def two_photon_coefficients(
    eta_d: float,
    eta_f: float,
    p_phot: float,
    p_dark: float,
    formulas: str = "corrected",
) -> dict[str, float]:
    """Coefficients of the two-click state: ``F2`` (phi+), ``alpha2`` (each of
    psi+ and psi-), ``beta2`` (phi-) and ``p_click``."""
    P = p_phot
    Pd = p_dark
    eta = eta_d * eta_f
    pref = (1 - Pd) ** 2

    one_seen_one_missed = eta_d * (1 - eta_d) * eta_f**2 * Pd * P**2
    both_missed_at_detector = eta_f**2 * (1 - eta_d) ** 2 * P**2 * Pd**2
    shared = (
        Pd**2 * (1 - P) ** 2
        + eta_d * (1 - eta_f) * eta_f * Pd * P**2
        + eta * Pd * P * (1 - P)
        + (1 - eta_f) ** 2 * P**2 * Pd**2
        + 2 * eta_f * (1 - eta_d) * (1 - eta_f) * P**2 * Pd**2
        + 2 * (1 - eta) * P * (1 - P) * Pd**2
    )
    F = pref * (0.5 * eta**2 * P**2 + shared + one_seen_one_missed + both_missed_at_detector)
    alpha = pref * (shared + one_seen_one_missed + both_missed_at_detector)
    beta = alpha + pref * (one_seen_one_missed + both_missed_at_detector)

    if formulas == "verbatim":
        p_click = pref * (
            0.5 * eta**2 * P**2
            + 4 * eta * (1 - eta) * Pd * P**2
            + 4 * Pd**2 * (1 - Pd) ** 2
            + 4 * eta * Pd * P * (1 - P)
            + 4 * (1 - eta) ** 2 * P**2 * Pd**2
            + 8 * (1 - eta) * P * (1 - P) * Pd**2
        )
    elif formulas == "corrected":
        # the literal total does not match the state's own event weights (the
        # 4Pd^2(1-Pd)^2 term should read 4Pd^2(1-P)^2); use the weights' sum
        p_click = F + 2 * alpha + beta
    else:
        raise ParameterError(f"unknown formula set {formulas!r}")
    weights = {"F2": F, "alpha2": alpha, "beta2": beta}
    return _normalize(weights, p_click, multiplicity={"alpha2": 2}, formulas=formulas)


def _normalize(weights, p_click, multiplicity, formulas):
    total = sum(w * multiplicity.get(k, 1) for k, w in weights.items())
    out = {}
    # subnormal probabilities carry no significant digits; treat them as no click
    if p_click < sys.float_info.min or total < sys.float_info.min:
        out = {k: 0.0 for k in weights}
        out["p_click"] = 0.0
        return out
    if formulas == "corrected":
        if abs(total / p_click - 1.0) > NORMALIZATION_TOL:
            raise ConsistencyError(f"generation coefficients sum to {total / p_click!r}, expected 1")
        norm = p_click
    else:
        norm = total
    out = {k: w / norm for k, w in weights.items()}
    out["p_click"] = float(min(1.0, p_click))
    return out


def one_photon_state(coeffs: dict[str, float]) -> np.ndarray:
    """Density matrix of the single-click outcome, rotated so that psi+ -> phi+."""
    rho = bell_diagonal(
        {"psi+": coeffs["F1"], "phi+": coeffs["alpha1"], "phi-": coeffs["alpha1"], "psi-": coeffs["beta1"]}
    )
    rho = rho + coeffs["alpha1_t"] * np.diag([1, 0, 0, 0]) + coeffs["beta1_t"] * np.diag([0, 0, 0, 1])
    X = np.array([[0, 1], [1, 0]], dtype=complex)
    return apply_local(rho, np.eye(2), X)


def two_photon_state(coeffs: dict[str, float]) -> np.ndarray:
    return bell_diagonal(
        {"phi+": coeffs["F2"], "psi+": coeffs["alpha2"], "psi-": coeffs["alpha2"], "phi-": coeffs["beta2"]}
    )


def _emission(params: LinkParams, T: float, emitter: str, collection: float) -> float:
    if emitter == CAVITY:
        return photon_emission_prob(params, T)
    if emitter == ION_TRAP:
        return free_space_emission_prob(params, T, collection)
    raise ParameterError(f"unknown emitter {emitter!r}")


def generate_one_photon(
    params: LinkParams,
    eps_sq: float,
    T: float,
    formulas: str = "corrected",
    emitter: str = CAVITY,
    collection: float = ION_COLLECTION,
) -> GenerationAttempt:
    if not 0.0 < eps_sq < 1.0:
        raise ParameterError(f"excitation probability must lie in (0, 1), got {eps_sq}")
    p_phot = _emission(params, T, emitter, collection)
    p_dark = dark_count_prob(params, T)
    coeffs = one_photon_coefficients(params.eta_d, fiber_transmission(params), p_phot, p_dark, eps_sq, formulas)
    if coeffs["p_click"] == 0.0:
        state = projector("phi+")
    else:
        state = check_state(one_photon_state(coeffs))
    return GenerationAttempt(state, coeffs["p_click"], T, eps_sq, p_phot, p_dark)


def generate_two_photon(
    params: LinkParams,
    T: float,
    formulas: str = "corrected",
    emitter: str = CAVITY,
    collection: float = ION_COLLECTION,
) -> GenerationAttempt:
    p_phot = _emission(params, T, emitter, collection)
    p_dark = dark_count_prob(params, T)
    coeffs = two_photon_coefficients(params.eta_d, fiber_transmission(params), p_phot, p_dark, formulas)
    if coeffs["p_click"] == 0.0:
        state = projector("phi+")
    else:
        state = check_state(two_photon_state(coeffs))
    return GenerationAttempt(state, coeffs["p_click"], T, None, p_phot, p_dark)


def generate_ion_trap(
    params: LinkParams,
    scheme: str,
    eps_sq: float | None,
    T: float,
    collection: float = ION_COLLECTION,
    formulas: str = "corrected",
) -> GenerationAttempt:
    """Generation with a lens-collected emitter instead of a cavity."""
    if scheme == ONE_PHOTON:
        return generate_one_photon(params, eps_sq, T, formulas, ION_TRAP, collection)
    if scheme == TWO_PHOTON:
        return generate_two_photon(params, T, formulas, ION_TRAP, collection)
    raise ParameterError(f"unknown scheme {scheme!r}")


def generate(
    params: LinkParams,
    scheme: str,
    T: float,
    eps_sq: float | None = None,
    emitter: str = CAVITY,
    collection: float = ION_COLLECTION,
    formulas: str = "corrected",
) -> GenerationAttempt:
    if scheme == ONE_PHOTON:
        return generate_one_photon(params, eps_sq, T, formulas, emitter, collection)
    if scheme == TWO_PHOTON:
        return generate_two_photon(params, T, formulas, emitter, collection)
    raise ParameterError(f"unknown scheme {scheme!r}; expected one of {SCHEMES}")
