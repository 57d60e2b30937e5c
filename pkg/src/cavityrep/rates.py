"""Average distribution times for parallel and sequential repeater chains.

A chain of ``n`` swap levels spans ``2**n`` elementary links of length
``L0 = L_total / 2**n``.  Each link is generated (and optionally pumped ``j``
times) with ``m`` qubit pairs in parallel, then links are swapped level by
level.  Waiting times are built from the coin-toss factors of
:mod:`cavityrep.combinatorics`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import generation as gen
from .combinatorics import z22, z_factor
from .errors import DivergenceError, ParameterError
from .gates import GateModel, make_gate
from .states import MODIFIED, STANDARD, bell_fidelity, check_state, entanglement_swap, purify

PARALLEL = "parallel"
SEQUENTIAL = "sequential"
ARCHITECTURES = (PARALLEL, SEQUENTIAL)
VARIANTS = (STANDARD, MODIFIED)
MAX_SWAP_LEVELS = 5
MAX_PURIFICATIONS = 2


@dataclass(frozen=True)
class RepeaterConfig:
    """One point of the discrete design space plus the generation knobs.

    ``link.l0`` is ignored; the elementary length is always ``L_total / 2**n``.
    ``T = None`` means the saturation window of the emitter.
    """

    n: int = 0
    j: int = 0
    variant: str = STANDARD
    architecture: str = PARALLEL
    qubits_per_station: int = 2
    scheme: str = gen.TWO_PHOTON
    gate: str = "gate1"
    L_total: float = 1000.0
    link: gen.LinkParams = field(default_factory=gen.LinkParams)
    eps_sq: float | None = None
    T: float | None = None
    emitter: str = gen.CAVITY
    collection: float = gen.ION_COLLECTION
    formulas: str = "corrected"

    def __post_init__(self):
        if not (isinstance(self.n, (int, np.integer)) and 0 <= self.n <= MAX_SWAP_LEVELS):
            raise ParameterError(f"n must be an integer in [0, {MAX_SWAP_LEVELS}], got {self.n}")
        if not (isinstance(self.j, (int, np.integer)) and 0 <= self.j <= MAX_PURIFICATIONS):
            raise ParameterError(f"j must be an integer in [0, {MAX_PURIFICATIONS}], got {self.j}")
        if self.variant not in VARIANTS:
            raise ParameterError(f"unknown purification variant {self.variant!r}")
        if self.architecture not in ARCHITECTURES:
            raise ParameterError(f"unknown architecture {self.architecture!r}")
        if self.qubits_per_station not in (2, 4):
            raise ParameterError(f"qubits_per_station must be 2 or 4, got {self.qubits_per_station}")
        if self.j >= 1 and self.qubits_per_station < 4:
            raise ParameterError("purification needs at least four qubits per station")
        if self.scheme not in gen.SCHEMES:
            raise ParameterError(f"unknown scheme {self.scheme!r}")
        if self.emitter not in (gen.CAVITY, gen.ION_TRAP):
            raise ParameterError(f"unknown emitter {self.emitter!r}")
        if not self.L_total > 0:
            raise ParameterError(f"total distance must be positive, got {self.L_total}")
        if self.scheme == gen.ONE_PHOTON and self.eps_sq is None:
            raise ParameterError("the one-photon scheme needs eps_sq")
        if self.T is not None and not self.T > 0:
            raise ParameterError(f"T must be positive, got {self.T}")
        # fail early on an unknown gate name
        self.gate_model()

    @property
    def l0(self) -> float:
        return self.L_total / 2**self.n

    @property
    def stations(self) -> int:
        return 2**self.n + 1

    @property
    def m(self) -> int:
        """Qubit pairs per link side available in parallel."""
        return self.qubits_per_station // 2

    def link_params(self) -> gen.LinkParams:
        return self.link.with_length(self.l0)

    def gate_model(self) -> GateModel:
        return make_gate(self.gate, self.link.cooperativity, self.link.gamma, self.link.eta_d)

    def window(self) -> float:
        if self.T is not None:
            return self.T
        return gen.saturation_window(self.link, self.emitter)

    def with_knobs(self, T: float | None = None, eps_sq: float | None = None) -> "RepeaterConfig":
        return replace(self, T=T if T is not None else self.T, eps_sq=eps_sq if eps_sq is not None else self.eps_sq)

    @property
    def probabilistic(self) -> bool:
        return self.gate_model().heralded


@dataclass(frozen=True)
class TimingBreakdown:
    tau_link: float
    tau_swap_total: float
    distribution_time: float
    level_times: tuple[float, ...] = ()

    @property
    def rate(self) -> float:
        return 1.0 / self.distribution_time if math.isfinite(self.distribution_time) else 0.0


@dataclass(frozen=True)
class PumpingSchedule:
    """Binomial-event probabilities of the pumping stage and the fidelity trajectory."""

    p0: float
    P1: float
    P2: tuple[float, ...]
    P3: tuple[float, ...]
    fidelities: tuple[float, ...]
    p_pur: tuple[float, ...]


def tau_pair(l: int, m: int, P0: float, L0: float, c: float, tau_local: float) -> float:
    """Average time to hold ``l`` pairs in one link using ``m`` parallel attempts."""
    return z_factor(l, m, P0) * (L0 / c + tau_local)


def generation_attempt(config: RepeaterConfig) -> gen.GenerationAttempt:
    return gen.generate(
        config.link_params(),
        config.scheme,
        config.window(),
        eps_sq=config.eps_sq,
        emitter=config.emitter,
        collection=config.collection,
        formulas=config.formulas,
    )


def pumping_trajectory(gen_state, gate: GateModel, variant: str, j: int):
    """Pump ``j`` fresh copies of ``gen_state`` into one pair.

    Returns the list of states after each round and the list of round success
    probabilities ``P_pur(F_i, F_0)``.
    """
    states = [gen_state]
    p_pur = []
    for _ in range(j):
        out, p = purify(states[-1], gen_state, gate, variant, validate=False)
        states.append(out)
        p_pur.append(p)
    return states, p_pur


def pumping_probabilities(gen_state, gate: GateModel, variant: str, j: int, P0: float, m: int) -> PumpingSchedule:
    if j < 0:
        raise ParameterError(f"j must be non-negative, got {j}")
    states, p_pur = pumping_trajectory(gen_state, gate, variant, j)
    fids = tuple(bell_fidelity(s, validate=False) for s in states)
    if j == 0:
        # a single unpurified pair: the first success among m attempts
        return PumpingSchedule(P0, 1.0 / z_factor(1, m, P0), (), (), fids, ())
    if m < 2:
        raise ParameterError("pumping needs two qubit pairs per link")
    tail = [math.prod(p_pur[i:]) for i in range(j)]
    P1 = tail[0] / z_factor(2, m, P0)
    z_fresh = z_factor(1, m - 1, P0)
    P3 = tuple(tail[i] / z_fresh for i in range(1, j))
    return PumpingSchedule(P0, P1, tuple(tail), P3, fids, tuple(p_pur))


def _times(config: RepeaterConfig, gate: GateModel) -> tuple[float, float, float]:
    link = config.link
    comm = config.l0 / link.c_fiber
    base = comm + link.tau_local
    tau_pur = comm + gate.gate_time
    return base, tau_pur, comm


def _schedule(config: RepeaterConfig, m: int, attempt=None, gate=None) -> PumpingSchedule:
    attempt = attempt or generation_attempt(config)
    gate = gate or config.gate_model()
    if attempt.success_prob <= 0.0:
        raise DivergenceError("entanglement generation never succeeds")
    return pumping_probabilities(attempt.state, gate, config.variant, config.j, attempt.success_prob, m)


def _link_time(N: int, sched: PumpingSchedule, base: float, tau_pur: float) -> float:
    t = z_factor(N, N, sched.P1) * base
    t += sum(z_factor(N, N, p) * tau_pur for p in sched.P2)
    t += sum(z_factor(N, N, p) * base for p in sched.P3)
    return t


def tau_link_parallel(config: RepeaterConfig, attempt=None) -> float:
    """Time until all ``2**n`` links hold a (pumped) pair, each with ``m`` qubit pairs."""
    gate = config.gate_model()
    base, tau_pur, _ = _times(config, gate)
    sched = _schedule(config, config.m, attempt, gate)
    return _link_time(2**config.n, sched, base, tau_pur)


def tau_link_sequential(config: RepeaterConfig, attempt=None) -> float:
    """First half of the links with ``2m`` qubit pairs, then the other half with ``2m - 1``."""
    if config.n == 0:
        return tau_link_parallel(config, attempt)
    gate = config.gate_model()
    attempt = attempt or generation_attempt(config)
    base, tau_pur, _ = _times(config, gate)
    half = 2 ** (config.n - 1)
    total = 0.0
    for m in (2 * config.m, 2 * config.m - 1):
        total += _link_time(half, _schedule(config, m, attempt, gate), base, tau_pur)
    return total


def tau_swap_deterministic(n: int, L0: float, c: float, tau_c: float) -> float:
    if n < 0:
        raise ParameterError(f"n must be non-negative, got {n}")
    return (2**n - 1) * L0 / c + n * tau_c


def z_tilde(n: int, i: int, p_swap: float, p: float | None) -> float:
    """Nested waiting factor: ``p=None`` selects the swap-only chain whose base is 1."""
    if n < i:
        raise ParameterError(f"need n >= i, got n={n}, i={i}")
    if p_swap <= 0.0:
        raise DivergenceError("swap never succeeds")
    value = 1.0 if p is None else z22(p)
    for _ in range(n - i):
        value = z22(p_swap / value)
    return value


def _p_swap(gate: GateModel) -> float:
    if gate.success_prob <= 0.0:
        raise DivergenceError("heralded gate never succeeds")
    return gate.success_prob


def _parallel_probabilistic_total(level: int, sched: PumpingSchedule, ps: float, base, tau_pur, comm, tau_c) -> float:
    t = z_tilde(level, 1, ps, sched.P1) * base
    t += sum(z_tilde(level, i, ps, None) * (2 ** (i - 1) * comm + tau_c) for i in range(1, level + 1))
    t += sum(z_tilde(level, 1, ps, p) * tau_pur for p in sched.P2)
    t += sum(z_tilde(level, 1, ps, p) * base for p in sched.P3)
    return t / ps


def tau_swap_probabilistic(config: RepeaterConfig, attempt=None) -> float:
    """Total time (generation included) to complete ``n`` levels of heralded swaps."""
    gate = config.gate_model()
    ps = _p_swap(gate)
    base, tau_pur, comm = _times(config, gate)
    sched = _schedule(config, config.m, attempt, gate)
    if config.n == 0:
        return _link_time(1, sched, base, tau_pur)
    return _parallel_probabilistic_total(config.n, sched, ps, base, tau_pur, comm, gate.gate_time)


def _zii(i: int, p: float) -> float:
    return z_factor(i, i, p) if i else 0.0


def tau_swap_sequential(config: RepeaterConfig, attempt=None) -> list[float]:
    """Per-level times when every level waits for all its swaps, restoring failed segments in parallel."""
    gate = config.gate_model()
    ps = _p_swap(gate)
    base, tau_pur, comm = _times(config, gate)
    tau_c = gate.gate_time
    sched = _schedule(config, config.m, attempt, gate)
    n = config.n
    out = []
    for level in range(1, n + 1):
        swaps = 2 ** (n - level)
        zt_gen = z_tilde(level, 1, ps, sched.P1)
        zt_swap = [z_tilde(level, k, ps, None) for k in range(1, level + 1)]
        zt_p2 = [z_tilde(level, 1, ps, p) for p in sched.P2]
        zt_p3 = [z_tilde(level, 1, ps, p) for p in sched.P3]
        total = 0.0
        for i in range(swaps + 1):
            weight = math.comb(swaps, i) * ps ** (swaps - i) * (1.0 - ps) ** i
            if weight == 0.0:
                continue
            inner = _zii(i, ps / zt_gen) * base
            inner += sum(_zii(i, ps / z) * (2 ** (k - 1) * comm + tau_c) for k, z in enumerate(zt_swap, start=1))
            inner += sum(_zii(i, ps / z) * tau_pur for z in zt_p2)
            inner += sum(_zii(i, ps / z) * base for z in zt_p3)
            if i == 0:
                inner += 2 ** (level - 1) * comm + tau_c
            total += weight * inner
        out.append(total)
    return out


def final_state(config: RepeaterConfig, attempt=None) -> np.ndarray:
    """Generation, ``j`` pumping rounds, then ``n`` levels of swapping identical links."""
    gate = config.gate_model()
    attempt = attempt or generation_attempt(config)
    states, _ = pumping_trajectory(attempt.state, gate, config.variant, config.j)
    rho = states[-1]
    for _ in range(config.n):
        rho, _ = entanglement_swap(rho, rho, gate, validate=False)
    return rho


def final_fidelity(config: RepeaterConfig, attempt=None) -> tuple[float, np.ndarray]:
    rho = check_state(final_state(config, attempt))
    return bell_fidelity(rho, validate=False), rho


def timing(config: RepeaterConfig, attempt=None) -> TimingBreakdown:
    """Select the architecture / gate branch and return the full time budget."""
    gate = config.gate_model()
    attempt = attempt or generation_attempt(config)
    base, tau_pur, comm = _times(config, gate)
    n = config.n

    if not gate.heralded:
        if config.architecture == SEQUENTIAL:
            t_link = tau_link_sequential(config, attempt)
        else:
            t_link = tau_link_parallel(config, attempt)
        levels = tuple(2 ** (k - 1) * comm + gate.gate_time for k in range(1, n + 1))
        t_swap = tau_swap_deterministic(n, config.l0, config.link.c_fiber, gate.gate_time)
        return TimingBreakdown(t_link, t_swap, t_link + t_swap, levels)

    if config.architecture == SEQUENTIAL and n > 0:
        t_link = tau_link_sequential(config, attempt)
        levels = tuple(tau_swap_sequential(config, attempt))
        t_swap = sum(levels)
        return TimingBreakdown(t_link, t_swap, t_link + t_swap, levels)

    # parallel with heralded swaps: the nested estimate already contains the
    # link stage, so report the single-link time and the increments per level
    ps = _p_swap(gate) if n else 1.0
    sched = _schedule(config, config.m, attempt, gate)
    t_link = _link_time(1, sched, base, tau_pur)
    totals = [t_link] + [
        _parallel_probabilistic_total(k, sched, ps, base, tau_pur, comm, gate.gate_time) for k in range(1, n + 1)
    ]
    levels = tuple(b - a for a, b in zip(totals[:-1], totals[1:]))
    return TimingBreakdown(t_link, totals[-1] - t_link, totals[-1], levels)


@dataclass(frozen=True)
class DistributionResult:
    fidelity: float
    state: np.ndarray
    timing: TimingBreakdown
    attempt: gen.GenerationAttempt

    @property
    def rate(self) -> float:
        return self.timing.rate


def distribution_rate(config: RepeaterConfig) -> DistributionResult:
    """Fidelity and average distribution rate of one configuration.

    A generation or gate success probability of zero gives an infinite
    distribution time and rate 0.
    """
    attempt = generation_attempt(config)
    fidelity, rho = final_fidelity(config, attempt)
    try:
        t = timing(config, attempt)
    except DivergenceError:
        t = TimingBreakdown(math.inf, math.inf, math.inf, ())
    return DistributionResult(fidelity, rho, t, attempt)
