"""Monte Carlo simulation of the repeater protocol timing.

The simulator follows the same operating conventions as the analytic
estimates in :mod:`cavityrep.rates` but samples every waiting time instead of
averaging it:

* a link attempt round lasts ``L0/c + tau_local``; ``m`` qubit pairs attempt
  in parallel and successful pairs are kept;
* pumping round ``i`` takes ``L0/c + tau_c`` and succeeds with the
  probability returned by :func:`cavityrep.states.purify`; a failure discards
  everything in the link and generation restarts;
* deterministic swaps finish ``(2**n - 1) L0/c + n tau_c`` after the last link;
* heralded swaps in the parallel architecture build each level-``k`` segment
  from two independent level-``k-1`` segments; the swap takes
  ``2**(k-1) L0/c + tau_c`` and a failure restarts the whole segment;
* in the sequential architecture half of the links are generated first with
  ``2m`` qubit pairs, then the other half with ``2m - 1``.  With heralded
  swaps all swaps of a level are attempted together and failed segments are
  restored with the parallel process before the next level starts.

Random streams come from ``numpy.random.SeedSequence``: block ``b`` of
:data:`BLOCK` trials uses the child stream ``SeedSequence([seed, b])``, and
single traced trials use ``SeedSequence([seed, TRACE_KEY, trial])``.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .combinatorics import binomial_pmf
from .errors import DivergenceError, ParameterError
from .generation import LinkParams
from .rates import SEQUENTIAL, RepeaterConfig, generation_attempt, pumping_trajectory, timing

BLOCK = 4096
TRACE_KEY = 7919
MAX_SEGMENT_SAMPLES = 20_000_000


@dataclass(frozen=True)
class ChainModel:
    """The numbers the simulator needs, extracted once from a configuration."""

    n: int
    j: int
    m: int
    p0: float
    p_pur: tuple[float, ...]
    p_swap: float
    heralded: bool
    sequential: bool
    base: float
    tau_pur: float
    comm: float
    tau_c: float

    @classmethod
    def from_config(cls, config: RepeaterConfig) -> "ChainModel":
        gate = config.gate_model()
        attempt = generation_attempt(config)
        _, p_pur = pumping_trajectory(attempt.state, gate, config.variant, config.j)
        comm = config.l0 / config.link.c_fiber
        return cls(
            n=config.n,
            j=config.j,
            m=config.m,
            p0=attempt.success_prob,
            p_pur=tuple(p_pur),
            p_swap=gate.success_prob,
            heralded=gate.heralded,
            sequential=config.architecture == SEQUENTIAL,
            base=comm + config.link.tau_local,
            tau_pur=comm + gate.gate_time,
            comm=comm,
            tau_c=gate.gate_time,
        )

    def check(self) -> None:
        if self.p0 <= 0.0:
            raise DivergenceError("entanglement generation never succeeds")
        if any(p <= 0.0 for p in self.p_pur):
            raise DivergenceError("purification never succeeds")
        if (self.n > 0 or self.j > 0) and self.p_swap <= 0.0:
            raise DivergenceError("heralded gate never succeeds")

    def swap_time(self, level: int) -> float:
        return 2 ** (level - 1) * self.comm + self.tau_c


def _geometric(rng, p: float, size) -> np.ndarray:
    if p >= 1.0:
        return np.ones(size, dtype=np.int64)
    return rng.geometric(p, size=size)


def sample_rounds(rng: np.random.Generator, l: int, m: int, p: float, size: int) -> np.ndarray:
    """Rounds needed to keep ``l`` successes with ``m`` coins, sampled event by event.

    Instead of tossing round by round, jump to the next round with at least one
    success (a geometric wait) and draw how many coins succeeded in it from the
    zero-truncated binomial.  This stays fast when ``p`` is tiny.
    """
    rounds = np.zeros(size, dtype=np.int64)
    have = np.zeros(size, dtype=np.int64)
    if l == 0:
        return rounds
    log_q = math.log1p(-p) if p < 1.0 else -math.inf
    for s in range(l):
        idx = np.flatnonzero(have == s)
        if idx.size == 0:
            continue
        r = m - s
        leave = -math.expm1(r * log_q) if p < 1.0 else 1.0
        rounds[idx] += _geometric(rng, leave, idx.size)
        pmf = binomial_pmf(r, p)[1:]
        cdf = np.cumsum(pmf / pmf.sum())
        k = 1 + np.searchsorted(cdf, rng.random(idx.size) * cdf[-1], side="right")
        have[idx] += np.minimum(k, r)
    return rounds


def sample_links(rng: np.random.Generator, model: ChainModel, m: int, size: int) -> np.ndarray:
    """Time until one link holds its (pumped) pair, for ``size`` independent links."""
    if model.j == 0:
        return sample_rounds(rng, 1, m, model.p0, size) * model.base
    total = np.zeros(size)
    active = np.arange(size)
    while active.size:
        t = sample_rounds(rng, 2, m, model.p0, active.size) * model.base + model.tau_pur
        ok = rng.random(active.size) < model.p_pur[0]
        for i in range(1, model.j):
            fresh = sample_rounds(rng, 1, m - 1, model.p0, active.size) * model.base + model.tau_pur
            t = t + np.where(ok, fresh, 0.0)
            ok &= rng.random(active.size) < model.p_pur[i]
        total[active] += t
        active = active[~ok]
    return total


def sample_segments(rng: np.random.Generator, model: ChainModel, level: int, size: int, m: int | None = None) -> np.ndarray:
    """Time to build a level-``level`` segment with heralded swaps, restarting on failure."""
    m = model.m if m is None else m
    if level == 0:
        return sample_links(rng, model, m, size)
    attempts = _geometric(rng, model.p_swap, size)
    count = int(attempts.sum())
    if count * 2**level > MAX_SEGMENT_SAMPLES:
        raise ParameterError("segment recursion too large; lower the number of trials or levels")
    halves = sample_segments(rng, model, level - 1, 2 * count, m).reshape(count, 2)
    per_attempt = halves.max(axis=1) + model.swap_time(level)
    starts = np.concatenate(([0], np.cumsum(attempts)[:-1]))
    return np.add.reduceat(per_attempt, starts)


def _sample_block(model: ChainModel, seed: int, block: int, size: int) -> np.ndarray:
    rng = np.random.default_rng(np.random.SeedSequence([seed, block]))
    n = model.n
    if not model.sequential or n == 0:
        if model.heralded and n > 0:
            return sample_segments(rng, model, n, size)
        links = sample_links(rng, model, model.m, size * 2**n).reshape(size, 2**n)
        return links.max(axis=1) + sum(model.swap_time(k) for k in range(1, n + 1))

    half = 2 ** (n - 1)
    first = sample_links(rng, model, 2 * model.m, size * half).reshape(size, half).max(axis=1)
    second = sample_links(rng, model, 2 * model.m - 1, size * half).reshape(size, half).max(axis=1)
    t = first + second
    if not model.heralded:
        return t + sum(model.swap_time(k) for k in range(1, n + 1))
    for level in range(1, n + 1):
        swaps = 2 ** (n - level)
        failed = rng.random((size, swaps)) >= model.p_swap
        restore = np.zeros((size, swaps))
        nfail = int(failed.sum())
        if nfail:
            restore[failed] = sample_segments(rng, model, level, nfail)
        t = t + model.swap_time(level) + restore.max(axis=1)
    return t


def _block_task(args):
    return _sample_block(*args)


def sample_chain(config: RepeaterConfig, trials: int, seed: int = 0, max_workers: int | None = 1) -> np.ndarray:
    """Completion times of ``trials`` independent runs, in trial order."""
    if trials < 1:
        raise ParameterError(f"trials must be >= 1, got {trials}")
    model = ChainModel.from_config(config)
    model.check()
    tasks = []
    for b, start in enumerate(range(0, trials, BLOCK)):
        tasks.append((model, seed, b, min(BLOCK, trials - start)))
    if max_workers == 1 or len(tasks) == 1:
        parts = [_block_task(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=max_workers) as pool:
            parts = list(pool.map(_block_task, tasks))
    return np.concatenate(parts)


def simulate_chain(config: RepeaterConfig, trials: int, seed: int = 0, max_workers: int | None = 1) -> tuple[float, float]:
    """Mean completion time and its standard error."""
    times = sample_chain(config, trials, seed, max_workers)
    se = float(times.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
    return float(times.mean()), se


@dataclass(frozen=True)
class ChainTrial:
    seed: int
    trial: int
    events: tuple[tuple[float, str], ...]
    completion_time: float


class _Tracer:
    """Scalar, event-logging version of the sampler for a single run."""

    def __init__(self, model: ChainModel, rng: np.random.Generator):
        self.model = model
        self.rng = rng
        self.events: list[tuple[float, str]] = []

    def log(self, t: float, what: str) -> None:
        self.events.append((t, what))

    def coin_rounds(self, l: int, m: int) -> int:
        # plain round-by-round tossing, kept separate from the vectorized sampler
        p = self.model.p0
        rounds = have = 0
        while have < l:
            rounds += 1
            have += int(self.rng.binomial(m - have, p))
        return rounds

    def link(self, t0: float, m: int, name: str) -> float:
        md = self.model
        t = t0
        while True:
            need = 1 if md.j == 0 else 2
            t += self.coin_rounds(need, m) * md.base
            self.log(t, f"{name}: {need} pair(s) generated")
            if md.j == 0:
                return t
            ok = True
            for i in range(md.j):
                if i > 0:
                    t += self.coin_rounds(1, m - 1) * md.base
                    self.log(t, f"{name}: fresh pair generated")
                t += md.tau_pur
                if self.rng.random() < md.p_pur[i]:
                    self.log(t, f"{name}: pumping round {i + 1} succeeded")
                else:
                    self.log(t, f"{name}: pumping round {i + 1} failed")
                    ok = False
                    break
            if ok:
                return t

    def segment(self, t0: float, level: int, name: str, m: int | None = None) -> float:
        md = self.model
        m = md.m if m is None else m
        if level == 0:
            return self.link(t0, m, name)
        t = t0
        while True:
            left = self.segment(t, level - 1, name + "L", m)
            right = self.segment(t, level - 1, name + "R", m)
            t = max(left, right) + md.swap_time(level)
            if self.rng.random() < md.p_swap:
                self.log(t, f"{name}: level {level} swap succeeded")
                return t
            self.log(t, f"{name}: level {level} swap failed")

    def run(self) -> float:
        md = self.model
        n = md.n
        if not md.sequential or n == 0:
            if md.heralded and n > 0:
                return self.segment(0.0, n, "S")
            t = max(self.link(0.0, md.m, f"link{k}") for k in range(2**n))
            for level in range(1, n + 1):
                t += md.swap_time(level)
                self.log(t, f"level {level} swaps done")
            return t
        half = 2 ** (n - 1)
        t = max(self.link(0.0, 2 * md.m, f"link{k}") for k in range(half))
        t = max(self.link(t, 2 * md.m - 1, f"link{half + k}") for k in range(half))
        for level in range(1, n + 1):
            start = t
            t = start + md.swap_time(level)
            ends = [t]
            for s in range(2 ** (n - level)):
                if md.heralded and self.rng.random() >= md.p_swap:
                    self.log(t, f"level {level} swap {s} failed")
                    ends.append(self.segment(t, level, f"restore{level}.{s}"))
            t = max(ends)
            self.log(t, f"level {level} swaps done")
        return t


def trace_chain(config: RepeaterConfig, trial: int = 0, seed: int = 0) -> ChainTrial:
    """One run with its full, time-ordered event log."""
    model = ChainModel.from_config(config)
    model.check()
    rng = np.random.default_rng(np.random.SeedSequence([seed, TRACE_KEY, trial]))
    tracer = _Tracer(model, rng)
    done = tracer.run()
    tracer.log(done, "entanglement distributed")
    events = tuple(sorted(tracer.events, key=lambda e: e[0]))
    return ChainTrial(seed, trial, events, done)


@dataclass(frozen=True)
class ValidationRow:
    config: RepeaterConfig
    analytic: float
    mc_mean: float
    mc_se: float

    @property
    def ratio(self) -> float:
        return self.analytic / self.mc_mean

    def flagged(self, low: float = 0.5, high: float = 2.0) -> bool:
        return not low <= self.ratio <= high


def validate_report(configs, trials: int = 20_000, seed: int = 0, max_workers: int | None = 1) -> list[ValidationRow]:
    """Analytic distribution time against the simulated mean for each configuration."""
    if trials < 1:
        raise ParameterError(f"trials must be >= 1, got {trials}")
    rows = []
    for k, cfg in enumerate(configs):
        if cfg.n > 3:
            raise ParameterError("validation is limited to n <= 3")
        analytic = timing(cfg).distribution_time
        mean, se = simulate_chain(cfg, trials, seed + k, max_workers)
        rows.append(ValidationRow(cfg, analytic, mean, se))
    return rows


def default_validation_configs(L_total: float = 1000.0, link=None) -> list[RepeaterConfig]:
    """Small grid: two-photon links, n <= 3, j <= 2, heralded and deterministic gates, both architectures."""
    link = link or LinkParams()
    out = []
    for gate in ("gate1", "gate2", "perfect"):
        for n in range(4):
            for j in range(3):
                for arch in ("parallel", "sequential"):
                    if n == 0 and arch == "sequential":
                        continue
                    out.append(
                        RepeaterConfig(
                            n=n,
                            j=j,
                            architecture=arch,
                            qubits_per_station=4 if j else 2,
                            gate=gate,
                            L_total=L_total,
                            link=link,
                        )
                    )
    return out
