"""Grid search over repeater designs with a nested simplex search over (T, eps^2).

For every (distance, cooperativity, family) the discrete design space
(n, j, purification variant, architecture) is enumerated exhaustively.  In each
cell the emission window ``T`` and, for the one-photon scheme, the excitation
probability ``eps_sq`` are tuned with a bounded Nelder-Mead search in log
space from a fixed set of starting points.
"""
from __future__ import annotations

import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import minimize

from . import generation as gen
from .errors import ParameterError, RepeaterError
from .rates import ARCHITECTURES, MAX_PURIFICATIONS, MAX_SWAP_LEVELS, VARIANTS, RepeaterConfig
from .secret import RateReport, evaluate, secret_fraction_raw

MAX_ITER = 200
REL_TOL = 1e-6
EPS_SQ_MAX = 0.5
EPS_SQ_MIN = 1e-6
T_MIN_FRACTION = 1e-4
T_STARTS = (1.0, 0.1, 0.01)
EPS_STARTS = (0.05, 0.01, 0.2)
RATE_FLOOR_HZ = 1e-6


@dataclass(frozen=True)
class Family:
    """A scheme/gate combination; ``schemes`` lists the generation schemes it may use."""

    name: str
    schemes: tuple[str, ...]
    gate: str
    emitter: str = gen.CAVITY


FAMILIES = {
    "2ph+gate1": Family("2ph+gate1", (gen.TWO_PHOTON,), "gate1"),
    "2ph+gate2": Family("2ph+gate2", (gen.TWO_PHOTON,), "gate2"),
    "2ph+gate3": Family("2ph+gate3", (gen.TWO_PHOTON,), "gate3"),
    "1ph+gate1": Family("1ph+gate1", (gen.ONE_PHOTON,), "gate1"),
    "1ph+gate2": Family("1ph+gate2", (gen.ONE_PHOTON,), "gate2"),
    "1ph+gate3": Family("1ph+gate3", (gen.ONE_PHOTON,), "gate3"),
    "ion": Family("ion", (gen.ONE_PHOTON, gen.TWO_PHOTON), "ion", gen.ION_TRAP),
    "perfect": Family("perfect", (gen.ONE_PHOTON, gen.TWO_PHOTON), "perfect"),
}
HIGH_FIDELITY = "2ph+gate1"


@dataclass(frozen=True)
class SweepSpec:
    distances: tuple[float, ...] = (1000.0,)
    cooperativities: tuple[float, ...] = (100.0,)
    qubits_per_station: int = 2
    families: tuple[str, ...] = tuple(FAMILIES)
    n_values: tuple[int, ...] = tuple(range(MAX_SWAP_LEVELS + 1))
    j_values: tuple[int, ...] = tuple(range(MAX_PURIFICATIONS + 1))
    variants: tuple[str, ...] = VARIANTS
    architectures: tuple[str, ...] = ARCHITECTURES
    link: gen.LinkParams = field(default_factory=gen.LinkParams)
    rate_floor_hz: float = RATE_FLOOR_HZ
    formulas: str = "corrected"

    def __post_init__(self):
        for name in ("distances", "cooperativities", "families", "n_values", "j_values", "variants", "architectures"):
            values = getattr(self, name)
            if len(values) == 0:
                raise ParameterError(f"sweep grid '{name}' is empty")
            object.__setattr__(self, name, tuple(values))
        if any(not d > 0 for d in self.distances):
            raise ParameterError("distances must be positive")
        if any(not c > 0 for c in self.cooperativities):
            raise ParameterError("cooperativities must be positive")
        if self.qubits_per_station not in (2, 4):
            raise ParameterError(f"qubits_per_station must be 2 or 4, got {self.qubits_per_station}")
        unknown = [f for f in self.families if f not in FAMILIES]
        if unknown:
            raise ParameterError(f"unknown families {unknown}; expected a subset of {tuple(FAMILIES)}")
        if any(not 0 <= n <= MAX_SWAP_LEVELS for n in self.n_values):
            raise ParameterError(f"n values must lie in [0, {MAX_SWAP_LEVELS}]")
        if any(not 0 <= j <= MAX_PURIFICATIONS for j in self.j_values):
            raise ParameterError(f"j values must lie in [0, {MAX_PURIFICATIONS}]")
        if any(v not in VARIANTS for v in self.variants):
            raise ParameterError(f"variants must be a subset of {VARIANTS}")
        if any(a not in ARCHITECTURES for a in self.architectures):
            raise ParameterError(f"architectures must be a subset of {ARCHITECTURES}")
        if self.rate_floor_hz < 0:
            raise ParameterError("rate floor must be non-negative")


@dataclass(frozen=True)
class InnerResult:
    T: float
    eps_sq: float | None
    normalized_rate: float
    iterations: int
    report: RateReport


@dataclass(frozen=True)
class CellResult:
    config: RepeaterConfig
    inner: InnerResult

    @property
    def normalized_rate(self) -> float:
        return self.inner.normalized_rate


@dataclass(frozen=True)
class OptimumRecord:
    distance: float
    cooperativity: float
    family: str
    config: RepeaterConfig
    report: RateReport
    T: float
    eps_sq: float | None
    iterations: int
    cells: tuple[CellResult, ...] = ()

    @property
    def normalized_rate(self) -> float:
        return self.report.normalized_rate


def _score(config: RepeaterConfig) -> tuple[float, RateReport | None]:
    """Normalized key rate, or the (negative) raw fraction when no key survives."""
    try:
        report, result = evaluate(config)
    except RepeaterError:
        return -math.inf, None
    if report.secret_fraction > 0:
        return report.normalized_rate, report
    # below threshold the search should still climb toward higher fidelity
    return 1e-9 * secret_fraction_raw(report.final_fidelity), report


def _starts(one_photon: bool) -> list[np.ndarray]:
    if one_photon:
        return [np.log([t, e]) for t, e in zip(T_STARTS, EPS_STARTS)]
    return [np.log([t]) for t in T_STARTS]


def optimize_inner(config: RepeaterConfig, t_max: float | None = None) -> InnerResult:
    """Maximize the normalized key rate over ``T`` (and ``eps_sq`` for one-photon).

    ``T`` ranges over ``(0, t_max]`` with ``t_max`` the emitter's saturation
    window by default; ``eps_sq`` over ``(0, 0.5]``.
    """
    t_max = t_max if t_max is not None else gen.saturation_window(config.link, config.emitter)
    one_photon = config.scheme == gen.ONE_PHOTON
    lower = [math.log(t_max * T_MIN_FRACTION)]
    upper = [math.log(t_max)]
    if one_photon:
        lower.append(math.log(EPS_SQ_MIN))
        upper.append(math.log(EPS_SQ_MAX))
    bounds = list(zip(lower, upper))

    def unpack(x):
        T = t_max * math.exp(min(0.0, x[0] - upper[0]))
        eps = math.exp(min(x[1], upper[1])) if one_photon else None
        return T, eps

    def objective(x):
        T, eps = unpack(x)
        value, _ = _score(replace(config, T=T, eps_sq=eps))
        return -value

    best = None
    iterations = 0
    for x0 in _starts(one_photon):
        x0 = x0 + np.array([math.log(t_max)] + [0.0] * (len(x0) - 1))
        f0 = objective(x0)
        # scale so that the absolute simplex tolerance acts as a relative one
        scale = abs(f0) if math.isfinite(f0) and f0 != 0.0 else 1.0
        res = minimize(
            lambda x: objective(x) / scale,
            x0,
            method="Nelder-Mead",
            bounds=bounds,
            options={"maxiter": MAX_ITER, "xatol": 1e-4, "fatol": REL_TOL},
        )
        iterations += int(res.nit)
        for fun, x in ((float(res.fun) * scale, tuple(res.x)), (f0, tuple(x0))):
            if best is None or fun < best[0]:
                best = (fun, x)
    T, eps = unpack(best[1])
    final = replace(config, T=T, eps_sq=eps)
    value, report = _score(final)
    if report is None:
        report = RateReport(0.0, 0.0, 0.0, 0.0, 0.0, config.stations)
    return InnerResult(T, eps, max(0.0, value) if report.secret_fraction > 0 else 0.0, iterations, report)


def cell_configs(spec: SweepSpec, distance: float, cooperativity: float, family: Family) -> list[RepeaterConfig]:
    """All discrete designs of one family; redundant combinations are not repeated."""
    link = replace(spec.link, cooperativity=cooperativity)
    out = []
    for scheme, n, j, variant, arch in itertools.product(
        family.schemes, spec.n_values, spec.j_values, spec.variants, spec.architectures
    ):
        if j >= 1 and spec.qubits_per_station < 4:
            continue
        if j == 0 and variant != spec.variants[0]:
            continue
        if n == 0 and arch != spec.architectures[0]:
            continue
        out.append(
            RepeaterConfig(
                n=n,
                j=j,
                variant=variant,
                architecture=arch,
                qubits_per_station=spec.qubits_per_station,
                scheme=scheme,
                gate=family.gate,
                L_total=distance,
                link=link,
                eps_sq=0.05 if scheme == gen.ONE_PHOTON else None,
                emitter=family.emitter,
                formulas=spec.formulas,
            )
        )
    return out


def _rank_key(cell: CellResult, floor: float, spec: SweepSpec):
    rate = cell.normalized_rate if cell.normalized_rate >= floor else 0.0
    c = cell.config
    return (
        -rate,
        c.n,
        c.j,
        spec.architectures.index(c.architecture),
        spec.variants.index(c.variant),
        gen.SCHEMES.index(c.scheme),
    )


def optimize_family(spec: SweepSpec, distance: float, cooperativity: float, family_name: str) -> OptimumRecord:
    family = FAMILIES[family_name]
    cells = tuple(CellResult(cfg, optimize_inner(cfg)) for cfg in cell_configs(spec, distance, cooperativity, family))
    winner = min(cells, key=lambda c: _rank_key(c, spec.rate_floor_hz, spec))
    report = winner.inner.report
    if report.normalized_rate < spec.rate_floor_hz:
        report = replace(report, secret_key_rate=0.0, normalized_rate=0.0)
    return OptimumRecord(
        distance,
        cooperativity,
        family_name,
        replace(winner.config, T=winner.inner.T, eps_sq=winner.inner.eps_sq),
        report,
        winner.inner.T,
        winner.inner.eps_sq,
        winner.inner.iterations,
        cells,
    )


def _task(args):
    return optimize_family(*args)


def optimize_grid(spec: SweepSpec, max_workers: int | None = 1) -> list[OptimumRecord]:
    """One record per (distance, cooperativity, family), in that nesting order."""
    tasks = [(spec, d, c, f) for d in spec.distances for c in spec.cooperativities for f in spec.families]
    if max_workers == 1 or len(tasks) == 1:
        return [_task(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=max_workers) as pool:
        return list(pool.map(_task, tasks))


@dataclass(frozen=True)
class RankingRow:
    distance: float
    cooperativity: float
    rank: int
    family: str
    normalized_rate: float
    record: OptimumRecord


def compare_schemes(spec: SweepSpec, max_workers: int | None = 1, records=None) -> list[RankingRow]:
    """Best normalized rate of each family per (distance, cooperativity), best first."""
    records = records if records is not None else optimize_grid(spec, max_workers)
    rows = []
    for d in spec.distances:
        for c in spec.cooperativities:
            group = [r for r in records if r.distance == d and r.cooperativity == c]
            group.sort(key=lambda r: (-r.normalized_rate, spec.families.index(r.family)))
            rows.extend(RankingRow(d, c, k + 1, r.family, r.normalized_rate, r) for k, r in enumerate(group))
    return rows
