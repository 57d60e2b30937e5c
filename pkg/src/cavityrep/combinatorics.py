"""Expected number of rounds Z_{l;m}(p) to collect l successes from m parallel coins.

Coins that succeed are kept; only the failed ones are tossed again.  Closed
forms exist for the small cases used with at most four qubits per station;
everything else goes through an exact absorbing Markov chain over the number
of successes already collected.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DivergenceError, ParameterError


@dataclass(frozen=True)
class ZQuery:
    l: int
    m: int
    p: float

    def __post_init__(self):
        if not (isinstance(self.l, (int, np.integer)) and isinstance(self.m, (int, np.integer))):
            raise ParameterError("l and m must be integers")
        if self.m < 1 and self.l > 0:
            raise ParameterError(f"need at least one coin, got m={self.m}")
        if not 0 <= self.l <= max(self.m, 0):
            raise ParameterError(f"need 0 <= l <= m, got l={self.l}, m={self.m}")
        if not 0.0 <= self.p <= 1.0:
            raise ParameterError(f"p must lie in [0, 1], got {self.p}")


def z_mm_sum(m: int, p: float) -> float:
    """Alternating binomial sum for Z_{m;m}; fine for small m, cancels badly for large m."""
    log_q = math.log1p(-p) if p < 1.0 else -math.inf
    return sum(math.comb(m, k) * (-1) ** (k + 1) / -math.expm1(k * log_q) for k in range(1, m + 1))


def _z23(p: float) -> float:
    # the literal numerator 5-(7-3p) needs a factor p on the bracket to restore both limits
    return (5.0 - (7.0 - 3.0 * p) * p) / ((2.0 - p) * p * (3.0 + (p - 3.0) * p))


def _z24(p: float) -> float:
    return (-7.0 + p * (15.0 + p * (4.0 * p - 13.0))) / ((p - 2.0) * p * (3.0 + (p - 3.0) * p) * (2.0 + (p - 2.0) * p))


def _z34(p: float) -> float:
    return (-13.0 + p * (33.0 + p * (22.0 * p - 6.0 * p**2 - 37.0))) / (
        (p - 2.0) * p * (3.0 + (p - 3.0) * p) * (2.0 + (p - 2.0) * p)
    )


CLOSED_FORMS = {
    (1, 1): lambda p: 1.0 / p,
    (1, 2): lambda p: 1.0 / (2.0 * p - p**2),
    (1, 3): lambda p: 1.0 / (3.0 * p - 3.0 * p**2 + p**3),
    (1, 4): lambda p: 1.0 / (4.0 * p - 6.0 * p**2 + 4.0 * p**3 - p**4),
    (2, 2): lambda p: z_mm_sum(2, p),
    (2, 3): _z23,
    (2, 4): _z24,
    (3, 3): lambda p: z_mm_sum(3, p),
    (3, 4): _z34,
    (4, 4): lambda p: z_mm_sum(4, p),
}


def z_closed_form(l: int, m: int, p: float) -> float:
    """Closed-form Z_{l;m}(p) for the cases with m <= 4."""
    ZQuery(l, m, p)
    if l == 0:
        return 0.0
    if p == 0.0:
        raise DivergenceError(f"Z_{{{l};{m}}} diverges at p = 0")
    try:
        form = CLOSED_FORMS[(l, m)]
    except KeyError:
        raise ParameterError(f"no closed form for Z_{{{l};{m}}}") from None
    return float(form(p))


def binomial_pmf(r: int, p: float) -> np.ndarray:
    k = np.arange(r + 1)
    comb = np.array([math.comb(r, int(i)) for i in k], dtype=float)
    with np.errstate(under="ignore"):
        return comb * p**k * (1.0 - p) ** (r - k)


@lru_cache(maxsize=65536)
def _z_markov_cached(l: int, m: int, p: float) -> float:
    # E[s] = expected remaining rounds with s successes kept; E[l] = 0.
    E = np.zeros(l + 1)
    log_q = math.log1p(-p) if p < 1.0 else -math.inf
    for s in range(l - 1, -1, -1):
        r = m - s
        pmf = binomial_pmf(r, p)
        # 1 - q^r without cancellation for tiny p
        leave = -math.expm1(r * log_q) if p < 1.0 else 1.0
        ahead = 0.0
        for k in range(1, r + 1):
            ahead += pmf[k] * E[min(s + k, l)]
        E[s] = (1.0 + ahead) / leave
    return float(E[0])


def z_markov(l: int, m: int, p: float) -> float:
    """Z_{l;m}(p) from the absorbing Markov chain; numerically stable for any m."""
    ZQuery(l, m, p)
    if l == 0:
        return 0.0
    if p == 0.0:
        raise DivergenceError(f"Z_{{{l};{m}}} diverges at p = 0")
    return _z_markov_cached(int(l), int(m), float(p))


def z_factor(l: int, m: int, p: float) -> float:
    """Expected number of rounds to hold ``l`` successes using ``m`` coins.

    Uses the closed forms for ``m <= 4`` and the Markov chain otherwise.
    ``Z_{0;m} = 0``; ``p = 0`` raises :class:`DivergenceError`.
    """
    ZQuery(l, m, p)
    if l == 0:
        return 0.0
    if p == 0.0:
        raise DivergenceError(f"Z_{{{l};{m}}} diverges at p = 0")
    if p == 1.0:
        return 1.0
    if (l, m) in CLOSED_FORMS:
        return z_closed_form(l, m, p)
    return z_markov(l, m, p)


def z22(p: float) -> float:
    """Z_{2;2}(p) = (3 - 2p) / (p (2 - p))."""
    return z_factor(2, 2, p)


def z_oracle(l: int, m: int, p: float, trials: int, seed: int | None = 0) -> tuple[float, float]:
    """Monte Carlo estimate of Z_{l;m}(p): mean rounds and its standard error.

    Plays the keep-successes / retoss-failures game round by round for all
    trials at once.
    """
    ZQuery(l, m, p)
    if trials < 1:
        raise ParameterError(f"trials must be >= 1, got {trials}")
    if l == 0:
        return 0.0, 0.0
    if p == 0.0:
        raise DivergenceError("the coin game never ends at p = 0")
    rng = np.random.default_rng(seed)
    tails = np.zeros(trials, dtype=np.int64)
    rounds = np.zeros(trials, dtype=np.int64)
    active = np.arange(trials)
    while active.size:
        rounds[active] += 1
        tails[active] += rng.binomial(m - tails[active], p)
        active = active[tails[active] < l]
    mean = float(rounds.mean())
    se = float(rounds.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
    return mean, se
