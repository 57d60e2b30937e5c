import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cavityrep.combinatorics import z_factor
from cavityrep.errors import DegeneratePurificationError, ParameterError
from cavityrep.gates import gate1, perfect_gate
from cavityrep.generation import GenerationAttempt, LinkParams
from cavityrep.rates import (
    PARALLEL,
    SEQUENTIAL,
    RepeaterConfig,
    distribution_rate,
    final_fidelity,
    pumping_probabilities,
    tau_link_parallel,
    tau_link_sequential,
    tau_pair,
    tau_swap_deterministic,
    tau_swap_probabilistic,
    tau_swap_sequential,
    timing,
    z_tilde,
)
from cavityrep.secret import evaluate
from cavityrep.states import purify, werner

C_FIBER = 2e5
TAU = 1e-5


def attempt(p0, F=1.0):
    return GenerationAttempt(werner(F), p0, 1e-8)


def base_time(config):
    return config.l0 / C_FIBER + TAU


# --- tau_pair ----------------------------------------------------------------------


def test_tau_pair_certain():
    assert tau_pair(1, 1, 1.0, 50.0, C_FIBER, TAU) == pytest.approx(50 / C_FIBER + TAU)


def test_tau_pair_small_p():
    p = 1e-6
    assert tau_pair(1, 2, p, 50.0, C_FIBER, TAU) == pytest.approx((50 / C_FIBER + TAU) / (2 * p), rel=1e-5)


def test_tau_pair_frozen():
    assert tau_pair(2, 2, 0.5, 50.0, C_FIBER, TAU) == pytest.approx(8 / 3 * 2.6e-4, rel=1e-12)


# --- pumping -----------------------------------------------------------------------


def test_pumping_without_rounds():
    s = pumping_probabilities(werner(0.9), perfect_gate(), "standard", 0, 0.3, 1)
    assert s.fidelities == pytest.approx((0.9,))
    assert s.P2 == () and s.P3 == () and s.p_pur == ()


def test_pumping_one_round_matches_purify():
    _, p = purify(werner(0.9), werner(0.9), perfect_gate())
    s = pumping_probabilities(werner(0.9), perfect_gate(), "standard", 1, 0.3, 2)
    assert s.P2[0] == pytest.approx(p, rel=1e-14)
    assert s.P1 == pytest.approx(p / z_factor(2, 2, 0.3), rel=1e-14)


def test_pumping_with_heralded_gate_pays_two_gates():
    g = gate1(100.0, 2 * np.pi * 6e6)
    s_g = pumping_probabilities(werner(0.9), g, "standard", 1, 0.3, 2)
    s_p = pumping_probabilities(werner(0.9), perfect_gate(), "standard", 1, 0.3, 2)
    # same heralding up to the 4e-5 gate error
    assert s_g.P2[0] / s_p.P2[0] == pytest.approx(0.16, rel=1e-4)


def test_pumping_two_rounds_structure():
    s = pumping_probabilities(werner(0.85), perfect_gate(), "standard", 2, 0.2, 2)
    assert s.P2 == pytest.approx((s.p_pur[0] * s.p_pur[1], s.p_pur[1]))
    assert s.P3 == pytest.approx((s.p_pur[1] / z_factor(1, 1, 0.2),))
    # without twirling between rounds the phi- weight builds up, so only the
    # first round is guaranteed to help a Werner input
    assert s.fidelities[1] > s.fidelities[0]


def test_pumping_degenerate():
    with pytest.raises(DegeneratePurificationError):
        pumping_probabilities(np.diag([1.0, 0, 0, 0]), perfect_gate(), "modified", 1, 0.3, 2)


# --- link times --------------------------------------------------------------------


def test_link_certain_single():
    c = RepeaterConfig(n=0, gate="perfect")
    assert tau_link_parallel(c, attempt(1.0)) == pytest.approx(base_time(c))
    assert timing(c, attempt(1.0)).rate == pytest.approx(1 / base_time(c))


def test_link_parallel_reduces_to_z44():
    c = RepeaterConfig(n=2, gate="gate2")
    expected = z_factor(4, 4, 1 / z_factor(1, 1, 0.2)) * base_time(c)
    assert tau_link_parallel(c, attempt(0.2)) == pytest.approx(expected, rel=1e-14)


def test_link_sequential_certain():
    c = RepeaterConfig(n=1, gate="gate2", architecture=SEQUENTIAL)
    assert tau_link_sequential(c, attempt(1.0)) == pytest.approx(2 * base_time(c), rel=1e-14)


def test_link_sequential_single_level_terms():
    c = RepeaterConfig(n=1, gate="gate2", architecture=SEQUENTIAL, qubits_per_station=4)
    p0 = 0.05
    z14, z13 = z_factor(1, 4, p0), z_factor(1, 3, p0)
    expected = (z_factor(1, 1, 1 / z14) + z_factor(1, 1, 1 / z13)) * base_time(c)
    assert tau_link_sequential(c, attempt(p0)) == pytest.approx(expected, rel=1e-14)


def test_link_sequential_falls_back_at_n0():
    c = RepeaterConfig(n=0, gate="gate2", architecture=SEQUENTIAL)
    assert tau_link_sequential(c, attempt(0.3)) == tau_link_parallel(c, attempt(0.3))


def pumping_recurrence(config, p0, F0):
    # lower-limit estimate: one link, rounds chained one after the other
    gate = config.gate_model()
    m = config.m
    base = base_time(config)
    tp = config.l0 / C_FIBER + gate.gate_time
    t = (z_factor(2, m, p0) - z_factor(1, m - 1, p0)) * base
    kept = werner(F0)
    for _ in range(config.j):
        kept, p = purify(kept, werner(F0), gate)
        t = (t + tp + z_factor(1, m - 1, p0) * base) / p
    return t


@pytest.mark.parametrize("j", [1, 2])
@pytest.mark.parametrize("gate", ["perfect", "gate2"])
def test_link_estimate_against_pumping_recurrence(j, gate):
    # With likely generation and purification the all-links estimate sits
    # above the single-link recurrence by less than a factor 2.
    c = RepeaterConfig(n=3, j=j, gate=gate, qubits_per_station=4, link=LinkParams(cooperativity=1000))
    ratio = tau_link_parallel(c, attempt(0.9, 0.97)) / pumping_recurrence(c, 0.9, 0.97)
    assert 1.0 <= ratio <= 2.0


@pytest.mark.parametrize("n", [1, 2, 3])
@pytest.mark.parametrize("gate", ["gate2", "perfect"])
def test_sequential_slightly_faster_with_four_qubits(n, gate):
    par = RepeaterConfig(n=n, gate=gate, qubits_per_station=4, architecture=PARALLEL)
    seq = RepeaterConfig(n=n, gate=gate, qubits_per_station=4, architecture=SEQUENTIAL)
    a = attempt(1e-3)
    speedup = timing(par, a).distribution_time / timing(seq, a).distribution_time
    assert 1.0 < speedup < 2.0


# --- swap times --------------------------------------------------------------------


@pytest.mark.parametrize(
    "n,L0,tau_c,expected",
    [(0, 50.0, 1e-5, 0.0), (2, 125.0, 1e-5, 1.895e-3), (5, 1000 / 32, 1e-5, 31 * 31.25 / 2e5 + 5e-5)],
)
def test_deterministic_swap(n, L0, tau_c, expected):
    assert tau_swap_deterministic(n, L0, C_FIBER, tau_c) == pytest.approx(expected, rel=1e-14, abs=1e-18)


def test_deterministic_swap_negative_levels():
    with pytest.raises(ParameterError):
        tau_swap_deterministic(-1, 50.0, C_FIBER, 1e-5)


def test_z_tilde_recursion():
    assert z_tilde(0, 0, 0.4, None) == 1.0
    assert z_tilde(1, 0, 0.4, None) == pytest.approx(z_factor(2, 2, 0.4))
    assert z_tilde(2, 1, 0.4, 0.3) == pytest.approx(z_factor(2, 2, 0.4 / z_factor(2, 2, 0.3)))


def heralded(C, n, **kw):
    return RepeaterConfig(n=n, gate="gate1", link=LinkParams(cooperativity=C), **kw)


def test_heralded_swap_asymptotic():
    c = heralded((6 / 0.9) ** 2, 1, L_total=100.0)
    assert c.gate_model().success_prob == pytest.approx(0.1)
    t = tau_swap_probabilistic(c, attempt(1e-4))
    assert t == pytest.approx(1.5 * base_time(c) / (1e-4 * 0.1), rel=1e-3)


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
@pytest.mark.parametrize("p0", [0.01, 0.3, 0.9])
def test_heralded_agrees_with_deterministic_at_unit_swap_probability(n, p0):
    c = heralded(1e14, n)
    det = tau_link_parallel(c, attempt(p0)) + tau_swap_deterministic(n, c.l0, C_FIBER, c.gate_model().gate_time)
    ratio = tau_swap_probabilistic(c, attempt(p0)) / det
    assert 0.5 <= ratio <= 2.0


def test_sequential_first_level_at_unit_swap_probability():
    c = heralded(1e20, 3, architecture=SEQUENTIAL)
    levels = tau_swap_sequential(c, attempt(0.2))
    g = c.gate_model()
    assert levels[0] == pytest.approx(c.l0 / C_FIBER + g.gate_time, rel=1e-5)
    assert levels[2] == pytest.approx(4 * c.l0 / C_FIBER + g.gate_time, rel=1e-6)


def test_sequential_levels_positive():
    c = heralded(100.0, 3, architecture=SEQUENTIAL)
    t = timing(c)
    assert len(t.level_times) == 3
    assert all(x > 0 for x in t.level_times)
    assert t.distribution_time == pytest.approx(t.tau_link + sum(t.level_times))


@given(st.integers(1, 5), st.floats(1e-3, 1.0), st.floats(1.01, 5.0), st.sampled_from([PARALLEL, SEQUENTIAL]))
@settings(max_examples=80, deadline=None)
def test_time_non_increasing_in_generation_probability(n, p0, k, arch):
    for gate in ("gate1", "gate2"):
        c = RepeaterConfig(n=n, gate=gate, architecture=arch)
        slow = timing(c, attempt(p0)).distribution_time
        fast = timing(c, attempt(min(1.0, p0 * k))).distribution_time
        assert fast <= slow * (1 + 1e-12)


@given(st.integers(1, 5), st.floats(40.0, 1e5), st.floats(1.01, 10.0), st.sampled_from([PARALLEL, SEQUENTIAL]))
@settings(max_examples=80, deadline=None)
def test_time_non_increasing_in_swap_probability(n, C, k, arch):
    a = attempt(0.05)
    slow = timing(heralded(C, n, architecture=arch), a).distribution_time
    fast = timing(heralded(C * k, n, architecture=arch), a).distribution_time
    assert fast <= slow * (1 + 1e-12)


def test_timing_breakdown_invariants():
    for c in (heralded(100.0, 3), RepeaterConfig(n=3, gate="gate2"), heralded(100.0, 2, architecture=SEQUENTIAL)):
        t = timing(c)
        assert t.tau_link >= 0 and t.tau_swap_total >= 0
        assert t.distribution_time >= t.tau_link
        assert all(x >= 0 for x in t.level_times)


# --- fidelity propagation ------------------------------------------------------------


@pytest.mark.parametrize("n", [0, 1, 3, 5])
def test_perfect_chain_keeps_unit_fidelity(n):
    c = RepeaterConfig(n=n, gate="perfect", link=LinkParams(r_dark=0.0))
    F, _ = final_fidelity(c)
    assert F == pytest.approx(1.0, abs=1e-12)


def test_heralded_chain_fidelity_bound():
    # Self-swapping doubles the incoming error and each gate adds its own, so
    # to first order the error after n levels is (2^n - 1) times the gate error.
    c = RepeaterConfig(n=5, gate="gate1", link=LinkParams(r_dark=0.0))
    F, _ = final_fidelity(c)
    assert 1 - F == pytest.approx(31 * 4e-5, rel=1e-3)


@given(st.floats(0.5, 1.0), st.sampled_from(["gate1", "gate2", "gate3", "perfect"]))
@settings(max_examples=40, deadline=None)
def test_fidelity_non_increasing_in_levels(F, gate):
    fids = [final_fidelity(RepeaterConfig(n=n, gate=gate), attempt(0.1, F))[0] for n in range(6)]
    assert all(b <= a + 1e-12 for a, b in zip(fids, fids[1:]))


def test_max_swap_levels_heuristic():
    # error doubles per level: eps_n ~ 2^n (eps_0 + eps_g)
    link = LinkParams(cooperativity=1000)
    c = RepeaterConfig(n=4, gate="gate2", link=link, L_total=800.0)
    F0, _ = final_fidelity(RepeaterConfig(n=0, gate="gate2", link=link, L_total=50.0))
    F4, _ = final_fidelity(c)
    eps_g = 1 - c.gate_model().fidelity
    predicted = 16 * ((1 - F0) + eps_g)
    assert 0.5 * predicted <= 1 - F4 <= 1.5 * predicted


# --- rates -------------------------------------------------------------------------


def test_fig4_ordering_at_1000_km():
    rates = {}
    for n in (2, 3, 4):
        report, _ = evaluate(RepeaterConfig(n=n, gate="gate1", L_total=1000.0))
        rates[n] = report.normalized_rate
    assert rates[4] > rates[3] > rates[2]


def test_stations():
    assert [RepeaterConfig(n=n).stations for n in range(6)] == [2, 3, 5, 9, 17, 33]


def test_zero_generation_probability_gives_zero_rate():
    c = RepeaterConfig(n=1, gate="gate1", link=LinkParams(cooperativity=20.0))
    result = distribution_rate(c)
    assert result.rate == 0.0
    assert math.isinf(result.timing.distribution_time)


@pytest.mark.parametrize(
    "kw",
    [
        {"n": 6},
        {"j": 3, "qubits_per_station": 4},
        {"j": 1, "qubits_per_station": 2},
        {"qubits_per_station": 3},
        {"scheme": "one_photon"},
        {"L_total": 0.0},
        {"L_total": -5.0},
        {"gate": "gate9"},
        {"architecture": "ring"},
        {"variant": "other"},
        {"T": -1e-9},
        {"emitter": "dot"},
    ],
)
def test_invalid_configs(kw):
    with pytest.raises(ParameterError):
        RepeaterConfig(**kw)
