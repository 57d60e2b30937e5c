import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cavityrep.errors import ParameterError
from cavityrep.rates import RepeaterConfig
from cavityrep.secret import binary_entropy, build_report, secret_fraction, secret_fraction_raw
from cavityrep.states import werner


def reference_fraction(F):
    # six-state key fraction written out independently with math.log2
    e = 2 * (1 - F) / 3
    def h(x):
        return 0.0 if x in (0.0, 1.0) else -x * math.log2(x) - (1 - x) * math.log2(1 - x)
    return 1 - h(e) - e - (1 - e) * h((1 - 1.5 * e) / (1 - e))


@pytest.mark.parametrize("p,expected", [(0.0, 0.0), (1.0, 0.0), (0.5, 1.0), (0.11, 0.49992)])
def test_binary_entropy_examples(p, expected):
    assert binary_entropy(p) == pytest.approx(expected, abs=1e-5)


@pytest.mark.parametrize("p", [-0.1, 1.1])
def test_binary_entropy_domain(p):
    with pytest.raises(ParameterError):
        binary_entropy(p)


def test_fraction_at_unit_fidelity():
    assert secret_fraction(1.0) == 1.0


@pytest.mark.parametrize("F", [0.82, 0.9, 0.95, 0.99, 0.999])
def test_fraction_matches_reference(F):
    assert secret_fraction(F) == pytest.approx(reference_fraction(F), abs=1e-14)


def test_fraction_frozen_value():
    assert secret_fraction(0.95) == pytest.approx(0.6343549178479858, abs=1e-12)


def test_threshold_location():
    lo, hi = 0.5, 1.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if secret_fraction_raw(mid) > 0:
            hi = mid
        else:
            lo = mid
    assert 0.185 <= 1 - hi <= 0.195
    assert 1 - hi == pytest.approx(0.18929, abs=1e-5)


@pytest.mark.parametrize("F", [0.25, 0.5, 0.8])
def test_fraction_clamped_below_threshold(F):
    assert secret_fraction(F) == 0.0
    assert secret_fraction_raw(F) < 0.0


@given(st.floats(0.0, 1.0), st.floats(0.0, 1.0))
@settings(max_examples=100, deadline=None)
def test_fraction_monotone(a, b):
    lo, hi = sorted((a, b))
    assert secret_fraction(lo) <= secret_fraction(hi) + 1e-12


@given(st.floats(0.0, 1.0))
@settings(max_examples=100, deadline=None)
def test_fraction_bounded_and_continuous(F):
    f = secret_fraction(F)
    assert 0.0 <= f <= 1.0
    G = min(1.0, F + 1e-9)
    assert abs(secret_fraction(G) - f) < 1e-6


@pytest.mark.parametrize("F", [-0.01, 1.01])
def test_fraction_domain(F):
    with pytest.raises(ParameterError):
        secret_fraction(F)


def test_report_perfect_pair():
    cfg = RepeaterConfig(n=2, L_total=400.0)
    rep = build_report(cfg, 1.0, 10.0)
    assert rep.stations == 5
    assert rep.secret_key_rate == pytest.approx(10.0)
    assert rep.normalized_rate == pytest.approx(2.0)


def test_report_below_threshold():
    cfg = RepeaterConfig(n=1, L_total=400.0)
    rep = build_report(cfg, 0.7, 10.0)
    assert rep.secret_key_rate == 0.0
    assert rep.normalized_rate == 0.0


def test_report_projects_state_to_werner():
    cfg = RepeaterConfig(n=0, L_total=100.0)
    rho = 0.9 * werner(0.95) + 0.1 * np.diag([1.0, 0, 0, 0])
    rep = build_report(cfg, rho, 1.0)
    assert rep.final_fidelity == pytest.approx(0.9 * 0.95 + 0.05, abs=1e-14)


def test_report_rejects_negative_rate():
    cfg = RepeaterConfig(n=0, L_total=100.0)
    with pytest.raises(ParameterError):
        build_report(cfg, 0.9, -1.0)
