from dataclasses import replace

import numpy as np
import pytest

from cavityrep import generation as gen
from cavityrep.errors import ParameterError
from cavityrep.optimize import (
    FAMILIES,
    SweepSpec,
    cell_configs,
    compare_schemes,
    optimize_family,
    optimize_grid,
    optimize_inner,
)
from cavityrep.rates import RepeaterConfig
from cavityrep.secret import evaluate

SMALL = dict(n_values=(1, 2), distances=(400.0,), cooperativities=(100.0,))


def one_photon_config(**kw):
    return RepeaterConfig(n=2, L_total=400.0, scheme=gen.ONE_PHOTON, eps_sq=0.05, **kw)


def test_two_photon_ignores_eps():
    r = optimize_inner(RepeaterConfig(n=2, L_total=400.0))
    assert r.eps_sq is None
    assert r.normalized_rate > 0


def test_two_photon_without_dark_counts_uses_full_window():
    link = gen.LinkParams(r_dark=0.0)
    cfg = RepeaterConfig(n=2, L_total=400.0, link=link)
    r = optimize_inner(cfg)
    assert r.T == pytest.approx(gen.saturation_window(link), rel=1e-6)


def test_one_photon_inner_optimum_against_grid():
    cfg = one_photon_config()
    r = optimize_inner(cfg)
    t_max = gen.saturation_window(cfg.link)
    best = 0.0
    for T in t_max * np.logspace(-2, 0, 9):
        for eps in np.logspace(-4, np.log10(0.5), 25):
            report, _ = evaluate(replace(cfg, T=float(T), eps_sq=float(eps)))
            best = max(best, report.normalized_rate)
    assert best > 0
    assert r.normalized_rate >= 0.95 * best
    assert 0 < r.eps_sq <= 0.5
    assert 0 < r.T <= t_max * (1 + 1e-12)


def test_inner_reproducible():
    cfg = one_photon_config()
    a, b = optimize_inner(cfg), optimize_inner(cfg)
    assert (a.T, a.eps_sq, a.normalized_rate) == (b.T, b.eps_sq, b.normalized_rate)


def test_winner_dominates_cells():
    rec = optimize_family(SweepSpec(**SMALL), 400.0, 100.0, "2ph+gate1")
    assert rec.cells
    assert all(rec.normalized_rate >= c.normalized_rate - 1e-15 for c in rec.cells)
    assert rec.config.T == rec.T


def test_two_qubits_skip_purification():
    spec = SweepSpec(qubits_per_station=2, **SMALL)
    cfgs = cell_configs(spec, 400.0, 100.0, FAMILIES["2ph+gate2"])
    assert cfgs and all(c.j == 0 for c in cfgs)
    spec4 = SweepSpec(qubits_per_station=4, **SMALL)
    assert any(c.j >= 1 for c in cell_configs(spec4, 400.0, 100.0, FAMILIES["2ph+gate2"]))


def test_cells_have_no_duplicates():
    spec = SweepSpec(qubits_per_station=4, n_values=(0, 1, 2))
    cfgs = cell_configs(spec, 400.0, 100.0, FAMILIES["perfect"])
    keys = [(c.scheme, c.n, c.j, c.variant, c.architecture) for c in cfgs]
    assert len(keys) == len(set(keys))


def test_four_qubits_never_worse():
    kw = dict(n_values=(1, 2), j_values=(0, 1), distances=(400.0,), cooperativities=(100.0,))
    two = optimize_family(SweepSpec(qubits_per_station=2, **kw), 400.0, 100.0, "2ph+gate2")
    four = optimize_family(SweepSpec(qubits_per_station=4, **kw), 400.0, 100.0, "2ph+gate2")
    assert four.normalized_rate >= two.normalized_rate * (1 - 1e-6)


def test_grid_reproducible():
    spec = SweepSpec(families=("2ph+gate1",), **SMALL)
    a = [(r.normalized_rate, r.T, r.config) for r in optimize_grid(spec)]
    b = [(r.normalized_rate, r.T, r.config) for r in optimize_grid(spec)]
    assert a == b


def test_ranking_perfect_first_and_heralded_gate_leads_cavities():
    spec = SweepSpec(
        families=("2ph+gate1", "2ph+gate3", "perfect"),
        n_values=(3, 4),
        distances=(1000.0,),
        cooperativities=(100.0,),
    )
    rows = compare_schemes(spec)
    assert [r.rank for r in rows] == [1, 2, 3]
    assert rows[0].family == "perfect"
    assert rows[1].family == "2ph+gate1"
    assert rows[2].normalized_rate == 0.0


@pytest.mark.parametrize(
    "kw",
    [
        {"distances": ()},
        {"n_values": ()},
        {"families": ()},
        {"distances": (-1.0,)},
        {"cooperativities": (0.0,)},
        {"rate_floor_hz": -1.0},
    ],
)
def test_invalid_sweep(kw):
    with pytest.raises(ParameterError):
        SweepSpec(**kw)
