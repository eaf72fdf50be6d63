import math

import pytest

from cbim.propagation import PropagationError, RadioEnvironment, received_power
from cbim.scenarios import (
    ALL_KINDS,
    ScenarioKind,
    ScenarioSettings,
    build_interference,
    evaluate,
    run_sweep,
    sweep_distances,
    user_position,
)

DISTANCES = [round(0.1 * i, 1) for i in range(1, 11)]


def test_sweep_grid():
    assert sweep_distances(0.1, 1.0, 0.1) == DISTANCES
    assert sweep_distances(0.25, 0.25, 0.1) == [0.25]


def test_user_on_ray_between_cells_6_and_7(layout):
    x, y = user_position(1.0)
    mid = [(a + b) / 2 for a, b in zip(layout.cell(6).center, layout.cell(7).center)]
    assert math.atan2(y, x) == pytest.approx(math.atan2(mid[1], mid[0]))


@pytest.mark.parametrize("d", DISTANCES)
def test_real_time_has_no_first_tier(layout, env, d):
    i = build_interference(ScenarioKind.SCHEME_REAL_TIME, layout, env, d)
    assert 1 not in i.tiers and len(i) == 6


def test_baseline_first_tier_is_cells_2_and_4(layout, env):
    i = build_interference(ScenarioKind.NO_MANAGEMENT_BASELINE, layout, env, 0.5)
    assert {c for c, t in zip(i.cell_ids, i.tiers) if t == 1} == {2, 4}
    b = build_interference(ScenarioKind.NO_MANAGEMENT_BASELINE, layout, env, 0.5,
                           ScenarioSettings(borrowed_band="B"))
    assert {c for c, t in zip(b.cell_ids, b.tiers) if t == 1} == {3, 5}


def test_first_tier_powers_follow_power_factor(layout, env):
    s = ScenarioSettings()
    nrt = build_interference(ScenarioKind.SCHEME_NON_REAL_TIME, layout, env, 0.7, s)
    base = build_interference(ScenarioKind.NO_MANAGEMENT_BASELINE, layout, env, 0.7, s)
    factor = 0.5 ** (31.8 / 10)
    for pn, pb, t in zip(nrt.powers, base.powers, nrt.tiers):
        assert pn == pytest.approx(pb * (factor if t == 1 else 1.0), rel=1e-12)
    assert s.power_factor(env) == pytest.approx(factor, rel=1e-12)
    assert ScenarioSettings(inner_power_factor=0.3).power_factor(env) == 0.3


@pytest.mark.parametrize("d", DISTANCES)
def test_scheme_nrt_interference_below_baseline(layout, env, d):
    nrt = build_interference(ScenarioKind.SCHEME_NON_REAL_TIME, layout, env, d)
    base = build_interference(ScenarioKind.NO_MANAGEMENT_BASELINE, layout, env, d)
    assert nrt.total < base.total


@pytest.mark.parametrize("d", [0.0, -0.1, 1.01])
def test_distance_out_of_range(layout, env, d):
    with pytest.raises(PropagationError):
        build_interference(ScenarioKind.SCHEME_REAL_TIME, layout, env, d)


def test_evaluate_recomposition(layout, env):
    for kind in ALL_KINDS:
        r = evaluate(kind, layout, env, 0.6)
        assert r.capacity_bps_hz == pytest.approx(math.log2(1 + 10 ** (r.sinr_db / 10)), rel=1e-12)
        s0 = received_power(env, 0.6)
        i = build_interference(kind, layout, env, 0.6)
        assert r.sinr_db == pytest.approx(10 * math.log10(s0 / i.total), rel=1e-12)


def test_real_time_sinr_decreases_with_distance(layout, env):
    rows = run_sweep(layout, env, DISTANCES, [ScenarioKind.SCHEME_REAL_TIME])
    sinrs = [r.sinr_db for r in rows]
    assert sinrs[0] > 30
    assert all(a > b for a, b in zip(sinrs, sinrs[1:]))


def test_outage_grows_from_100m_to_1km(layout, env):
    for kind in ALL_KINDS:
        assert evaluate(kind, layout, env, 1.0).outage_prob >= evaluate(kind, layout, env, 0.1).outage_prob


def test_run_sweep_order_and_determinism(layout, env):
    rows = run_sweep(layout, env, DISTANCES, ALL_KINDS)
    assert len(rows) == 30
    assert [(r.scenario, r.distance_km) for r in rows] == [(k, d) for k in ALL_KINDS for d in DISTANCES]
    assert rows == run_sweep(layout, env, DISTANCES, ALL_KINDS)
    assert rows == run_sweep(layout, env, DISTANCES, ALL_KINDS, workers=4)
    with pytest.raises(ValueError):
        run_sweep(layout, env, [], ALL_KINDS)


def test_noise_lowers_sinr(layout, env):
    quiet = evaluate(ScenarioKind.SCHEME_REAL_TIME, layout, env, 1.0)
    noisy = evaluate(ScenarioKind.SCHEME_REAL_TIME, layout, env, 1.0, ScenarioSettings(noise_w=1e-12))
    assert noisy.sinr_db < quiet.sinr_db
    assert noisy.outage_prob == quiet.outage_prob


def test_scenario_names_parse():
    assert ScenarioKind.parse("SchemeRealTime") is ScenarioKind.SCHEME_REAL_TIME
    assert ScenarioKind.parse("NO_MANAGEMENT_BASELINE") is ScenarioKind.NO_MANAGEMENT_BASELINE
    with pytest.raises(ValueError):
        ScenarioKind.parse("Other")
