import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from insarfopt import comms
from insarfopt.geometry import Formation, master_x_for
from insarfopt.insar_metrics import (
    compute_metrics,
    evaluate_constraints,
    gamma_rg,
    gamma_rg_from_sines,
    gamma_snr,
    gamma_snr_from,
    geometric_slacks,
    height_of_ambiguity,
    rg_factor,
    snr_master,
    snr_slave,
)
from insarfopt.oracle import GridSpec, grid_search
from insarfopt.scenario import radar_constant, with_overrides

Q1 = (-80.0, 100.0)


def _minimal_powers(f, s):
    return comms.min_energy_for(f.q1, s, 0).p, comms.min_energy_for(f.q2, s, 1).p


def test_snr_master_longhand(ref):
    f = Formation(Q1, (10.0, 4.0))
    expected = radar_constant(ref, 0) / (141.42135623730951 ** 3 * math.sqrt(0.5))
    assert snr_master(f, ref, 0) == pytest.approx(expected, rel=1e-9)


def test_snr_master_cubic_law(ref):
    near = Formation((-30.0, 50.0), (10.0, 4.0))
    far = Formation((-80.0, 100.0), (10.0, 4.0))
    assert snr_master(near, ref, 0) / snr_master(far, ref, 0) == pytest.approx(8.0)
    fast = with_overrides(ref, {"mission.v_y": 4.0})
    assert snr_master(far, fast, 0) == pytest.approx(snr_master(far, ref, 0) / 2)


def test_snr_slave(ref):
    f = Formation(Q1, (10.0, 4.0))
    expected = radar_constant(ref, 0) / (141.42135623730951 ** 2 * 10.0)
    assert snr_slave(f, ref, 0) == pytest.approx(expected, rel=1e-9)
    half = Formation(Q1, (15.0, 4.0))
    assert snr_slave(half, ref, 0) == pytest.approx(2 * snr_slave(f, ref, 0))
    nadir = Formation(Q1, (20.0, 30.0))
    assert math.isinf(snr_slave(nadir, ref, 0))


def test_gamma_snr_values(ref):
    assert gamma_snr_from(math.inf, math.inf) == 1.0
    assert gamma_snr_from(1.0, 1.0) == pytest.approx(0.5)
    assert gamma_snr_from(3.0, math.inf) == pytest.approx(math.sqrt(3) / 2)
    nadir = Formation(Q1, (20.0, 30.0))
    single = gamma_snr_from(snr_master(nadir, ref, 0), math.inf)
    assert gamma_snr(nadir, ref, 0) == pytest.approx(single, rel=1e-14)


@given(st.floats(1e-3, 1e6), st.floats(1e-3, 1e6), st.floats(1.01, 10.0))
def test_gamma_snr_monotone_and_bounded(a, b, k):
    g = gamma_snr_from(a, b)
    assert 0 < g < 1
    assert gamma_snr_from(a * k, b) >= g
    assert gamma_snr_from(a, b * k) >= g
    assert g <= min(gamma_snr_from(a, math.inf), gamma_snr_from(math.inf, b))


def test_gamma_rg_values(ref):
    s1 = math.sin(math.pi / 4)
    assert gamma_rg_from_sines(s1, s1, 1.2) == pytest.approx(1.0)
    longhand = (3.2 * 0.5 - 0.8 * 0.70711) / (1.2 * (0.70711 + 0.5))
    assert gamma_rg_from_sines(0.70711, 0.5, 1.2) == pytest.approx(longhand, rel=1e-12)
    assert gamma_rg_from_sines(0.70711, 0.5, 1.2) == pytest.approx(0.7140, abs=1e-4)
    assert gamma_rg_from_sines(0.70711, 0.0, 1.2) == pytest.approx(-0.8 / 1.2)
    # a slave on the master line of sight sees the same look angle
    assert gamma_rg((20.0 - 40.0, 40.0), ref) == pytest.approx(1.0)
    assert gamma_rg((20.0 - 40.0, 40.0), ref, q1=Q1) == pytest.approx(1.0)


def test_rg_factor(ref):
    g, bp = 0.8, 1.2
    assert rg_factor(ref) == pytest.approx((-g * bp - 2 + bp) / (g * bp - 2 - bp))
    assert rg_factor(ref) == pytest.approx(0.7857, abs=1e-4)


def test_height_of_ambiguity(ref):
    t = math.tan(ref.radar.theta_d)
    # slave displaced by b_perp perpendicular to the master line of sight
    for bperp, h in ((10.0, 1.2), (0.12 * 100 / 2.2, 2.2)):
        q2 = (-80.0 - bperp / math.sqrt(2), 100.0 - bperp / math.sqrt(2))
        f = Formation(Q1, q2)
        assert height_of_ambiguity(f, ref) == pytest.approx(h, rel=1e-12)
        assert compute_metrics(f, ref).b_perp == pytest.approx(bperp, rel=1e-12)
    assert t == pytest.approx(1.0)
    on_los = Formation(Q1, (-30.0, 50.0))
    assert math.isinf(height_of_ambiguity(on_los, ref))
    far = Formation(Q1, (-80.0 + 7e4, 100.0 + 7e4))
    assert height_of_ambiguity(far, ref) < 1e-3


@given(st.floats(1.0, 100.0), st.floats(-150.0, 20.0), st.floats(1.0, 100.0))
def test_hamb_bperp_product(z1, x2, z2):
    from insarfopt.scenario import reference_scenario
    s = reference_scenario()
    x1 = master_x_for(z1, s.mission.target_x, s.radar.theta_d)
    f = Formation((x1, z1), (x2, z2))
    m = compute_metrics(f, s)
    if m.b_perp > 1e-9:
        r1 = math.hypot(x1 - 20.0, z1)
        s1 = (20.0 - x1) / r1
        assert m.h_amb * m.b_perp == pytest.approx(0.12 * r1 * s1, rel=1e-9)


def test_metrics_report(ref):
    m = compute_metrics(Formation(Q1, (-71.5, 100.0)), ref)
    assert m.snr1.shape == (ref.mission.num_slots,)
    assert np.all((m.gamma_snr > 0) & (m.gamma_snr <= 1))
    assert set(m.to_json()) == {"snr1_min", "snr2_min", "gamma_snr_min", "gamma_rg",
                                "h_amb_m", "b_perp_m", "baseline_m"}


def test_c2_flag(ref):
    f = Formation((-79.0, 100.0), (-71.5, 100.0))
    rep = evaluate_constraints(f, _minimal_powers(f, ref), ref)
    assert not rep.records["C2"].satisfied
    assert "C2" in rep.violated()
    assert not rep.feasible


def test_c5_squared_slack(ref):
    f = Formation(Q1, (-80.0, 99.0))
    rep = evaluate_constraints(f, _minimal_powers(f, ref), ref)
    assert rep.slack("C5") == pytest.approx(1.0 - 4.0)
    assert not rep.records["C5"].satisfied


def test_oracle_point_feasible(ref):
    spec = GridSpec.coarse(ref, 20)
    res = grid_search(ref, spec)
    assert res.found
    f = res.formation
    rep = evaluate_constraints(f, _minimal_powers(f, ref), ref)
    assert rep.feasible, rep.violated()
    assert set(rep.to_json()) == {f"C{i}" for i in range(1, 12)}


def test_c6_reported_at_worst_slot(ref):
    v = tuple(2.0 + 0.02 * n for n in range(ref.mission.num_slots))
    import dataclasses
    from insarfopt.scenario import replace
    s = replace(ref, mission=dataclasses.replace(ref.mission, velocity=v))
    f = Formation(Q1, (-71.5, 100.0))
    worst = min(gamma_snr(f, s, n) for n in range(s.mission.num_slots))
    rep = evaluate_constraints(f, _minimal_powers(f, s), s)
    assert rep.slack("C6") == pytest.approx(worst - 0.8, rel=1e-12)


def _random_points(n, seed):
    rng = np.random.default_rng(seed)
    z1 = rng.uniform(1, 100, n)
    x2 = rng.uniform(-150, 20, n)
    z2 = rng.uniform(1, 100, n)
    return z1, x2, z2


def test_c7_sign_agreement(ref):
    z1, x2, z2 = _random_points(10_000, 1)
    x1 = master_x_for(z1, 20.0, ref.radar.theta_d)
    slack = geometric_slacks(x1, z1, x2, z2, ref)["C7"]
    s1 = (20.0 - x1) / np.hypot(20.0 - x1, z1)
    s2 = (20.0 - x2) / np.hypot(20.0 - x2, z2)
    direct = gamma_rg_from_sines(s1, s2, ref.radar.b_p) - ref.thresholds.gamma_rg_min
    keep = np.abs(direct) > 1e-9
    assert np.array_equal(slack[keep] >= 0, direct[keep] >= 0)


def test_c8_window_agreement(ref):
    z1, x2, z2 = _random_points(10_000, 2)
    x1 = master_x_for(z1, 20.0, ref.radar.theta_d)
    slack = geometric_slacks(x1, z1, x2, z2, ref)["C8"]
    th = ref.thresholds
    inside = []
    for a, b, c, d in zip(x1, z1, x2, z2):
        h = height_of_ambiguity(Formation((a, b), (c, d)), ref)
        inside.append(th.h_amb_min <= h <= th.h_amb_max)
    inside = np.array(inside)
    keep = np.abs(slack) > 1e-9
    assert np.array_equal((slack >= 0)[keep], inside[keep])


@settings(max_examples=200)
@given(st.floats(1.0, 100.0), st.floats(-150.0, 20.0), st.floats(1.0, 100.0))
def test_c6_slack_matches_direct(z1, x2, z2):
    from insarfopt.scenario import reference_scenario
    s = reference_scenario()
    x1 = master_x_for(z1, 20.0, s.radar.theta_d)
    f = Formation((x1, z1), (x2, z2))
    slack = float(geometric_slacks(x1, z1, x2, z2, s)["C6"])
    direct = min(gamma_snr(f, s, n) for n in range(s.mission.num_slots)) - 0.8
    assert slack == pytest.approx(direct, rel=1e-12, abs=1e-14)
