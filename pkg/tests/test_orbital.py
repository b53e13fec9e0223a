import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from eatsim import ConfigError, Constellation, ConstellationConfig, build_constellation, orbital_angular_rate, propagate
from eatsim.orbital import MU_EARTH, rotate_z

from conftest import rodrigues_matrix


def test_single_equatorial_satellite():
    (sat,) = build_constellation(ConstellationConfig(1, 1, 0.0, 550.0, 0))
    np.testing.assert_allclose(sat.r0, [6921.0, 0.0, 0.0], atol=1e-9)
    np.testing.assert_allclose(sat.n, [0.0, 0.0, 1.0], atol=1e-12)


def test_starlink_phase_aligned_layout():
    sats = build_constellation(ConstellationConfig(72, 22, 53.0, 550.0, 0))
    assert len(sats) == 1584
    assert [s.sat_id for s in sats] == list(range(1584))
    for s in sats:
        assert s.sat_id == s.plane_index * 22 + s.slot_index
        assert s.m0_rad == pytest.approx(math.radians(s.slot_index * 360.0 / 22), abs=1e-12)


def test_walker_phasing_hand_enumerated():
    sats = build_constellation(ConstellationConfig(2, 4, 53.0, 550.0, 1))
    expected_deg = {(0, 0): 0, (0, 1): 90, (0, 2): 180, (0, 3): 270,
                    (1, 0): 45, (1, 1): 135, (1, 2): 225, (1, 3): 315}
    for s in sats:
        assert math.degrees(s.m0_rad) == pytest.approx(expected_deg[(s.plane_index, s.slot_index)])


@pytest.mark.parametrize("field,kwargs", [
    ("num_planes", dict(num_planes=0)),
    ("sats_per_plane", dict(sats_per_plane=0)),
    ("inclination_deg", dict(inclination_deg=181.0)),
    ("altitude_km", dict(altitude_km=-1.0)),
    ("phase_factor", dict(phase_factor=3)),
])
def test_invalid_config_names_field(field, kwargs):
    base = dict(num_planes=3, sats_per_plane=2, inclination_deg=53.0, altitude_km=550.0, phase_factor=0)
    base.update(kwargs)
    with pytest.raises(ConfigError) as exc:
        build_constellation(ConstellationConfig(**base))
    assert exc.value.key == field


def test_angular_rate_matches_kepler_period():
    omega = orbital_angular_rate(550.0, 6371.0, 3.986004418e14)
    a = 6921e3
    kepler_T = 2 * math.pi * math.sqrt(a**3 / 3.986004418e14)
    assert 2 * math.pi / omega == pytest.approx(kepler_T, rel=1e-12)
    assert 2 * math.pi / omega == pytest.approx(5730.13, abs=0.01)
    assert omega == pytest.approx(1.0965e-3, rel=1e-4)


def test_orbital_speed_near_reported_value():
    omega = orbital_angular_rate(550.0)
    v = omega * 6921.0
    assert abs(v - 7.56) / 7.56 < 0.005


def test_period_scaling_law():
    R = 6371.0
    h1 = 550.0
    h2 = 2 * (R + h1) - R
    T1 = 2 * math.pi / orbital_angular_rate(h1, R, MU_EARTH)
    T2 = 2 * math.pi / orbital_angular_rate(h2, R, MU_EARTH)
    assert T2 / T1 == pytest.approx(2**1.5, rel=1e-12)


def test_propagate_special_times():
    sat = build_constellation(ConstellationConfig(3, 5, 53.0, 550.0, 1))[7]
    T = 2 * math.pi / sat.omega_rad_s
    np.testing.assert_array_equal(propagate(sat, 0.0), sat.r0)
    np.testing.assert_allclose(propagate(sat, T / 2), -sat.r0, atol=1e-6)
    np.testing.assert_allclose(propagate(sat, T), sat.r0, atol=1e-6)


def test_propagate_matches_rotation_matrix_oracle():
    sats = build_constellation(ConstellationConfig(4, 3, 70.0, 1200.0, 2))
    rng = np.random.default_rng(5)
    for sat in sats:
        for t in rng.uniform(0, 20000, 5):
            oracle = rodrigues_matrix(sat.n, sat.omega_rad_s * t) @ sat.r0
            np.testing.assert_allclose(propagate(sat, t), oracle, atol=1e-6)


def test_vectorised_positions_match_scalar():
    c = Constellation.from_config(ConstellationConfig(5, 4, 53.0, 550.0, 2))
    ts = np.array([0.0, 13.5, 4000.0])
    pos = c.positions(ts)
    assert pos.shape == (3, 20, 3)
    for i, t in enumerate(ts):
        for j, sat in enumerate(c.ephemerides):
            np.testing.assert_allclose(pos[i, j], propagate(sat, t), atol=1e-9)


def test_prograde_northeast_at_ascending_node():
    sat = build_constellation(ConstellationConfig(1, 1, 53.0, 550.0, 0))[0]
    v = np.cross(sat.n, sat.r0)
    assert sat.r0[2] == pytest.approx(0.0, abs=1e-9)
    assert v[1] > 0 and v[2] > 0


def test_constellation_symmetry_phase_aligned():
    cfg = ConstellationConfig(6, 4, 53.0, 550.0, 0)
    c = Constellation.from_config(cfg)
    ts = np.linspace(0, cfg.period_s, 17)
    pos = c.positions(ts)
    for k in range(cfg.num_planes):
        back = rotate_z(pos[:, k * 4:(k + 1) * 4], -math.radians(k * 360.0 / 6))
        np.testing.assert_allclose(back, pos[:, 0:4], atol=1e-6)


@settings(max_examples=60, deadline=None)
@given(
    P=st.integers(1, 12), S=st.integers(1, 12), inc=st.floats(0, 180), h=st.floats(200, 36000),
    data=st.data(),
)
def test_ephemeris_invariants(P, S, inc, h, data):
    F = data.draw(st.integers(0, P - 1))
    for sat in build_constellation(ConstellationConfig(P, S, inc, h, F)):
        assert abs(np.linalg.norm(sat.r0) - (6371.0 + h)) / (6371.0 + h) < 1e-9
        assert abs(np.linalg.norm(sat.n) - 1.0) < 1e-12
        assert abs(sat.r0 @ sat.n) < 1e-6


@settings(max_examples=40, deadline=None)
@given(inc=st.floats(0, 180), h=st.floats(300, 2000), m=st.integers(0, 9),
       dt=st.floats(1.0, 2000.0))
def test_uniform_angular_sweep(inc, h, m, dt):
    sat = build_constellation(ConstellationConfig(1, 10, inc, h, 0))[m]
    T = 2 * math.pi / sat.omega_rad_s
    dt = min(dt, 0.49 * T)
    for t in (0.0, 0.3 * T, 1.7 * T):
        a, b = propagate(sat, t), propagate(sat, t + dt)
        ang = math.atan2(np.linalg.norm(np.cross(a, b)), a @ b)
        assert ang == pytest.approx(sat.omega_rad_s * dt, abs=1e-9)
