import math

import numpy as np
import pytest

from eatsim import (
    ConfigError,
    Constellation,
    ConstellationConfig,
    EatSearchConfig,
    GeodeticPosition,
    LinkBudget,
    Objective,
    coverage_profile,
    eat_latitude_sweep,
    geodetic_to_cartesian,
    optimal_eat,
)
from eatsim.eatopt import latitude_grid, scan_thresholds, uniform_grid
from eatsim.link import db_to_linear, received_power

from conftest import STARLINK, oracle_elevations

DEFAULT_LINK = LinkBudget()
COARSE = EatSearchConfig(dt_s=5.0)


def brute_profile(user, constellation, eat, cfg, budget):
    times = cfg.sample_times(constellation)
    el, rng = oracle_elevations(geodetic_to_cartesian(user), constellation, times)
    counts, interference = [], []
    for row_el, row_rng in zip(el, rng):
        vis = np.flatnonzero(row_el >= eat)
        counts.append(len(vis))
        if len(vis):
            serving = vis[np.argmin(row_rng[vis])]
            others = vis[vis != serving]
            p = budget.interferer_activity * db_to_linear(received_power(budget, row_rng[others]))
            interference.append(float(np.sum(p)))
    return np.array(counts), np.array(interference)


def test_single_satellite_cannot_cover():
    c = Constellation.from_config(ConstellationConfig(1, 1, 53.0, 550.0, 0))
    prof = coverage_profile(GeodeticPosition(0.0, 0.0), c, 25.0, EatSearchConfig(), DEFAULT_LINK)
    assert prof.max_visible == 1
    assert prof.min_visible == 0
    assert 0.0 < prof.outage_fraction < 1.0


def test_starlink_profile_matches_recount(starlink):
    user = GeodeticPosition(0.0, 0.0)
    prof = coverage_profile(user, starlink, 25.0, COARSE, DEFAULT_LINK)
    counts, interference = brute_profile(user, starlink, 25.0, COARSE, DEFAULT_LINK)
    assert prof.min_visible >= 1
    assert prof.min_visible == counts.min() and prof.max_visible == counts.max()
    assert prof.mean_visible == pytest.approx(counts.mean(), rel=1e-12)
    assert prof.outage_fraction == 0.0
    assert prof.mean_interference_dbm == pytest.approx(10 * math.log10(interference.mean()), abs=1e-9)


def test_near_zenith_threshold_never_continuous(starlink):
    prof = coverage_profile(GeodeticPosition(20.0, 0.0), starlink, 89.9, COARSE, DEFAULT_LINK)
    assert prof.min_visible == 0
    assert prof.outage_fraction > 0.0


def test_empty_constellation_infeasible():
    empty = Constellation.from_ephemerides(STARLINK, [])
    res = optimal_eat(GeodeticPosition(10.0, 0.0), empty, EatSearchConfig(), DEFAULT_LINK)
    assert not res.feasible
    assert res.optimal_eat_deg is None


def test_full_reuse_matches_exhaustive_scan(starlink):
    cfg = EatSearchConfig(eat_step_deg=0.5, dt_s=5.0)
    user = GeodeticPosition(0.0, 0.0)
    res = optimal_eat(user, starlink, cfg, DEFAULT_LINK)
    el, _ = oracle_elevations(geodetic_to_cartesian(user), starlink, cfg.sample_times(starlink))
    feasible = [th for th in cfg.candidates() if (el >= th).sum(axis=1).min() >= 1]
    assert res.feasible
    assert res.optimal_eat_deg == max(feasible)
    assert res.profile_at_optimum.outage_fraction == 0.0
    assert res.profile_at_optimum.min_visible >= 1


def test_grid_refinement_bound(starlink):
    user = GeodeticPosition(12.0, 0.0)
    fine = optimal_eat(user, starlink, EatSearchConfig(eat_step_deg=0.1, dt_s=5.0), DEFAULT_LINK)
    coarse = optimal_eat(user, starlink, EatSearchConfig(eat_step_deg=0.5, dt_s=5.0), DEFAULT_LINK)
    assert 0.0 <= fine.optimal_eat_deg - coarse.optimal_eat_deg <= 0.5


def test_zero_interference_objective_same_rule(starlink):
    user = GeodeticPosition(7.0, 0.0)
    a = optimal_eat(user, starlink, COARSE, DEFAULT_LINK)
    b = optimal_eat(user, starlink, EatSearchConfig(dt_s=5.0, objective=Objective.ZERO_INTERFERENCE), DEFAULT_LINK)
    assert a.optimal_eat_deg == b.optimal_eat_deg


def test_weighted_objective(starlink):
    user = GeodeticPosition(7.0, 0.0)
    full = optimal_eat(user, starlink, COARSE, DEFAULT_LINK)
    heavy = optimal_eat(user, starlink, EatSearchConfig(dt_s=5.0, objective=Objective.WEIGHTED,
                                                         cci_weight=1e6), DEFAULT_LINK)
    assert heavy.optimal_eat_deg == full.optimal_eat_deg
    cfg = EatSearchConfig(dt_s=5.0, eat_step_deg=1.0, objective=Objective.WEIGHTED, cci_weight=0.0)
    res = optimal_eat(user, starlink, cfg, DEFAULT_LINK)
    scan = scan_thresholds(user, starlink, cfg.candidates(), cfg, DEFAULT_LINK)
    ok = scan.outage_fraction == 0.0
    best = scan.mean_interference_mw[ok].min()
    assert scan.mean_interference_mw[scan.index_of(res.optimal_eat_deg)] == best
    assert res.optimal_eat_deg == scan.thresholds[ok][scan.mean_interference_mw[ok] == best].max()


def test_feasibility_is_a_prefix(starlink):
    cfg = EatSearchConfig(dt_s=5.0)
    for lat in (0.0, 25.0, 52.0):
        scan = scan_thresholds(GeodeticPosition(lat, 0.0), starlink, cfg.candidates(), cfg, DEFAULT_LINK)
        feasible = scan.outage_fraction == 0.0
        assert not np.any(~feasible[:-1] & feasible[1:])
        assert np.all(np.diff(scan.min_visible) <= 0)
        assert np.all((scan.outage_fraction == 0.0) == (scan.min_visible >= 1))
        assert np.all(scan.min_visible <= scan.mean_visible) and np.all(scan.mean_visible <= scan.max_visible)


def test_infeasible_beyond_inclination(starlink):
    res = optimal_eat(GeodeticPosition(85.0, 0.0), starlink, COARSE, DEFAULT_LINK)
    assert not res.feasible and res.optimal_eat_deg is None and res.profile_at_optimum is None


def test_sweep_single_latitude_equals_optimal(starlink):
    rows = eat_latitude_sweep(15.0, 15.0, 0.5, 0.0, starlink, COARSE, DEFAULT_LINK, reference_eat_deg=25.0)
    direct = optimal_eat(GeodeticPosition(15.0, 0.0), starlink, COARSE, DEFAULT_LINK)
    assert len(rows) == 1
    assert rows[0].optimal_eat_deg == direct.optimal_eat_deg
    assert rows[0].profile_at_optimum == direct.profile_at_optimum
    assert rows[0].reference_profile == coverage_profile(GeodeticPosition(15.0, 0.0), starlink, 25.0, COARSE, DEFAULT_LINK)


def test_sweep_deterministic_and_parallel_safe(reduced_shell):
    a = eat_latitude_sweep(0.0, 10.0, 2.5, 0.0, reduced_shell, COARSE, DEFAULT_LINK, 25.0, threads=1)
    b = eat_latitude_sweep(0.0, 10.0, 2.5, 0.0, reduced_shell, COARSE, DEFAULT_LINK, 25.0, threads=3)
    assert a == b
    assert [r.user.lat_deg for r in a] == [0.0, 2.5, 5.0, 7.5, 10.0]


def test_latitude_grid_cardinality():
    assert len(latitude_grid(0.0, 60.0, 0.5)) == 121
    assert len(latitude_grid(0.0, 6.0, 0.5)) == 13
    assert len(uniform_grid(5.0, 60.0, 2.5)) == 23
    assert len(EatSearchConfig().candidates()) == 801
    assert 25.0 in EatSearchConfig().candidates()


def test_search_config_validation(starlink):
    with pytest.raises(ConfigError):
        EatSearchConfig(eat_min_deg=30, eat_max_deg=20).validate()
    with pytest.raises(ConfigError):
        EatSearchConfig(dt_s=0).validate()
    rotating = Constellation.from_config(ConstellationConfig(4, 4, 53.0, 550.0, 0, earth_rotation=True))
    with pytest.raises(ConfigError) as exc:
        optimal_eat(GeodeticPosition(0, 0), rotating, EatSearchConfig(), DEFAULT_LINK)
    assert exc.value.key == "window_s"
    res = optimal_eat(GeodeticPosition(0, 0), rotating, EatSearchConfig(window_s=600.0, dt_s=10.0), DEFAULT_LINK)
    assert isinstance(res.feasible, bool)


def test_default_window_is_one_period(starlink):
    times = EatSearchConfig().sample_times(starlink)
    assert times[0] == 0.0 and times[1] == 1.0
    assert times[-1] <= STARLINK.period_s < times[-1] + 1.0
