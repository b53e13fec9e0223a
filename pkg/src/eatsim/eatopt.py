"""
Elevation-angle-threshold (EAT) search.

Every candidate threshold is scored from one pass over the sampled geometry:
per time sample, each satellite's elevation is binned against the sorted
candidate grid, so the visible count and the co-channel interference at every
candidate fall out of reverse cumulative sums. A candidate is feasible when no
sample in the window is left without a visible satellite.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import partial
from enum import Enum
from typing import Sequence

import numpy as np

from eatsim._parallel import ordered_map
from eatsim.errors import ConfigError
from eatsim.geometry import GeodeticPosition, geodetic_to_cartesian, look_angles, user_position
from eatsim.link import LinkBudget, db_to_linear, linear_to_db, received_power
from eatsim.orbital import Constellation

_CHUNK_SAMPLES = 256


class Objective(str, Enum):
    FULL_REUSE = "full_reuse"
    ZERO_INTERFERENCE = "zero_interference"
    WEIGHTED = "weighted"


@dataclass(frozen=True)
class EatSearchConfig:
    eat_min_deg: float = 5.0
    eat_max_deg: float = 85.0
    eat_step_deg: float = 0.1
    window_s: float | None = None  # None: one orbital period
    dt_s: float = 1.0
    objective: Objective = Objective.FULL_REUSE
    cci_weight: float = 0.0

    def validate(self) -> None:
        if not self.eat_min_deg < self.eat_max_deg:
            raise ConfigError("eat_min_deg", "must be < eat_max_deg")
        if not (0.0 <= self.eat_min_deg and self.eat_max_deg < 90.0):
            raise ConfigError("eat_max_deg", "candidates must lie in [0, 90)")
        if not self.eat_step_deg > 0.0:
            raise ConfigError("eat_step_deg", "must be > 0")
        if not self.dt_s > 0.0:
            raise ConfigError("dt_s", "must be > 0")
        if self.window_s is not None and not self.window_s >= self.dt_s:
            raise ConfigError("window_s", "must be >= dt_s")

    def candidates(self) -> np.ndarray:
        return uniform_grid(self.eat_min_deg, self.eat_max_deg, self.eat_step_deg)

    def resolved_window(self, constellation: Constellation) -> float:
        if self.window_s is not None:
            return self.window_s
        if constellation.config.earth_rotation:
            raise ConfigError("window_s", "must be set explicitly when earth_rotation is on")
        return constellation.config.period_s

    def sample_times(self, constellation: Constellation) -> np.ndarray:
        window = self.resolved_window(constellation)
        n = int(math.floor(window / self.dt_s + 1e-9)) + 1
        return self.dt_s * np.arange(n)


@dataclass(frozen=True)
class CoverageProfile:
    eat_deg: float
    min_visible: int
    max_visible: int
    mean_visible: float
    outage_fraction: float
    mean_interference_dbm: float


@dataclass(frozen=True)
class EatResult:
    user: GeodeticPosition
    optimal_eat_deg: float | None
    profile_at_optimum: CoverageProfile | None
    feasible: bool
    reference_profile: CoverageProfile | None = None


def uniform_grid(start: float, stop: float, step: float) -> np.ndarray:
    """Inclusive grid ``start, start+step, ... <= stop`` rounded to 1e-9."""
    if not step > 0.0:
        raise ConfigError("step", "must be > 0")
    if stop < start:
        return np.zeros(0)
    n = int(math.floor((stop - start) / step + 1e-9)) + 1
    return np.round(start + step * np.arange(n), 9)


@dataclass(frozen=True)
class CandidateScan:
    """Coverage and interference statistics for a sorted set of thresholds."""

    thresholds: np.ndarray
    min_visible: np.ndarray
    max_visible: np.ndarray
    mean_visible: np.ndarray
    outage_fraction: np.ndarray
    mean_interference_mw: np.ndarray

    def profile(self, k: int) -> CoverageProfile:
        return CoverageProfile(
            eat_deg=float(self.thresholds[k]),
            min_visible=int(self.min_visible[k]),
            max_visible=int(self.max_visible[k]),
            mean_visible=float(self.mean_visible[k]),
            outage_fraction=float(self.outage_fraction[k]),
            mean_interference_dbm=float(linear_to_db(self.mean_interference_mw[k])),
        )

    def index_of(self, eat_deg: float) -> int:
        k = int(np.searchsorted(self.thresholds, eat_deg))
        if k >= len(self.thresholds) or self.thresholds[k] != eat_deg:
            raise KeyError(eat_deg)
        return k


def scan_thresholds(user: GeodeticPosition, constellation: Constellation, thresholds: Sequence[float],
                    search_cfg: EatSearchConfig, link_budget: LinkBudget) -> CandidateScan:
    """Score each threshold over the search window.

    At each sample the serving satellite is the closest visible one (the
    closest satellite is also the highest, so it is visible at every
    threshold where anything is) and interference is the activity-weighted
    linear sum over the other visible satellites.
    """
    th = np.asarray(thresholds, dtype=float)
    if th.ndim != 1 or np.any(np.diff(th) <= 0.0):
        raise ValueError("thresholds must be strictly increasing")
    G = len(th)
    times = search_cfg.sample_times(constellation)
    n_samples = len(times)
    user0 = geodetic_to_cartesian(user, constellation.config.earth_radius_km)

    min_vis = np.full(G, np.iinfo(np.int64).max, dtype=np.int64)
    max_vis = np.zeros(G, dtype=np.int64)
    sum_vis = np.zeros(G, dtype=np.int64)
    outages = np.zeros(G, dtype=np.int64)
    covered = np.zeros(G, dtype=np.int64)
    sum_int = np.zeros(G)

    N = len(constellation)
    if N == 0:
        zeros = np.zeros(G, dtype=np.int64)
        return CandidateScan(th, zeros, zeros, np.zeros(G), np.ones(G), np.zeros(G))

    activity = link_budget.interferer_activity
    for lo in range(0, n_samples, _CHUNK_SAMPLES):
        t = times[lo:lo + _CHUNK_SAMPLES]
        Tc = len(t)
        users = user_position(user0, t, constellation.config.earth_rotation)
        el, rng = look_angles(users, constellation, t)
        # bin b: satellite is visible at threshold k iff k < b
        bins = np.searchsorted(th, el, side="right")
        flat = (np.arange(Tc)[:, None] * (G + 1) + bins).ravel()
        hist = np.bincount(flat, minlength=Tc * (G + 1)).reshape(Tc, G + 1)
        counts = np.cumsum(hist[:, ::-1], axis=1)[:, ::-1][:, 1:]

        power = activity * db_to_linear(received_power(link_budget, rng))
        serving = np.argmin(np.where(bins > 0, rng, np.inf), axis=1)
        power[np.arange(Tc), serving] = 0.0
        phist = np.bincount(flat, weights=power.ravel(), minlength=Tc * (G + 1)).reshape(Tc, G + 1)
        interference = np.cumsum(phist[:, ::-1], axis=1)[:, ::-1][:, 1:]

        has = counts >= 1
        min_vis = np.minimum(min_vis, counts.min(axis=0))
        max_vis = np.maximum(max_vis, counts.max(axis=0))
        sum_vis += counts.sum(axis=0)
        outages += (~has).sum(axis=0)
        covered += has.sum(axis=0)
        sum_int += np.where(has, interference, 0.0).sum(axis=0)

    with np.errstate(invalid="ignore", divide="ignore"):
        mean_int = np.where(covered > 0, sum_int / np.maximum(covered, 1), 0.0)
    return CandidateScan(
        thresholds=th,
        min_visible=min_vis,
        max_visible=max_vis,
        mean_visible=sum_vis / n_samples,
        outage_fraction=outages / n_samples,
        mean_interference_mw=mean_int,
    )


def coverage_profile(user: GeodeticPosition, constellation: Constellation, eat_deg: float,
                     search_cfg: EatSearchConfig, link_budget: LinkBudget) -> CoverageProfile:
    search_cfg.validate()
    return scan_thresholds(user, constellation, [eat_deg], search_cfg, link_budget).profile(0)


def _select(scan: CandidateScan, candidate_idx: np.ndarray, search_cfg: EatSearchConfig) -> int | None:
    feasible = candidate_idx[scan.outage_fraction[candidate_idx] == 0.0]
    if len(feasible) == 0:
        return None
    if search_cfg.objective in (Objective.FULL_REUSE, Objective.ZERO_INTERFERENCE):
        return int(feasible[-1])
    theta = scan.thresholds[feasible]
    span = search_cfg.eat_max_deg - search_cfg.eat_min_deg
    score = -scan.mean_interference_mw[feasible] + search_cfg.cci_weight * (theta - search_cfg.eat_min_deg) / span
    best = np.flatnonzero(score == score.max())
    return int(feasible[best[-1]])


def _optimize(user: GeodeticPosition, constellation: Constellation, search_cfg: EatSearchConfig,
              link_budget: LinkBudget, reference_eat_deg: float | None) -> EatResult:
    grid = search_cfg.candidates()
    thresholds = grid if reference_eat_deg is None else np.union1d(grid, [reference_eat_deg])
    scan = scan_thresholds(user, constellation, thresholds, search_cfg, link_budget)
    candidate_idx = np.searchsorted(scan.thresholds, grid)
    k = _select(scan, candidate_idx, search_cfg)
    ref = None if reference_eat_deg is None else scan.profile(scan.index_of(reference_eat_deg))
    if k is None:
        return EatResult(user, None, None, False, ref)
    return EatResult(user, float(scan.thresholds[k]), scan.profile(k), True, ref)


def optimal_eat(user: GeodeticPosition, constellation: Constellation, search_cfg: EatSearchConfig,
                link_budget: LinkBudget) -> EatResult:
    """Best feasible threshold on the candidate grid, or an infeasible result.

    FULL_REUSE and ZERO_INTERFERENCE both return the largest threshold that
    keeps every sample covered. WEIGHTED maximises
    ``-mean_interference_mw + cci_weight * normalised_threshold`` over the
    feasible candidates, preferring the larger threshold on ties.
    """
    search_cfg.validate()
    link_budget.validate()
    return _optimize(user, constellation, search_cfg, link_budget, None)


def latitude_grid(lat_min: float, lat_max: float, lat_step: float) -> np.ndarray:
    if not lat_step > 0.0:
        raise ConfigError("lat_step_deg", "must be > 0")
    return uniform_grid(lat_min, lat_max, lat_step)


def eat_latitude_sweep(lat_min: float, lat_max: float, lat_step: float, lon_deg: float,
                       constellation: Constellation, search_cfg: EatSearchConfig, link_budget: LinkBudget,
                       reference_eat_deg: float | None = None, threads: int = 1) -> list[EatResult]:
    """One optimisation per latitude, ascending; rows also carry the reference-EAT profile."""
    search_cfg.validate()
    link_budget.validate()
    users = [GeodeticPosition(float(lat), lon_deg) for lat in latitude_grid(lat_min, lat_max, lat_step)]
    run = partial(_optimize, constellation=constellation, search_cfg=search_cfg,
                  link_budget=link_budget, reference_eat_deg=reference_eat_deg)
    return ordered_map(run, users, threads)
