"""
Time-stepped downlink simulation of one device under closest-satellite handover.

Each step recomputes which satellites clear the device's elevation threshold,
refreshes the prepared (conditional handover) target, executes a handover when
the target is closer than the serving satellite by more than the hysteresis
margin or the serving satellite drops out of view, then judges every packet
scheduled in the step against the serving link's SINR. All other visible
satellites are co-channel interferers.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import partial
from enum import Enum
from typing import Sequence

import numpy as np

from eatsim._parallel import ordered_map
from eatsim.eatopt import EatResult, EatSearchConfig, latitude_grid, optimal_eat
from eatsim.errors import ConfigError
from eatsim.geometry import (
    GeodeticPosition,
    elevations_and_ranges,
    geodetic_to_cartesian,
    look_angles,
    user_position,
)
from eatsim.link import SINR_CAP_LINEAR, LinkBudget, db_to_linear, received_power
from eatsim.orbital import Constellation

_CHUNK_STEPS = 500
# ranges closer than this are ties; keeps float noise from flipping mirrored satellites
RANGE_TIE_KM = 1e-6


class UeState(str, Enum):
    IDLE = "idle"
    CONNECTED = "connected"
    OUTAGE = "outage"


@dataclass(frozen=True)
class TrafficConfig:
    rate_bps: float = 8.192e6
    packet_size_bits: int = 12288  # 1536 bytes
    duration_s: float = 200.0

    def validate(self) -> None:
        if not self.rate_bps > 0.0:
            raise ConfigError("rate_bps", "must be > 0")
        if not self.packet_size_bits > 0:
            raise ConfigError("packet_size_bits", "must be > 0")
        if not self.duration_s >= 0.0:
            raise ConfigError("duration_s", "must be >= 0")

    @property
    def packet_interval_s(self) -> float:
        return self.packet_size_bits / self.rate_bps

    @property
    def total_packets(self) -> int:
        return int(math.floor(self.duration_s * self.rate_bps / self.packet_size_bits + 1e-9))

    def packets_before(self, t: float) -> int:
        """Number of packets k with k * interval < t."""
        if t <= 0.0:
            return 0
        return min(self.total_packets, int(math.ceil(t / self.packet_interval_s - 1e-6)))


@dataclass(frozen=True)
class SimConfig:
    dt_s: float = 0.01
    ho_interruption_ms: float = 0.0
    hysteresis_km: float = 0.0
    jitter_ms: float = 0.0
    seed: int = 0

    def validate(self) -> None:
        if not self.dt_s > 0.0:
            raise ConfigError("dt_s", "must be > 0")
        if not self.ho_interruption_ms >= 0.0:
            raise ConfigError("ho_interruption_ms", "must be >= 0")
        if not self.hysteresis_km >= 0.0:
            raise ConfigError("hysteresis_km", "must be >= 0")
        if not self.jitter_ms >= 0.0:
            raise ConfigError("jitter_ms", "must be >= 0")
        if self.seed < 0:
            raise ConfigError("seed", "must be >= 0")


@dataclass(frozen=True)
class UeContext:
    position: GeodeticPosition
    eat_deg: float
    serving_sat: int | None = None
    prepared_target: int | None = None
    state: UeState = UeState.IDLE
    interrupted_until: float = -math.inf


@dataclass(frozen=True)
class HandoverEvent:
    t: float
    from_sat: int | None
    to_sat: int
    trigger_range_km: float

    @property
    def is_handover(self) -> bool:
        """False for an initial or post-outage attach."""
        return self.from_sat is not None


@dataclass(frozen=True)
class EventRecord:
    t: float
    event_type: str
    from_sat: int | None
    to_sat: int | None
    detail: str


@dataclass(frozen=True)
class StepReport:
    t: float
    state: UeState
    serving_sat: int | None
    visible_count: int
    sinr_db: float
    packets_scheduled: int
    packets_lost: int
    handover: HandoverEvent | None = None
    log: tuple[EventRecord, ...] = ()

    @property
    def packets_delivered(self) -> int:
        return self.packets_scheduled - self.packets_lost


@dataclass(frozen=True)
class SimResult:
    packets_sent: int
    packets_lost: int
    loss_rate: float
    handover_events: tuple[HandoverEvent, ...]
    outage_time_s: float
    mean_sinr_db: float
    events: tuple[EventRecord, ...] = field(default=(), repr=False)

    @property
    def packets_delivered(self) -> int:
        return self.packets_sent - self.packets_lost

    @property
    def handover_count(self) -> int:
        return sum(1 for e in self.handover_events if e.is_handover)


def _closest(ids: np.ndarray, rng: np.ndarray, candidates: np.ndarray) -> int | None:
    """Index (into the constellation arrays) of the closest candidate, lowest id on ties."""
    if len(candidates) == 0:
        return None
    r = rng[candidates]
    tied = candidates[r <= r.min() + RANGE_TIE_KM]
    return int(tied[np.argmin(ids[tied])])


def csho_select(user_xyz: np.ndarray, visible: set[int], ephemerides: Constellation,
                t: float) -> int | None:
    """Closest visible satellite at time t; ``None`` when nothing is visible."""
    if not visible:
        return None
    ids = ephemerides.sat_ids
    cand = np.flatnonzero(np.isin(ids, sorted(visible)))
    _, rng = elevations_and_ranges(np.asarray(user_xyz, dtype=float), ephemerides.positions(t))
    k = _closest(ids, rng, cand)
    return None if k is None else int(ids[k])


def _advance(ctx: UeContext, t: float, ids: np.ndarray, index_of: dict[int, int], el: np.ndarray,
             rng: np.ndarray, power_mw: np.ndarray, noise_mw: float, link_budget: LinkBudget,
             traffic: TrafficConfig, sim_cfg: SimConfig, scheduled: int) -> tuple[UeContext, StepReport]:
    """One state-machine step given this step's elevations, ranges and received powers."""
    visible = np.flatnonzero(el >= ctx.eat_deg)
    log: list[EventRecord] = []

    if len(visible) == 0:
        if ctx.state is UeState.CONNECTED:
            log.append(EventRecord(t, "outage_start", ctx.serving_sat, None, "no satellite above threshold"))
        new = replace(ctx, serving_sat=None, prepared_target=None, state=UeState.OUTAGE)
        return new, StepReport(t, UeState.OUTAGE, None, 0, math.nan, scheduled, scheduled, None, tuple(log))

    serving = index_of.get(ctx.serving_sat) if ctx.state is UeState.CONNECTED else None
    serving_visible = serving is not None and el[serving] >= ctx.eat_deg
    others = visible[visible != serving] if serving_visible else visible
    prepared = _closest(ids, rng, others)

    handover: HandoverEvent | None = None
    interrupted_until = ctx.interrupted_until
    if not serving_visible:
        target = _closest(ids, rng, visible)
        from_sat = ctx.serving_sat if ctx.state is UeState.CONNECTED else None
        handover = HandoverEvent(t, from_sat, int(ids[target]), float(rng[target]))
        if ctx.state is UeState.OUTAGE:
            log.append(EventRecord(t, "outage_end", None, int(ids[target]), ""))
        serving = target
    elif prepared is not None and rng[prepared] < rng[serving] - sim_cfg.hysteresis_km - RANGE_TIE_KM:
        handover = HandoverEvent(t, int(ids[serving]), int(ids[prepared]), float(rng[prepared]))
        serving = prepared

    if handover is not None:
        kind = "handover" if handover.is_handover else "attach"
        log.append(EventRecord(t, kind, handover.from_sat, handover.to_sat,
                               f"range_km={handover.trigger_range_km:.6g}"))
        if handover.is_handover and sim_cfg.ho_interruption_ms > 0.0:
            interrupted_until = t + sim_cfg.ho_interruption_ms / 1000.0
        others = visible[visible != serving]
        prepared = _closest(ids, rng, others)

    activity = link_budget.interferer_activity
    interference = activity * float(power_mw[others].sum()) if len(others) and activity > 0.0 else 0.0
    denom = interference + noise_mw
    ratio = min(power_mw[serving] / denom, SINR_CAP_LINEAR) if denom > 0.0 else SINR_CAP_LINEAR
    sinr_db = 10.0 * math.log10(ratio)
    delivered = link_budget.bandwidth_hz * math.log2(1.0 + ratio) >= traffic.rate_bps
    lost = 0 if delivered and t >= interrupted_until - 1e-9 else scheduled

    new = UeContext(ctx.position, ctx.eat_deg, int(ids[serving]),
                    None if prepared is None else int(ids[prepared]), UeState.CONNECTED, interrupted_until)
    return new, StepReport(t, UeState.CONNECTED, new.serving_sat, len(visible), sinr_db,
                           scheduled, lost, handover, tuple(log))


def _received_mw(link_budget: LinkBudget, rng: np.ndarray) -> np.ndarray:
    return db_to_linear(received_power(link_budget, rng))


def step(state: UeContext, t: float, dt: float, constellation: Constellation, link_budget: LinkBudget,
         traffic: TrafficConfig, sim_cfg: SimConfig | None = None,
         scheduled: int | None = None) -> tuple[UeContext, StepReport]:
    """Advance one device by one step starting at t.

    ``scheduled`` overrides the number of packets falling in ``[t, t+dt)``;
    by default it comes from the deterministic packet schedule.
    """
    if not dt > 0.0:
        raise ConfigError("dt_s", "must be > 0")
    sim_cfg = sim_cfg or SimConfig()
    if scheduled is None:
        scheduled = traffic.packets_before(t + dt) - traffic.packets_before(t)
    user0 = geodetic_to_cartesian(state.position, constellation.config.earth_radius_km)
    u = user_position(user0, t, constellation.config.earth_rotation)
    ids = constellation.sat_ids
    if len(constellation) == 0:
        el = rng = np.zeros(0)
    else:
        el, rng = look_angles(u, constellation, t)
    index_of = {int(s): i for i, s in enumerate(ids)}
    noise_mw = float(db_to_linear(link_budget.noise_dbm))
    return _advance(state, t, ids, index_of, el, rng, _received_mw(link_budget, rng), noise_mw,
                    link_budget, traffic, sim_cfg, scheduled)


def packet_schedule(traffic: TrafficConfig, sim_cfg: SimConfig, n_steps: int) -> np.ndarray:
    """Packets falling in each step. Jitter, when enabled, is seeded and uniform."""
    dt = sim_cfg.dt_s
    if sim_cfg.jitter_ms <= 0.0:
        edges = [traffic.packets_before(i * dt) for i in range(n_steps + 1)]
        edges[-1] = traffic.total_packets
        return np.diff(np.array(edges, dtype=np.int64))
    rng = np.random.default_rng(sim_cfg.seed)
    times = traffic.packet_interval_s * np.arange(traffic.total_packets)
    times = times + rng.uniform(-1.0, 1.0, len(times)) * sim_cfg.jitter_ms / 1000.0
    times = np.clip(times, 0.0, np.nextafter(traffic.duration_s, 0.0))
    idx = np.minimum(np.floor(times / dt + 1e-9).astype(np.int64), max(n_steps - 1, 0))
    return np.bincount(idx, minlength=n_steps).astype(np.int64)


def _validate_all(constellation: Constellation, link_budget: LinkBudget, traffic: TrafficConfig,
                  sim_cfg: SimConfig, eats: Sequence[float]) -> None:
    constellation.config.validate()
    link_budget.validate()
    traffic.validate()
    sim_cfg.validate()
    for e in eats:
        if not 0.0 <= e < 90.0:
            raise ConfigError("eat_deg", "must lie in [0, 90)")


def run_scenarios(user: GeodeticPosition, eats: Sequence[float], constellation: Constellation,
                  link_budget: LinkBudget, traffic: TrafficConfig,
                  sim_cfg: SimConfig | None = None) -> list[SimResult]:
    """Simulate the same device and traffic under several thresholds.

    Runs are independent; they only share the per-step satellite geometry.
    """
    sim_cfg = sim_cfg or SimConfig()
    _validate_all(constellation, link_budget, traffic, sim_cfg, eats)
    user.validate()
    dt = sim_cfg.dt_s
    duration = traffic.duration_s
    n_steps = int(math.ceil(duration / dt - 1e-9)) if duration > 0 else 0
    schedule = packet_schedule(traffic, sim_cfg, n_steps)

    ids = constellation.sat_ids
    index_of = {int(s): i for i, s in enumerate(ids)}
    user0 = geodetic_to_cartesian(user, constellation.config.earth_radius_km)
    noise_mw = float(db_to_linear(link_budget.noise_dbm))
    contexts = [UeContext(user, float(e)) for e in eats]
    lost = [0] * len(eats)
    outage = [0.0] * len(eats)
    sinrs: list[list[float]] = [[] for _ in eats]
    handovers: list[list[HandoverEvent]] = [[] for _ in eats]
    logs: list[list[EventRecord]] = [[] for _ in eats]

    for lo in range(0, n_steps, _CHUNK_STEPS):
        hi = min(n_steps, lo + _CHUNK_STEPS)
        t = dt * np.arange(lo, hi)
        if len(constellation):
            users = user_position(user0, t, constellation.config.earth_rotation)
            el, rng = look_angles(users, constellation, t)
        else:
            el = rng = np.zeros((hi - lo, 0))
        power = _received_mw(link_budget, rng)
        for row, i in enumerate(range(lo, hi)):
            ti = float(t[row])
            width = min(dt, duration - ti)
            for r, ctx in enumerate(contexts):
                ctx, rep = _advance(ctx, ti, ids, index_of, el[row], rng[row], power[row], noise_mw,
                                    link_budget, traffic, sim_cfg, int(schedule[i]))
                contexts[r] = ctx
                lost[r] += rep.packets_lost
                if rep.state is UeState.OUTAGE:
                    outage[r] += width
                else:
                    sinrs[r].append(rep.sinr_db)
                if rep.handover is not None:
                    handovers[r].append(rep.handover)
                logs[r].extend(rep.log)

    sent = traffic.total_packets
    results = []
    for r in range(len(eats)):
        results.append(SimResult(
            packets_sent=sent,
            packets_lost=lost[r],
            loss_rate=lost[r] / sent if sent else 0.0,
            handover_events=tuple(handovers[r]),
            outage_time_s=min(outage[r], duration),
            mean_sinr_db=float(np.mean(sinrs[r])) if sinrs[r] else math.nan,
            events=tuple(logs[r]),
        ))
    return results


def run_scenario(user: GeodeticPosition, eat_deg: float, constellation: Constellation,
                 link_budget: LinkBudget, traffic: TrafficConfig,
                 sim_cfg: SimConfig | None = None) -> SimResult:
    return run_scenarios(user, [eat_deg], constellation, link_budget, traffic, sim_cfg)[0]


@dataclass(frozen=True)
class ComparisonRow:
    lat_deg: float
    lon_deg: float
    fixed_eat_deg: float
    fixed: SimResult
    optimum: EatResult
    optimal: SimResult | None


def _compare_row(lat: float, lon_deg: float, fixed_eat_deg: float, constellation: Constellation,
                 search_cfg: EatSearchConfig, link_budget: LinkBudget, traffic: TrafficConfig,
                 sim_cfg: SimConfig) -> ComparisonRow:
    user = GeodeticPosition(lat, lon_deg)
    opt = optimal_eat(user, constellation, search_cfg, link_budget)
    eats = [fixed_eat_deg, opt.optimal_eat_deg] if opt.feasible else [fixed_eat_deg]
    sims = run_scenarios(user, eats, constellation, link_budget, traffic, sim_cfg)
    return ComparisonRow(lat, lon_deg, fixed_eat_deg, sims[0], opt, sims[1] if opt.feasible else None)


def compare_fixed_vs_optimal(lat_min: float, lat_max: float, lat_step: float, lon_deg: float,
                             fixed_eat_deg: float, constellation: Constellation,
                             search_cfg: EatSearchConfig, link_budget: LinkBudget, traffic: TrafficConfig,
                             sim_cfg: SimConfig | None = None, threads: int = 1) -> list[ComparisonRow]:
    """Fixed-threshold baseline against the optimised threshold, one row per latitude.

    Both runs at a latitude share traffic, seed and geometry; only the
    threshold differs.
    """
    run = partial(_compare_row, lon_deg=lon_deg, fixed_eat_deg=fixed_eat_deg, constellation=constellation,
                  search_cfg=search_cfg, link_budget=link_budget, traffic=traffic,
                  sim_cfg=sim_cfg or SimConfig())
    return ordered_map(run, [float(x) for x in latitude_grid(lat_min, lat_max, lat_step)], threads)
