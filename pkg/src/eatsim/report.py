"""CSV emission with a fixed, reproducible number format."""
from __future__ import annotations

import math
from pathlib import Path
from typing import Iterable, Sequence

from eatsim.eatopt import EatResult
from eatsim.simnet import ComparisonRow, EventRecord, SimResult

EAT_SWEEP_HEADER = ("lat_deg", "optimal_eat_deg", "feasible", "min_visible_opt", "mean_visible_opt",
                    "min_visible_fixed", "mean_visible_fixed", "mean_interference_dbm")
LOSS_COMPARE_HEADER = ("lat_deg", "fixed_eat_deg", "fixed_loss_rate", "optimal_eat_deg", "optimal_loss_rate",
                       "ho_count_fixed", "ho_count_optimal")
U_CURVE_HEADER = ("location", "lat_deg", "lon_deg", "eat_deg", "loss_rate", "predicted_optimal_eat_deg")
RUN_HEADER = ("lat_deg", "lon_deg", "eat_deg", "packets_sent", "packets_lost", "loss_rate",
              "handover_count", "outage_time_s", "mean_sinr_db")
EVENTS_HEADER = ("t_s", "event_type", "from_sat", "to_sat", "detail")


def fmt(value) -> str:
    """Six significant digits for reals; empty for absent values."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    value = float(value)
    if math.isnan(value):
        return "nan"
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    text = f"{value:.6g}"
    return "0" if text == "-0" else text


def render(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    lines = [",".join(header)]
    lines.extend(",".join(fmt(v) if not isinstance(v, str) else v for v in row) for row in rows)
    return "\n".join(lines) + "\n"


def write_csv(path: str | Path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(render(header, rows))


def eat_sweep_rows(results: Sequence[EatResult]) -> list[tuple]:
    rows = []
    for r in results:
        opt, ref = r.profile_at_optimum, r.reference_profile
        rows.append((
            r.user.lat_deg, r.optimal_eat_deg, r.feasible,
            None if opt is None else opt.min_visible,
            None if opt is None else opt.mean_visible,
            None if ref is None else ref.min_visible,
            None if ref is None else ref.mean_visible,
            None if opt is None else opt.mean_interference_dbm,
        ))
    return rows


def loss_compare_rows(rows: Sequence[ComparisonRow]) -> list[tuple]:
    out = []
    for r in rows:
        out.append((
            r.lat_deg, r.fixed_eat_deg, r.fixed.loss_rate, r.optimum.optimal_eat_deg,
            None if r.optimal is None else r.optimal.loss_rate,
            r.fixed.handover_count,
            None if r.optimal is None else r.optimal.handover_count,
        ))
    return out


def run_rows(lat: float, lon: float, eat: float, res: SimResult) -> list[tuple]:
    return [(lat, lon, eat, res.packets_sent, res.packets_lost, res.loss_rate, res.handover_count,
             res.outage_time_s, res.mean_sinr_db)]


def event_rows(events: Sequence[EventRecord]) -> list[tuple]:
    return [(e.t, e.event_type, e.from_sat, e.to_sat, e.detail) for e in events]
