"""
Command-line experiment drivers.

    eatsim eat-sweep    --config cfg --out eat_sweep.csv
    eatsim loss-compare --config cfg --out loss_compare.csv
    eatsim u-curve      --config cfg --out u_curve.csv
    eatsim run          --config cfg --out run.csv    # also writes events.csv beside it
    eatsim --print-defaults

Exit status is 0 on success, 1 for an unreadable or invalid config and 2 when
a run fails.
"""
from __future__ import annotations

import argparse
import dataclasses
import logging
import sys
from functools import partial
from pathlib import Path

from eatsim._parallel import ordered_map
from eatsim.config import ConfigParseError, Location, ScenarioFile, format_defaults, parse_config
from eatsim.eatopt import eat_latitude_sweep, optimal_eat, uniform_grid
from eatsim.errors import ConfigError
from eatsim.geometry import GeodeticPosition
from eatsim.orbital import Constellation
from eatsim import report
from eatsim.simnet import compare_fixed_vs_optimal, run_scenario, run_scenarios

log = logging.getLogger("eatsim")

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2


def cmd_eat_sweep(cfg: ScenarioFile, out_path: Path, threads: int = 1) -> int:
    ex = cfg.experiment
    results = eat_latitude_sweep(ex.sweep_lat_min_deg, ex.sweep_lat_max_deg, ex.sweep_lat_step_deg, ex.lon_deg,
                                 Constellation.from_config(cfg.constellation), cfg.search, cfg.link,
                                 reference_eat_deg=ex.reference_eat_deg, threads=threads)
    report.write_csv(out_path, report.EAT_SWEEP_HEADER, report.eat_sweep_rows(results))
    return EXIT_OK


def cmd_loss_compare(cfg: ScenarioFile, out_path: Path, threads: int = 1) -> int:
    ex = cfg.experiment
    rows = compare_fixed_vs_optimal(ex.compare_lat_min_deg, ex.compare_lat_max_deg, ex.compare_lat_step_deg,
                                    ex.lon_deg, ex.reference_eat_deg, Constellation.from_config(cfg.constellation),
                                    cfg.search, cfg.link, cfg.traffic, cfg.sim, threads=threads)
    report.write_csv(out_path, report.LOSS_COMPARE_HEADER, report.loss_compare_rows(rows))
    return EXIT_OK


def _u_curve_location(loc: Location, cfg: ScenarioFile, constellation: Constellation) -> list[tuple]:
    ex = cfg.experiment
    user = GeodeticPosition(loc.lat_deg, loc.lon_deg)
    predicted = optimal_eat(user, constellation, cfg.search, cfg.link).optimal_eat_deg
    eats = [float(e) for e in uniform_grid(ex.ucurve_eat_min_deg, ex.ucurve_eat_max_deg, ex.ucurve_eat_step_deg)]
    sims = run_scenarios(user, eats, constellation, cfg.link, cfg.traffic, cfg.sim)
    return [(loc.name, loc.lat_deg, loc.lon_deg, eat, res.loss_rate, predicted) for eat, res in zip(eats, sims)]


def cmd_u_curve(cfg: ScenarioFile, out_path: Path, threads: int = 1) -> int:
    constellation = Constellation.from_config(cfg.constellation)
    per_loc = ordered_map(partial(_u_curve_location, cfg=cfg, constellation=constellation),
                          cfg.experiment.ucurve_locations, threads)
    report.write_csv(out_path, report.U_CURVE_HEADER, [row for rows in per_loc for row in rows])
    return EXIT_OK


def cmd_run(cfg: ScenarioFile, out_path: Path, threads: int = 1) -> int:
    ex = cfg.experiment
    user = GeodeticPosition(ex.run_lat_deg, ex.run_lon_deg)
    res = run_scenario(user, ex.run_eat_deg, Constellation.from_config(cfg.constellation),
                       cfg.link, cfg.traffic, cfg.sim)
    report.write_csv(out_path, report.RUN_HEADER, report.run_rows(user.lat_deg, user.lon_deg, ex.run_eat_deg, res))
    report.write_csv(Path(out_path).parent / "events.csv", report.EVENTS_HEADER, report.event_rows(res.events))
    return EXIT_OK


COMMANDS = {
    "eat-sweep": cmd_eat_sweep,
    "loss-compare": cmd_loss_compare,
    "u-curve": cmd_u_curve,
    "run": cmd_run,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="eatsim", description=__doc__.split("\n\n")[0].strip())
    parser.add_argument("command", nargs="?", choices=sorted(COMMANDS))
    parser.add_argument("--config", type=Path, help="scenario file")
    parser.add_argument("--out", type=Path, help="output CSV path")
    parser.add_argument("--print-defaults", action="store_true", help="print every default and exit")
    parser.add_argument("--threads", type=int, default=1, help="parallel workers for independent rows")
    parser.add_argument("--seed", type=int, default=None, help="override sim.seed")
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s", stream=sys.stderr)
    if args.print_defaults:
        sys.stdout.write(format_defaults())
        return EXIT_OK
    if args.command is None or args.config is None or args.out is None:
        parser.print_usage(sys.stderr)
        print("eatsim: a command, --config and --out are required", file=sys.stderr)
        return EXIT_CONFIG
    if args.threads < 1:
        print("eatsim: --threads must be >= 1", file=sys.stderr)
        return EXIT_CONFIG

    try:
        cfg = parse_config(args.config)
        if args.seed is not None:
            if args.seed < 0:
                raise ConfigError("sim.seed", "must be >= 0")
            cfg = dataclasses.replace(cfg, sim=dataclasses.replace(cfg.sim, seed=args.seed))
    except OSError as exc:
        print(f"eatsim: cannot read config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ConfigParseError as exc:
        print(f"eatsim: parse error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ConfigError as exc:
        print(f"eatsim: invalid config: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    log.info("running %s with %s", args.command, args.config)
    try:
        return COMMANDS[args.command](cfg, args.out, threads=args.threads)
    except ConfigError as exc:
        print(f"eatsim: invalid config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # surfaced as a runtime failure, never in the CSV
        print(f"eatsim: {args.command} failed: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
