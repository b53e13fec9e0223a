"""
Scenario files: INI-style ``[section]`` / ``key = value`` text.

Every key is checked against the typed config it feeds before anything runs;
unknown sections and keys are errors. Booleans are ``on``/``off``.
"""
from __future__ import annotations

import configparser
import dataclasses
import typing
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from eatsim.eatopt import EatSearchConfig, Objective
from eatsim.errors import ConfigError
from eatsim.link import LinkBudget
from eatsim.orbital import ConstellationConfig
from eatsim.simnet import SimConfig, TrafficConfig


class ConfigParseError(ValueError):
    def __init__(self, lineno: int | None, message: str):
        where = f"line {lineno}: " if lineno is not None else ""
        super().__init__(f"{where}{message}")
        self.lineno = lineno


@dataclass(frozen=True)
class Location:
    name: str
    lat_deg: float
    lon_deg: float


REFERENCE_LOCATIONS = (
    Location("Victoria", -4.3, 55.27),
    Location("Shanghai", 31.23, 121.47),
    # printed as "-123.06E"; read as 123.06 W
    Location("Vancouver", 49.13, -123.06),
)


@dataclass(frozen=True)
class ExperimentConfig:
    lon_deg: float = 0.0
    reference_eat_deg: float = 25.0
    sweep_lat_min_deg: float = 0.0
    sweep_lat_max_deg: float = 60.0
    sweep_lat_step_deg: float = 0.5
    compare_lat_min_deg: float = 0.0
    compare_lat_max_deg: float = 6.0
    compare_lat_step_deg: float = 0.5
    ucurve_eat_min_deg: float = 5.0
    ucurve_eat_max_deg: float = 60.0
    ucurve_eat_step_deg: float = 2.5
    ucurve_locations: tuple[Location, ...] = REFERENCE_LOCATIONS
    run_lat_deg: float = 0.0
    run_lon_deg: float = 0.0
    run_eat_deg: float = 25.0

    def validate(self) -> None:
        for key in ("sweep_lat_step_deg", "compare_lat_step_deg", "ucurve_eat_step_deg"):
            if not getattr(self, key) > 0.0:
                raise ConfigError(key, "must be > 0")
        for key in ("sweep_lat_min_deg", "sweep_lat_max_deg", "compare_lat_min_deg",
                    "compare_lat_max_deg", "run_lat_deg"):
            if not -90.0 <= getattr(self, key) <= 90.0:
                raise ConfigError(key, "must lie in [-90, 90]")
        for key in ("lon_deg", "run_lon_deg"):
            if not -180.0 <= getattr(self, key) < 180.0:
                raise ConfigError(key, "must lie in [-180, 180)")
        for key in ("reference_eat_deg", "ucurve_eat_min_deg", "ucurve_eat_max_deg", "run_eat_deg"):
            if not 0.0 <= getattr(self, key) < 90.0:
                raise ConfigError(key, "must lie in [0, 90)")
        for loc in self.ucurve_locations:
            if not -90.0 <= loc.lat_deg <= 90.0 or not -180.0 <= loc.lon_deg < 180.0:
                raise ConfigError("ucurve_locations", f"{loc.name}: coordinates out of range")


@dataclass(frozen=True)
class ScenarioFile:
    constellation: ConstellationConfig
    link: LinkBudget = field(default_factory=LinkBudget)
    search: EatSearchConfig = field(default_factory=EatSearchConfig)
    traffic: TrafficConfig = field(default_factory=TrafficConfig)
    sim: SimConfig = field(default_factory=SimConfig)
    experiment: ExperimentConfig = field(default_factory=ExperimentConfig)


SECTIONS: dict[str, type] = {
    "constellation": ConstellationConfig,
    "link": LinkBudget,
    "search": EatSearchConfig,
    "traffic": TrafficConfig,
    "sim": SimConfig,
    "experiment": ExperimentConfig,
}


def _parse_bool(text: str) -> bool:
    if text == "on":
        return True
    if text == "off":
        return False
    raise ValueError("expected on or off")


def _parse_locations(text: str) -> tuple[Location, ...]:
    locs = []
    for entry in filter(None, (e.strip() for e in text.split(";"))):
        parts = [p.strip() for p in entry.split(":")]
        if len(parts) != 3 or not parts[0] or "," in parts[0]:
            raise ValueError(f"expected name:lat:lon, got {entry!r}")
        locs.append(Location(parts[0], float(parts[1]), float(parts[2])))
    return tuple(locs)


def _format_locations(locs: tuple[Location, ...]) -> str:
    return "; ".join(f"{loc.name}:{loc.lat_deg:g}:{loc.lon_deg:g}" for loc in locs)


def _converter(hint):
    if hint is bool:
        return _parse_bool
    if hint is int:
        return int
    if hint is float:
        return float
    if hint is Objective:
        return lambda s: Objective(s.lower())
    if hint == tuple[Location, ...]:
        return _parse_locations
    if hint == (float | None) or hint == typing.Optional[float]:
        return lambda s: None if s == "auto" else float(s)
    raise TypeError(f"no parser for {hint!r}")


def _format_value(value) -> str:
    if isinstance(value, bool):
        return "on" if value else "off"
    if value is None:
        return "auto"
    if isinstance(value, Objective):
        return value.value
    if isinstance(value, tuple):
        return _format_locations(value)
    return repr(value) if isinstance(value, float) else str(value)


def _build(section: str, cls: type, items: dict[str, str]):
    hints = typing.get_type_hints(cls)
    names = {f.name for f in dataclasses.fields(cls)}
    kwargs = {}
    for key, raw in items.items():
        if key not in names:
            raise ConfigError(f"{section}.{key}", "unknown key")
        try:
            kwargs[key] = _converter(hints[key])(raw)
        except ValueError as exc:
            raise ConfigError(f"{section}.{key}", f"invalid value {raw!r} ({exc})") from None
    missing = [f.name for f in dataclasses.fields(cls)
               if f.name not in kwargs and f.default is dataclasses.MISSING
               and f.default_factory is dataclasses.MISSING]
    if missing:
        raise ConfigError(f"{section}.{missing[0]}", "required key missing")
    obj = cls(**kwargs)
    try:
        obj.validate()
    except ConfigError as exc:
        raise ConfigError(f"{section}.{exc.key}", exc.message) from None
    return obj


def parse_config_text(text: str, source: str = "<config>") -> ScenarioFile:
    parser = configparser.ConfigParser(interpolation=None, comment_prefixes=("#",),
                                       inline_comment_prefixes=("#",), strict=True,
                                       empty_lines_in_values=False, default_section="__none__")
    try:
        parser.read_string(text, source=source)
    except configparser.MissingSectionHeaderError as exc:
        raise ConfigParseError(exc.lineno, "key outside of any [section]") from None
    except configparser.ParsingError as exc:
        lineno, line = exc.errors[0]
        raise ConfigParseError(lineno, f"cannot parse {line.strip()!r}") from None
    except (configparser.DuplicateOptionError, configparser.DuplicateSectionError) as exc:
        raise ConfigParseError(exc.lineno, exc.message.split(": ", 1)[-1]) from None
    except configparser.Error as exc:
        raise ConfigParseError(None, str(exc)) from None

    for section in parser.sections():
        if section not in SECTIONS:
            raise ConfigError(section, "unknown section")
    if "constellation" not in parser:
        raise ConfigError("constellation", "section is required")
    built = {name: _build(name, cls, dict(parser[name]) if name in parser else {})
             for name, cls in SECTIONS.items()}
    return ScenarioFile(**built)


def parse_config(path: str | Path) -> ScenarioFile:
    """Read and fully validate a scenario file.

    Raises ``OSError`` when unreadable, ``ConfigParseError`` on malformed
    syntax and ``ConfigError`` naming ``section.key`` on bad values.
    """
    path = Path(path)
    return parse_config_text(path.read_text(encoding="utf-8"), source=str(path))


def format_defaults() -> str:
    lines = ["# eatsim scenario defaults", ""]
    for name, cls in SECTIONS.items():
        lines.append(f"[{name}]")
        for f in dataclasses.fields(cls):
            if f.default is not dataclasses.MISSING:
                lines.append(f"{f.name} = {_format_value(f.default)}")
            elif f.default_factory is not dataclasses.MISSING:
                lines.append(f"{f.name} = {_format_value(f.default_factory())}")
            else:
                lines.append(f"# {f.name} = <required>")
        lines.append("")
    return "\n".join(lines)


def shipped_config(name: str = "starlink_phase1.cfg") -> Path:
    return Path(str(resources.files("eatsim") / "data" / name))
