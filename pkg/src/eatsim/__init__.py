"""Interference-aware elevation-threshold optimization for LEO direct-to-device handover."""

from eatsim.errors import ConfigError, DegenerateGeometryError
from eatsim.orbital import (
    Constellation,
    ConstellationConfig,
    SatelliteEphemeris,
    build_constellation,
    orbital_angular_rate,
    propagate,
)
from eatsim.geometry import (
    GeodeticPosition,
    VisibilityRecord,
    elevation_angle,
    geodetic_to_cartesian,
    slant_range,
    visible_set,
)
from eatsim.link import (
    LinkBudget,
    SinrSample,
    capacity_bps,
    free_space_path_loss,
    noise_power,
    packet_deliverable,
    received_power,
    sinr,
)
from eatsim.eatopt import (
    CoverageProfile,
    EatResult,
    EatSearchConfig,
    Objective,
    coverage_profile,
    eat_latitude_sweep,
    optimal_eat,
)
from eatsim.simnet import (
    HandoverEvent,
    SimConfig,
    SimResult,
    TrafficConfig,
    UeContext,
    UeState,
    compare_fixed_vs_optimal,
    csho_select,
    run_scenario,
    step,
)

__version__ = "0.1.0"
