"""
Walker constellation construction and circular-orbit propagation.

Positions live in an Earth-centred frame with Z toward the north pole and X
through the 0 deg meridian at t = 0. Each satellite carries its initial
position and orbital-plane normal; the position at time t is the initial
vector rotated about the normal (Rodrigues' rotation).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from eatsim.errors import ConfigError

MU_EARTH = 3.986004418e14  # m^3/s^2
EARTH_RADIUS_KM = 6371.0
EARTH_ROTATION_RAD_S = 7.2921159e-5


@dataclass(frozen=True)
class ConstellationConfig:
    """Walker shell parameters. Angles in degrees, distances in km."""

    num_planes: int
    sats_per_plane: int
    inclination_deg: float
    altitude_km: float
    phase_factor: int
    raan_spread_deg: float = 360.0
    earth_radius_km: float = EARTH_RADIUS_KM
    mu_m3s2: float = MU_EARTH
    earth_rotation: bool = False

    def validate(self) -> None:
        if self.num_planes < 1:
            raise ConfigError("num_planes", "must be >= 1")
        if self.sats_per_plane < 1:
            raise ConfigError("sats_per_plane", "must be >= 1")
        if not 0.0 <= self.inclination_deg <= 180.0:
            raise ConfigError("inclination_deg", "must lie in [0, 180]")
        if not self.altitude_km > 0.0:
            raise ConfigError("altitude_km", "must be > 0")
        if not 0 <= self.phase_factor < self.num_planes:
            raise ConfigError("phase_factor", "must satisfy 0 <= F < num_planes")
        if not self.earth_radius_km > 0.0:
            raise ConfigError("earth_radius_km", "must be > 0")
        if not self.mu_m3s2 > 0.0:
            raise ConfigError("mu_m3s2", "must be > 0")

    @property
    def orbit_radius_km(self) -> float:
        return self.earth_radius_km + self.altitude_km

    @property
    def period_s(self) -> float:
        return 2.0 * math.pi / orbital_angular_rate(self.altitude_km, self.earth_radius_km, self.mu_m3s2)


@dataclass(frozen=True)
class SatelliteEphemeris:
    sat_id: int
    plane_index: int
    slot_index: int
    r0: np.ndarray
    n: np.ndarray
    omega_rad_s: float
    m0_rad: float


def orbital_angular_rate(altitude_km: float, earth_radius_km: float = EARTH_RADIUS_KM,
                         mu: float = MU_EARTH) -> float:
    """Circular-orbit angular rate sqrt(mu / a^3) in rad/s."""
    if not altitude_km > 0.0:
        raise ConfigError("altitude_km", "must be > 0")
    a = (earth_radius_km + altitude_km) * 1000.0
    return math.sqrt(mu / a**3)


def plane_normal(raan_rad: float, inclination_rad: float) -> np.ndarray:
    """Unit normal of an orbital plane, oriented so motion is prograde about it."""
    si = math.sin(inclination_rad)
    return np.array([si * math.sin(raan_rad), -si * math.cos(raan_rad), math.cos(inclination_rad)])


def build_constellation(config: ConstellationConfig) -> list[SatelliteEphemeris]:
    """Lay out a Walker shell.

    Plane k has its ascending node at ``k * raan_spread / P``; slot j of that
    plane starts at mean anomaly ``j * 360/S + k * F * 360/(P*S)`` degrees,
    measured from the ascending node.
    """
    config.validate()
    P, S, F = config.num_planes, config.sats_per_plane, config.phase_factor
    radius = config.orbit_radius_km
    omega = orbital_angular_rate(config.altitude_km, config.earth_radius_km, config.mu_m3s2)
    inc = math.radians(config.inclination_deg)

    ephemerides: list[SatelliteEphemeris] = []
    for k in range(P):
        raan = math.radians(k * config.raan_spread_deg / P)
        n = plane_normal(raan, inc)
        node = np.array([math.cos(raan), math.sin(raan), 0.0])
        along = np.cross(n, node)
        for j in range(S):
            m0_deg = j * (360.0 / S) + k * F * 360.0 / (P * S)
            m0 = math.radians(m0_deg)
            r0 = radius * (math.cos(m0) * node + math.sin(m0) * along)
            r0.flags.writeable = False
            n_frozen = n.copy()
            n_frozen.flags.writeable = False
            ephemerides.append(SatelliteEphemeris(
                sat_id=k * S + j, plane_index=k, slot_index=j,
                r0=r0, n=n_frozen, omega_rad_s=omega, m0_rad=m0,
            ))
    return ephemerides


def propagate(eph: SatelliteEphemeris, t: float) -> np.ndarray:
    """Position (km) at time t: r0 cos(wt) + (n x r0) sin(wt)."""
    psi = eph.omega_rad_s * t
    return eph.r0 * math.cos(psi) + np.cross(eph.n, eph.r0) * math.sin(psi)


@dataclass(frozen=True)
class Constellation:
    """A built shell with its ephemerides stacked for vectorised propagation."""

    config: ConstellationConfig
    ephemerides: tuple[SatelliteEphemeris, ...]
    r0: np.ndarray = field(repr=False)
    nxr0: np.ndarray = field(repr=False)
    omega: np.ndarray = field(repr=False)

    @classmethod
    def from_config(cls, config: ConstellationConfig) -> Constellation:
        return cls.from_ephemerides(config, build_constellation(config))

    @classmethod
    def from_ephemerides(cls, config: ConstellationConfig,
                         ephemerides: list[SatelliteEphemeris]) -> Constellation:
        if ephemerides:
            r0 = np.array([e.r0 for e in ephemerides])
            nxr0 = np.cross(np.array([e.n for e in ephemerides]), r0)
            omega = np.array([e.omega_rad_s for e in ephemerides])
        else:
            r0 = np.zeros((0, 3))
            nxr0 = np.zeros((0, 3))
            omega = np.zeros(0)
        for arr in (r0, nxr0, omega):
            arr.flags.writeable = False
        return cls(config, tuple(ephemerides), r0, nxr0, omega)

    def __len__(self) -> int:
        return len(self.ephemerides)

    @property
    def sat_ids(self) -> np.ndarray:
        return np.array([e.sat_id for e in self.ephemerides], dtype=np.int64)

    def positions(self, t: float | np.ndarray) -> np.ndarray:
        """Satellite positions, shape (N, 3) for scalar t or (T, N, 3) for an array."""
        psi = np.multiply.outer(np.asarray(t, dtype=float), self.omega)
        c = np.cos(psi)[..., None]
        s = np.sin(psi)[..., None]
        return self.r0 * c + self.nxr0 * s


def rotate_z(xyz: np.ndarray, angle_rad: float | np.ndarray) -> np.ndarray:
    """Rotate vectors about +Z. ``angle_rad`` may be an array broadcasting over leading axes."""
    xyz = np.asarray(xyz, dtype=float)
    c = np.cos(angle_rad)
    s = np.sin(angle_rad)
    x, y, z = xyz[..., 0], xyz[..., 1], xyz[..., 2]
    return np.stack(np.broadcast_arrays(c * x - s * y, s * x + c * y, z), axis=-1)
