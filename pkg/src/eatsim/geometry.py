"""Spherical-Earth coordinates, elevation angles, slant ranges and visibility."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from eatsim.errors import ConfigError, DegenerateGeometryError
from eatsim.orbital import (
    EARTH_RADIUS_KM,
    EARTH_ROTATION_RAD_S,
    Constellation,
    SatelliteEphemeris,
    propagate,
    rotate_z,
)


@dataclass(frozen=True)
class GeodeticPosition:
    lat_deg: float
    lon_deg: float
    alt_km: float = 0.0

    def validate(self) -> None:
        if not -90.0 <= self.lat_deg <= 90.0:
            raise ConfigError("lat_deg", "must lie in [-90, 90]")
        if not -180.0 <= self.lon_deg < 180.0:
            raise ConfigError("lon_deg", "must lie in [-180, 180)")
        if not self.alt_km >= 0.0:
            raise ConfigError("alt_km", "must be >= 0")


@dataclass(frozen=True)
class VisibilityRecord:
    t: float
    sat_id: int
    elevation_deg: float
    slant_range_km: float


def geodetic_to_cartesian(pos: GeodeticPosition, earth_radius_km: float = EARTH_RADIUS_KM) -> np.ndarray:
    pos.validate()
    r = earth_radius_km + pos.alt_km
    lat = math.radians(pos.lat_deg)
    lon = math.radians(pos.lon_deg)
    return np.array([r * math.cos(lat) * math.cos(lon),
                     r * math.cos(lat) * math.sin(lon),
                     r * math.sin(lat)])


def cartesian_to_geodetic(xyz: np.ndarray, earth_radius_km: float = EARTH_RADIUS_KM) -> GeodeticPosition:
    x, y, z = (float(v) for v in xyz)
    r = math.sqrt(x * x + y * y + z * z)
    lon = math.degrees(math.atan2(y, x))
    if lon >= 180.0:
        lon -= 360.0
    return GeodeticPosition(math.degrees(math.asin(z / r)), lon, max(r - earth_radius_km, 0.0))


def user_position(user_xyz: np.ndarray, t: float | np.ndarray, earth_rotation: bool) -> np.ndarray:
    """Ground position at time t; fixed unless the Earth is spinning under the frame."""
    user_xyz = np.asarray(user_xyz, dtype=float)
    if not earth_rotation:
        if np.ndim(t) == 0:
            return user_xyz
        return np.broadcast_to(user_xyz, np.shape(t) + (3,))
    return rotate_z(user_xyz, EARTH_ROTATION_RAD_S * np.asarray(t, dtype=float))


def elevation_angle(user_xyz: np.ndarray, sat_xyz: np.ndarray) -> float:
    """Elevation in degrees of ``sat_xyz`` above the local horizon plane at ``user_xyz``."""
    user_xyz = np.asarray(user_xyz, dtype=float)
    d = np.asarray(sat_xyz, dtype=float) - user_xyz
    dist = float(np.linalg.norm(d))
    if dist < 1e-9:
        raise DegenerateGeometryError("satellite coincides with user position")
    up = user_xyz / np.linalg.norm(user_xyz)
    return math.degrees(math.asin(max(-1.0, min(1.0, float(d @ up) / dist))))


def elevations_and_ranges(user_xyz: np.ndarray, sat_xyz: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised elevation (deg) and slant range (km).

    ``sat_xyz`` has shape (..., N, 3); ``user_xyz`` is (3,) or (..., 3) with
    leading axes matching.
    """
    user_xyz = np.asarray(user_xyz, dtype=float)
    u = user_xyz[..., None, :]
    d = sat_xyz - u
    rng = np.sqrt(np.einsum("...i,...i->...", d, d))
    up = u / np.linalg.norm(u, axis=-1, keepdims=True)
    sin_el = np.einsum("...i,...i->...", d, up) / rng
    return np.degrees(np.arcsin(np.clip(sin_el, -1.0, 1.0))), rng


def look_angles(user_xyz: np.ndarray, constellation: Constellation,
                t: float | np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Elevation (deg) and slant range (km) of every satellite, shape (T, N) or (N,).

    Works from r.u and |r| alone: with r(t) = r0 cos wt + (n x r0) sin wt the
    projection onto the user is two dot products per satellite and |r| = |r0|.
    ``user_xyz`` is (3,) or per-sample (T, 3).
    """
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    users = np.broadcast_to(np.asarray(user_xyz, dtype=float), t_arr.shape + (3,))
    a = users @ constellation.r0.T
    b = users @ constellation.nxr0.T
    omega = constellation.omega
    if len(omega) and np.all(omega == omega[0]):
        psi = (omega[0] * t_arr)[:, None]
    else:
        psi = np.multiply.outer(t_arr, omega)
    ru = a * np.cos(psi) + b * np.sin(psi)
    u2 = np.einsum("ti,ti->t", users, users)[:, None]
    r2 = np.einsum("ni,ni->n", constellation.r0, constellation.r0)
    rng = np.sqrt(np.maximum(r2 - 2.0 * ru + u2, 0.0))
    sin_el = (ru - u2) / (np.sqrt(u2) * rng)
    el = np.degrees(np.arcsin(np.clip(sin_el, -1.0, 1.0)))
    if np.ndim(t) == 0:
        return el[0], rng[0]
    return el, rng


def slant_range(elevation_deg: float, altitude_km: float, earth_radius_km: float = EARTH_RADIUS_KM) -> float:
    """Closed-form user-to-satellite distance on a sphere."""
    R, h = earth_radius_km, altitude_km
    s = math.sin(math.radians(elevation_deg))
    return math.sqrt(R * R * s * s + 2.0 * R * h + h * h) - R * s


def visible_set(user_xyz: np.ndarray, ephemerides: Iterable[SatelliteEphemeris] | Constellation,
                t: float, eat_deg: float) -> set[int]:
    """Satellites whose elevation is at or above ``eat_deg`` at time t."""
    if isinstance(ephemerides, Constellation):
        if len(ephemerides) == 0:
            return set()
        el, _ = elevations_and_ranges(user_xyz, ephemerides.positions(t))
        return {int(i) for i in ephemerides.sat_ids[el >= eat_deg]}
    return {e.sat_id for e in ephemerides if elevation_angle(user_xyz, propagate(e, t)) >= eat_deg}


def visibility_records(user_xyz: np.ndarray, constellation: Constellation, t: float,
                       eat_deg: float) -> list[VisibilityRecord]:
    if len(constellation) == 0:
        return []
    el, rng = elevations_and_ranges(user_xyz, constellation.positions(t))
    idx = np.flatnonzero(el >= eat_deg)
    ids = constellation.sat_ids
    return [VisibilityRecord(t, int(ids[i]), float(el[i]), float(rng[i])) for i in idx]
