import numpy as np
import pytest

from eatsim import Constellation, ConstellationConfig

STARLINK = ConstellationConfig(num_planes=72, sats_per_plane=22, inclination_deg=53.0,
                               altitude_km=550.0, phase_factor=1)


def rodrigues_matrix(n: np.ndarray, psi: float) -> np.ndarray:
    """Rotation matrix about unit axis n; independent of the propagator's vector form."""
    K = np.array([[0.0, -n[2], n[1]], [n[2], 0.0, -n[0]], [-n[1], n[0], 0.0]])
    return np.eye(3) + np.sin(psi) * K + (1.0 - np.cos(psi)) * (K @ K)


def brute_elevation(user: np.ndarray, sat: np.ndarray) -> float:
    """Elevation via the zenith angle between local up and the line of sight."""
    d = sat - user
    cos_zenith = np.dot(d, user) / (np.linalg.norm(d) * np.linalg.norm(user))
    return 90.0 - np.degrees(np.arccos(np.clip(cos_zenith, -1.0, 1.0)))


@pytest.fixture(scope="session")
def starlink() -> Constellation:
    return Constellation.from_config(STARLINK)


@pytest.fixture(scope="session")
def reduced_shell() -> Constellation:
    return Constellation.from_config(ConstellationConfig(12, 8, 53.0, 550.0, 1))


def custom_constellation(r0_list, normal=(0.0, 0.0, 1.0), altitude_km: float = 550.0) -> Constellation:
    """Satellites at explicit initial positions sharing one orbit normal."""
    from eatsim import SatelliteEphemeris, orbital_angular_rate

    cfg = ConstellationConfig(1, max(len(r0_list), 1), 0.0, altitude_km, 0)
    n = np.asarray(normal, dtype=float)
    n = n / np.linalg.norm(n)
    omega = orbital_angular_rate(altitude_km)
    ephs = []
    for i, r0 in enumerate(r0_list):
        r0 = np.asarray(r0, dtype=float)
        r0 = r0 - (r0 @ n) * n
        r0 = r0 / np.linalg.norm(r0) * (6371.0 + altitude_km)
        ephs.append(SatelliteEphemeris(i, 0, i, r0, n, omega, 0.0))
    return Constellation.from_ephemerides(cfg, ephs)


def equatorial_at(*central_angles_deg: float) -> Constellation:
    """Equatorial satellites at the given longitudes (deg) at t = 0."""
    return custom_constellation([(np.cos(np.radians(a)), np.sin(np.radians(a)), 0.0) for a in central_angles_deg])


def oracle_elevations(user, constellation: Constellation, times) -> tuple[np.ndarray, np.ndarray]:
    """(T, N) elevations and ranges from explicit positions, not the fast look-angle path."""
    from eatsim.geometry import elevations_and_ranges

    return elevations_and_ranges(user, constellation.positions(np.asarray(times)))


CRITERIA_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if CRITERIA_LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in sorted(CRITERIA_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
