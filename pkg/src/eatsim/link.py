"""
Large-scale satellite-to-device link budget.

Line-of-sight free-space loss plus an optional constant excess loss, thermal
noise, co-channel interference summed in the linear domain, and a Shannon
capacity threshold that decides whether an offered rate gets through.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from eatsim.errors import ConfigError

BOLTZMANN = 1.380649e-23  # J/K
SINR_CAP_LINEAR = 1e15


@dataclass(frozen=True)
class LinkBudget:
    tx_power_dbm: float = 43.01        # 20 W
    aggregate_gain_dbi: float = 70.2
    freq_ghz: float = 11.7
    bandwidth_hz: float = 4.5e6
    noise_temp_k: float = 290.0
    excess_loss_db: float = 0.0
    interferer_activity: float = 1.0

    def validate(self) -> None:
        if not self.bandwidth_hz > 0.0:
            raise ConfigError("bandwidth_hz", "must be > 0")
        if not self.freq_ghz > 0.0:
            raise ConfigError("freq_ghz", "must be > 0")
        if not self.noise_temp_k > 0.0:
            raise ConfigError("noise_temp_k", "must be > 0")
        if not 0.0 <= self.interferer_activity <= 1.0:
            raise ConfigError("interferer_activity", "must lie in [0, 1]")

    @property
    def noise_dbm(self) -> float:
        return noise_power(self.bandwidth_hz, self.noise_temp_k)


@dataclass(frozen=True)
class SinrSample:
    t: float
    serving_sat: int
    signal_dbm: float
    interference_dbm: float
    noise_dbm: float
    sinr_db: float


def db_to_linear(db):
    return np.power(10.0, np.asarray(db, dtype=float) / 10.0)


def linear_to_db(lin):
    with np.errstate(divide="ignore"):
        return 10.0 * np.log10(np.asarray(lin, dtype=float))


def free_space_path_loss(freq_ghz, distance_km):
    """FSPL in dB: 32.45 + 20 log10(f_MHz) + 20 log10(d_km)."""
    return 32.45 + 20.0 * np.log10(np.asarray(freq_ghz) * 1000.0) + 20.0 * np.log10(distance_km)


def received_power(budget: LinkBudget, distance_km):
    """Received power in dBm; accepts a scalar or an array of distances."""
    p = (budget.tx_power_dbm + budget.aggregate_gain_dbi
         - free_space_path_loss(budget.freq_ghz, distance_km) - budget.excess_loss_db)
    return float(p) if np.ndim(p) == 0 else p


def noise_power(bandwidth_hz: float, noise_temp_k: float = 290.0) -> float:
    """Thermal noise kTB in dBm."""
    if not bandwidth_hz > 0.0:
        raise ConfigError("bandwidth_hz", "must be > 0")
    return 10.0 * math.log10(BOLTZMANN * noise_temp_k * bandwidth_hz * 1000.0)


def interference_linear_mw(budget: LinkBudget, distances_km) -> float:
    """Summed interferer power (mW) after the activity discount."""
    d = np.asarray(distances_km, dtype=float)
    if d.size == 0 or budget.interferer_activity == 0.0:
        return 0.0
    return budget.interferer_activity * float(np.sum(db_to_linear(received_power(budget, d))))


def sinr_from_linear(signal_mw, interference_mw, noise_mw):
    """SINR in dB from linear milliwatt terms, saturated at ``SINR_CAP_LINEAR``."""
    signal_mw = np.asarray(signal_mw, dtype=float)
    denom = np.asarray(interference_mw, dtype=float) + noise_mw
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(denom > 0.0, signal_mw / np.where(denom > 0.0, denom, 1.0), SINR_CAP_LINEAR)
    out = 10.0 * np.log10(np.minimum(ratio, SINR_CAP_LINEAR))
    return float(out) if out.ndim == 0 else out


def sinr(signal_dbm: float, interferer_dbm_list: Iterable[float], noise_dbm: float) -> float:
    """SINR (dB) of a serving signal against interferers and noise.

    An empty interferer list gives the SNR; a noise of ``-inf`` with no
    interferers saturates at 150 dB rather than returning infinity.
    """
    interferers = list(interferer_dbm_list)
    interference = float(np.sum(db_to_linear(interferers))) if interferers else 0.0
    return sinr_from_linear(float(db_to_linear(signal_dbm)), interference, float(db_to_linear(noise_dbm)))


def capacity_bps(sinr_db, bandwidth_hz: float):
    """Shannon capacity B log2(1 + SINR)."""
    if not bandwidth_hz > 0.0:
        raise ConfigError("bandwidth_hz", "must be > 0")
    c = bandwidth_hz * np.log2(1.0 + db_to_linear(sinr_db))
    return float(c) if np.ndim(c) == 0 else c


def required_sinr_db(rate_bps: float, bandwidth_hz: float) -> float:
    """Smallest SINR at which ``rate_bps`` fits in the Shannon capacity."""
    return 10.0 * math.log10(2.0 ** (rate_bps / bandwidth_hz) - 1.0)


def packet_deliverable(offered_rate_bps: float, sinr_db: float, budget: LinkBudget) -> bool:
    if not offered_rate_bps > 0.0:
        raise ConfigError("offered_rate_bps", "must be > 0")
    return bool(capacity_bps(sinr_db, budget.bandwidth_hz) >= offered_rate_bps)
