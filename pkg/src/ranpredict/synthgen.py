"""Synthetic telemetry generator with a known link-adaptation mechanism.

Each sample draws an SNR, maps it through a monotone threshold table to the
highest sustainable MCS, derives a BLER from the distance to that threshold,
and scales spectral efficiency into a noisy bit rate. The default tables are
simple linear ramps (efficiency 0.2*(1+0.25*mcs), thresholds -6+mcs dB):
deliberately plain and documented rather than standards-accurate, so tests
have a known ground-truth mechanism. Real NR tables can be supplied via the
config file.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .ingest import MetricRecord

N_MCS = 29  # MCS indices 0..28

DEFAULT_MCS_EFFICIENCY = tuple(0.2 * (1.0 + 0.25 * m) for m in range(N_MCS))
DEFAULT_SNR_THRESHOLDS_DB = tuple(-6.0 + 1.0 * m for m in range(N_MCS))

_SNR_CLIP_DB = (-10.0, 40.0)


@dataclass(frozen=True)
class GenConfig:
    n_samples: int = 20000
    seed: int = 42
    snr_mean_db: float = 12.0
    snr_std_db: float = 6.0
    mcs_table: tuple[float, ...] = DEFAULT_MCS_EFFICIENCY
    snr_thresholds_db: tuple[float, ...] = DEFAULT_SNR_THRESHOLDS_DB
    bler_steepness: float = 0.8  # per dB
    brate_scale_kbps: float = 400.0
    noise_std_kbps: float = 50.0
    tti_period: int = 10240

    def __post_init__(self) -> None:
        if self.n_samples < 0:
            raise ConfigError(f"n_samples must be >= 0: {self.n_samples}")
        if self.seed < 0:
            raise ConfigError(f"seed must be >= 0: {self.seed}")
        for name, table in (("mcs_table", self.mcs_table), ("snr_thresholds_db", self.snr_thresholds_db)):
            if len(table) != N_MCS:
                raise ConfigError(f"{name} must have {N_MCS} entries, got {len(table)}")
            if any(b < a for a, b in zip(table, table[1:])):
                raise ConfigError(f"{name} must be monotone non-decreasing")
        for name in ("snr_std_db", "bler_steepness", "brate_scale_kbps", "noise_std_kbps"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be >= 0: {getattr(self, name)}")
        if self.tti_period < 1:
            raise ConfigError(f"tti_period must be >= 1: {self.tti_period}")


def generate(config: GenConfig) -> list[MetricRecord]:
    """Generate telemetry records, deterministic for a given seed.

    SNR ~ Normal(snr_mean_db, snr_std_db) clipped to [-10, 40] dB; MCS is the
    largest index whose threshold is <= SNR (clamped to 0 below the table);
    BLER = logistic(-steepness * (snr - threshold[mcs])); bit rate is
    brate_scale * efficiency[mcs] * (1 - bler) plus Gaussian noise, floored
    at 0. TTI counts samples modulo tti_period; timestamps advance 1 ms per
    sample for a single UE (ue_id 0).
    """
    n = config.n_samples
    rng = np.random.default_rng(config.seed)
    thresholds = np.asarray(config.snr_thresholds_db, dtype=float)
    efficiency = np.asarray(config.mcs_table, dtype=float)

    snr = np.clip(rng.normal(config.snr_mean_db, config.snr_std_db, n), *_SNR_CLIP_DB)
    mcs = np.clip(np.searchsorted(thresholds, snr, side="right") - 1, 0, N_MCS - 1)
    bler = np.clip(
        1.0 / (1.0 + np.exp(config.bler_steepness * (snr - thresholds[mcs]))), 0.0, 1.0
    )
    noise = rng.normal(0.0, config.noise_std_kbps, n)
    brate = np.maximum(
        config.brate_scale_kbps * efficiency[mcs] * (1.0 - bler) + noise, 0.0
    )
    tti = np.arange(n) % config.tti_period

    return [
        MetricRecord(
            timestamp_ms=i,
            ue_id=0,
            tti=int(tti[i]),
            mcs=int(mcs[i]),
            snr_db=float(snr[i]),
            bler=float(bler[i]),
            brate_kbps=float(brate[i]),
            scenario="synthetic",
        )
        for i in range(n)
    ]
