"""Effective channels, achievable rate, MRT beamforming, Monte-Carlo rate estimates.

The effective channel seen at the UAV for user k is
    h_k = (h_r,k^H Theta G + h_d,k^H)^H = G^H Theta^H h_r,k + h_d,k
so that rate = log2(1 + |h_k^H w|^2 / sigma^2) matches the physical
cascade-plus-direct link.  Rates are computed in nats internally and converted
to bits at the public boundary.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ChannelBatch, ChannelSample
from .config import ConfigError, ScenarioConfig

_LN2 = np.log(2.0)


@dataclass
class PhaseVector:
    """Per-element RIS phases phi (radians); theta_m = exp(j phi_m)."""

    phi: np.ndarray

    def __post_init__(self):
        self.phi = np.asarray(self.phi, dtype=float)

    @property
    def theta(self) -> np.ndarray:
        return np.exp(1j * self.phi)


@dataclass
class BeamVector:
    """Transmit beamformer; ||w||^2 must not exceed the power budget."""

    w: np.ndarray
    degenerate: bool = False  # set when built from a zero effective channel

    @property
    def power(self) -> float:
        return float(np.vdot(self.w, self.w).real)


@dataclass
class EvalResult:
    """Monte-Carlo rate estimate in bits/s/Hz."""

    mean_rate: float
    std_error: float
    n_samples: int
    per_slot: np.ndarray | None = None


def effective_channel(sample: ChannelSample, phase: PhaseVector, k: int) -> np.ndarray:
    """G^H Theta^H h_r,k + h_d,k (length N_t)."""
    h_r = sample.h_r[k]
    if phase.phi.shape[0] != h_r.shape[0]:
        raise ConfigError("phase vector length does not match RIS element count M")
    return sample.G.conj().T @ (np.exp(-1j * phase.phi) * h_r) + sample.h_d[k]


def rate(sample: ChannelSample, phase: PhaseVector, w: BeamVector, k: int,
         scenario: ScenarioConfig) -> float:
    """Achievable rate log2(1 + |h_k^H w|^2 / sigma^2), bits/s/Hz."""
    h = effective_channel(sample, phase, k)
    snr = abs(np.vdot(h, w.w)) ** 2 / scenario.sigma2
    return float(np.log1p(snr) / _LN2)


def mrt_rate_from_channel(h: np.ndarray, scenario: ScenarioConfig) -> float:
    """Rate under the optimal beamformer: log2(1 + P/sigma^2 * ||h||^2)."""
    g = float(np.vdot(h, h).real)
    return float(np.log1p(scenario.snr_scale * g) / _LN2)


def mrt_beamformer(sample: ChannelSample, phase: PhaseVector, k: int,
                   scenario: ScenarioConfig) -> BeamVector:
    """w = sqrt(P) h_k / ||h_k||.  A zero effective channel (probability-zero
    event) yields an arbitrary full-power vector flagged as degenerate rather
    than an error, so long Monte-Carlo runs never abort."""
    h = effective_channel(sample, phase, k)
    norm = float(np.linalg.norm(h))
    if norm == 0.0:
        w = np.zeros(scenario.N_t, dtype=complex)
        w[0] = np.sqrt(scenario.P)
        return BeamVector(w=w, degenerate=True)
    return BeamVector(w=np.sqrt(scenario.P) * h / norm)


def mc_expected_rate(batch: ChannelBatch, phase: PhaseVector, k: int,
                     scenario: ScenarioConfig, use_mrt: bool = True,
                     w: BeamVector | None = None) -> EvalResult:
    """Sample mean and standard error of the rate over a batch.

    With use_mrt the per-sample MRT rate is scored; otherwise a fixed
    beamformer w is applied to every sample.
    """
    if len(batch) == 0:
        raise ConfigError("batch must be non-empty")
    if not use_mrt and w is None:
        raise ConfigError("w is required when use_mrt is off")
    rates = np.empty(len(batch))
    for i, sample in enumerate(batch.samples):
        if use_mrt:
            h = effective_channel(sample, phase, k)
            rates[i] = mrt_rate_from_channel(h, scenario)
        else:
            rates[i] = rate(sample, phase, w, k, scenario)
    mean = float(rates.mean())
    se = float(rates.std(ddof=1) / np.sqrt(len(batch))) if len(batch) > 1 else 0.0
    return EvalResult(mean_rate=mean, std_error=se, n_samples=len(batch))
