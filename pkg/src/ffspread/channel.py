"""Synchronous K-user Gaussian multiple-access channel.

Energy convention: Eb = 1, so N0 = 1 / (Eb/N0 linear) and the per-chip
amplitude is sqrt(Eb/L) = sqrt(1/L).  Noise samples are zero-mean
Gaussian with variance N0/2 and come from numpy's seeded Generator
(PCG64), so received vectors are reproducible per seed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ChannelParams:
    """K users, spreading length L, Eb/N0 in dB (Eb fixed to 1)."""

    K: int
    L: int
    eb_n0_db: float
    noiseless: bool = False

    def __post_init__(self):
        if self.K < 1 or self.L < 1:
            raise ValueError("K and L must be >= 1")
        if not np.isfinite(self.eb_n0_db):
            raise ValueError("eb_n0_db must be finite")

    @property
    def eb_n0(self) -> float:
        return 10.0 ** (self.eb_n0_db / 10.0)

    @property
    def n0(self) -> float:
        return 0.0 if self.noiseless else 1.0 / self.eb_n0

    @property
    def amplitude(self) -> float:
        return (1.0 / self.L) ** 0.5


def transmit(chips: np.ndarray, params: ChannelParams, rng: np.random.Generator) -> np.ndarray:
    """Superimpose K unit-amplitude chip vectors and add Gaussian noise.

    chips has shape (K, T); the result is
    y_t = sum_k sqrt(Eb/L) x_t^(k) + z_t with z_t ~ N(0, N0/2).
    """
    chips = np.asarray(chips, dtype=np.float64)
    if chips.ndim != 2 or chips.shape[0] != params.K:
        raise ValueError(f"expected chip array of shape (K={params.K}, T), got {chips.shape}")
    y = params.amplitude * chips.sum(axis=0)
    if not params.noiseless:
        y = y + rng.normal(0.0, (params.n0 / 2.0) ** 0.5, size=chips.shape[1])
    return y
