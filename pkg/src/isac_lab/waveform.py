"""Per-path signal-strength parameters, the SNR convention, and OFDM
effective-bandwidth draws for the data-averaged bound."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from .errors import EmptySpectrum


@dataclass(frozen=True)
class WaveformSpec:
    """Signal-strength parameters of one path.

    alpha    : complex path gain
    e_s      : per-pulse fast-time energy (normalized)
    beta     : effective (rms) bandwidth [Hz]
    sigma_w2 : total complex noise variance per sample
    """

    alpha: complex = 1.0 + 0.0j
    e_s: float = 1.0
    beta: float = 0.0
    sigma_w2: float = 1.0

    def __post_init__(self):
        if not self.e_s > 0:
            raise ValueError("per-pulse energy must be positive")
        if self.beta < 0:
            raise ValueError("effective bandwidth must be nonnegative")
        if not self.sigma_w2 > 0:
            raise ValueError("noise variance must be positive")

    @property
    def snr_linear(self) -> float:
        """Per-pulse SNR |alpha|^2 E_s / sigma_w^2."""
        return abs(self.alpha) ** 2 * self.e_s / self.sigma_w2


class Constellation(str, Enum):
    QAM16 = "qam16"
    CONSTANT = "constant"   # unit-modulus symbols (degenerate, zero-variance draws)


_QAM16_LEVELS = np.array([-3.0, -1.0, 1.0, 3.0]) / np.sqrt(10.0)


@dataclass(frozen=True)
class OfdmSpec:
    """OFDM layout used for effective-bandwidth draws."""

    n_sub: int = 1024
    spacing: float = 1.62e3  # [Hz]
    constellation: Constellation = Constellation.QAM16
    active_mask: Optional[np.ndarray] = None  # boolean, length n_sub; None = all on

    def __post_init__(self):
        if self.n_sub < 1:
            raise ValueError("need at least one subcarrier")
        if not self.spacing > 0:
            raise ValueError("subcarrier spacing must be positive")
        object.__setattr__(self, "constellation", Constellation(self.constellation))
        if self.active_mask is not None:
            mask = np.asarray(self.active_mask, dtype=bool)
            if mask.shape != (self.n_sub,):
                raise ValueError("active_mask must have length n_sub")
            if not mask.any():
                raise ValueError("active_mask disables every subcarrier")
            object.__setattr__(self, "active_mask", mask)

    def frequencies(self) -> np.ndarray:
        """Subcarrier frequencies on a grid centered at zero."""
        return (np.arange(self.n_sub) - (self.n_sub - 1) / 2.0) * self.spacing


def effective_bandwidth(frequencies, densities) -> float:
    """RMS bandwidth of a sampled power spectrum, about its centroid.

    beta^2 = sum (f - f_centroid)^2 p(f) / sum p(f). Computing about the
    centroid keeps the carrier level out of beta, so bandwidth and carrier
    effects are not double counted in the information expressions.
    """
    f = np.asarray(frequencies, dtype=float)
    p = np.asarray(densities, dtype=float)
    if f.shape != p.shape:
        raise ValueError("frequency and density grids must match")
    if np.any(p < 0):
        raise ValueError("power densities must be nonnegative")
    total = p.sum()
    if not total > 0:
        raise EmptySpectrum("spectrum carries no power")
    centroid = (f * p).sum() / total
    return float(np.sqrt(((f - centroid) ** 2 * p).sum() / total))


def draw_ofdm_beta(spec: OfdmSpec, rng: np.random.Generator) -> float:
    """Draw one data realization and return the resulting effective bandwidth.

    Symbols have unit average power; the discrete power spectrum on the
    subcarrier grid is |S_k|^2 for active subcarriers, zero elsewhere.
    """
    freqs = spec.frequencies()
    mask = spec.active_mask if spec.active_mask is not None else np.ones(spec.n_sub, bool)
    n_active = int(mask.sum())
    if spec.constellation is Constellation.CONSTANT:
        power = np.ones(n_active)
    else:
        re = rng.choice(_QAM16_LEVELS, size=n_active)
        im = rng.choice(_QAM16_LEVELS, size=n_active)
        power = re**2 + im**2
    return effective_bandwidth(freqs[mask], power)


def flat_comb_beta(spec: OfdmSpec) -> float:
    """Analytic beta of the all-active constant-modulus comb."""
    n = spec.n_sub
    return spec.spacing * np.sqrt((n**2 - 1) / 12.0)


def sigma_from_snr(snr_db: float, alpha: complex = 1.0, e_s: float = 1.0) -> float:
    """Noise variance realizing a per-pulse SNR of |alpha|^2 E_s / sigma_w^2."""
    return abs(alpha) ** 2 * e_s * 10.0 ** (-snr_db / 10.0)
