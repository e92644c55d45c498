"""Slow-time observation synthesis with exact steering structure.

Observations are modeled after fast-time matched filtering: one complex
sample per pulse, y_p = alpha * sqrt(E_s) * phi_p(tau, r) + w_p with
unit-modulus steering phases and circular Gaussian noise of total variance
sigma_w^2 (sigma_w^2 / 2 per real component).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .geometry import NetworkLayout, TargetState, path_geometries, radial_speed
from .schedule import HopSchedule
from .waveform import WaveformSpec


@dataclass(frozen=True)
class SlowTimeObservation:
    """Length-P complex sample vector of one path."""

    samples: np.ndarray
    path_index: int
    schedule: HopSchedule

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=complex)
        if samples.shape != (self.schedule.n_pulses,):
            raise ValueError("observation length must match the schedule")
        object.__setattr__(self, "samples", samples)


def steering_vector(
    sched: HopSchedule, tau: float, r: float, c: float
) -> np.ndarray:
    """Unit-modulus slow-time steering vector for delay tau and radial speed r.

    Element p is exp(-j 2 pi f_cp tau) * exp(+j 2 pi (f_cp / c) r t_p).
    """
    f = sched.carriers
    phase = -f * tau + (f / c) * r * sched.pulse_times
    return np.exp(2j * np.pi * phase)


def _schedules_per_path(schedules, n_paths: int) -> list[HopSchedule]:
    if isinstance(schedules, HopSchedule):
        return [schedules] * n_paths
    schedules = list(schedules)
    if len(schedules) != n_paths:
        raise ValueError(f"expected {n_paths} schedules, got {len(schedules)}")
    return schedules


def synthesize(
    layout: NetworkLayout,
    target: TargetState,
    schedules: Union[HopSchedule, Sequence[HopSchedule]],
    waveforms: Sequence[WaveformSpec],
    rng: np.random.Generator,
) -> list[SlowTimeObservation]:
    """Synthesize one noisy slow-time observation per path.

    The fast-time factor is collapsed into a sqrt(E_s) scale so the per-pulse
    signal energy equals |alpha|^2 E_s; noise is i.i.d. CN(0, sigma_w^2)
    across pulses and paths, drawn in path order from the supplied stream.
    """
    pgs = path_geometries(layout, target)
    scheds = _schedules_per_path(schedules, len(pgs))
    if len(waveforms) != len(pgs):
        raise ValueError(f"expected {len(pgs)} waveform specs, got {len(waveforms)}")
    out = []
    for idx, (pg, sched, wf) in enumerate(zip(pgs, scheds, waveforms)):
        r = radial_speed(pg, target.velocity)
        phi = steering_vector(sched, pg.tau, r, layout.c)
        sigma = np.sqrt(wf.sigma_w2 / 2.0)
        noise = sigma * (
            rng.standard_normal(sched.n_pulses) + 1j * rng.standard_normal(sched.n_pulses)
        )
        samples = wf.alpha * np.sqrt(wf.e_s) * phi + noise
        out.append(SlowTimeObservation(samples=samples, path_index=idx, schedule=sched))
    return out
