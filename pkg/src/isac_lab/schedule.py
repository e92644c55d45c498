"""Slow-time/carrier hop schedules and the moment bookkeeping behind the
Fisher analysis.

A schedule stores the pulse instants t_p and the per-pulse carriers f_cp.
Three derived sequences drive every information expression downstream:

* the carrier sequence f_cp itself (delay phase slope is -2*pi*f_cp),
* the mixed sequence z_p = t_p * f_cp (Doppler phase slope is 2*pi*z_p/c),
* their first and second moments.

``moments(sched, centered=True)`` replaces the raw sums with mean-removed
sums of those slope sequences. Eliminating the unknown complex gain by a
Schur complement performs exactly that mean removal, so the centered moments
reproduce the amplitude-eliminated information with the cross blocks already
zeroed out.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional, Sequence, Tuple

import numpy as np

from .errors import BadSchedule

HOP_KINDS = ("linear", "permuted", "palindromic", "custom")


@dataclass(frozen=True)
class HopSchedule:
    """Per-path pulse instants and carrier hops over one CPI.

    ``baseband`` marks an analysis artifact whose carriers had their mean
    removed (see :func:`center`); physical schedules keep positive carriers.
    """

    pulse_times: np.ndarray   # [s], length P, strictly increasing
    carriers: np.ndarray      # [Hz], length P
    pri: float                # [s]
    f0: float                 # nominal carrier [Hz]
    span: float               # synthesized span [Hz]
    baseband: bool = False

    def __post_init__(self):
        t = np.asarray(self.pulse_times, dtype=float)
        f = np.asarray(self.carriers, dtype=float)
        if t.ndim != 1 or t.size < 2:
            raise BadSchedule("schedule needs at least two pulses")
        if f.shape != t.shape:
            raise BadSchedule("pulse_times and carriers must have equal length")
        if not np.all(np.diff(t) > 0):
            raise BadSchedule("pulse times must be strictly increasing")
        if not self.baseband and np.any(f <= 0):
            raise BadSchedule("carriers must be positive")
        if not (np.all(np.isfinite(t)) and np.all(np.isfinite(f))):
            raise BadSchedule("schedule entries must be finite")
        object.__setattr__(self, "pulse_times", t)
        object.__setattr__(self, "carriers", f)

    @property
    def n_pulses(self) -> int:
        return self.pulse_times.size

    @property
    def t_syn(self) -> float:
        """Synthesized slow-time aperture t_{P-1} - t_0 [s]."""
        return float(self.pulse_times[-1] - self.pulse_times[0])

    @property
    def mixed(self) -> np.ndarray:
        """Mixed sequence z_p = t_p * f_cp [s*Hz]."""
        return self.pulse_times * self.carriers


@dataclass(frozen=True)
class ScheduleMoments:
    """Slow-time and carrier moments of one schedule.

    Raw mode keeps the plain sums; centered mode stores the mean-removed
    sums of the carrier and mixed sequences (s1 = f1 = sum_z = 0 there).
    The variance fields are always computed about the sequence means, so
    they agree between modes. ``cov_t_fc2`` is the delay-velocity coupling
    moment Cov(f_c, z) = (1/P) * sum (f_cp - mean f)(z_p - mean z); on a
    schedule with zero-mean pulse times and carriers it reduces to
    (1/P) * sum t_p f_cp^2, the textbook form.
    """

    s0: int          # P
    s1: float        # sum t_p [s]
    s2: float        # sum t_p^2 [s^2]
    f1: float        # sum f_cp [Hz]
    f2: float        # sum f_cp^2 [Hz^2]
    sum_z: float     # sum z_p [s*Hz]
    sum_z2: float    # sum z_p^2 [s^2 Hz^2]
    sum_fz: float    # sum f_cp z_p [s Hz^2]
    var_t: float     # [s^2]
    var_f: float     # [Hz^2]
    var_z: float     # [s^2 Hz^2]
    mean_t: float    # [s]
    mean_f: float    # [Hz]
    mean_z: float    # [s*Hz]
    cov_t_fc2: float  # [s Hz^2]
    centered: bool = False


def make_schedule(
    kind: str,
    n_pulses: int,
    pri: float,
    f0: float,
    span: float,
    seed: Optional[int] = None,
    custom_carriers: Optional[Sequence[float]] = None,
) -> HopSchedule:
    """Build a schedule with t_p = p * pri and carriers of the given kind.

    linear      : evenly spaced ramp over [f0 - span/2, f0 + span/2]
    permuted    : the linear carrier multiset in a seeded random order
    palindromic : carriers symmetric under p -> P-1-p covering the span
    custom      : caller-supplied carrier list of length P
    """
    if kind not in HOP_KINDS:
        raise BadSchedule(f"unknown hop kind {kind!r}; expected one of {HOP_KINDS}")
    if n_pulses < 2:
        raise BadSchedule("need at least two pulses")
    if pri <= 0:
        raise BadSchedule("pri must be positive")
    if span < 0:
        raise BadSchedule("span must be nonnegative")

    times = np.arange(n_pulses, dtype=float) * pri
    if kind == "custom":
        if custom_carriers is None:
            raise BadSchedule("custom kind requires custom_carriers")
        carriers = np.asarray(custom_carriers, dtype=float)
        if carriers.size != n_pulses:
            raise BadSchedule(
                f"custom carrier list has length {carriers.size}, expected {n_pulses}"
            )
    elif kind == "palindromic":
        # descend across the span, then mirror back up: the edge pulses carry
        # the high carriers, so widening the span strictly grows both the
        # carrier variance and the mixed-sequence variance
        half = (n_pulses + 1) // 2
        if half == 1:
            ramp = np.array([f0])
        else:
            ramp = f0 + span * (0.5 - np.arange(half) / (half - 1))
        carriers = np.concatenate([ramp, ramp[: n_pulses - half][::-1]])
    else:
        carriers = f0 + span * (np.arange(n_pulses) / (n_pulses - 1) - 0.5)
        if kind == "permuted":
            carriers = np.random.default_rng(seed).permutation(carriers)
    if np.any(carriers <= 0):
        raise BadSchedule("carriers must be positive")
    return HopSchedule(times, carriers, pri=pri, f0=f0, span=span)


def center(sched: HopSchedule) -> Tuple[HopSchedule, float, float]:
    """Remove the mean pulse time and mean carrier; return both means.

    The returned schedule is an analysis artifact (zero-mean carriers are
    flagged ``baseband``); the removed means let callers restore absolute
    phases. The reference Doppler absorbed into the gain is taken as zero.
    """
    mean_t = float(sched.pulse_times.mean())
    mean_f = float(sched.carriers.mean())
    out = HopSchedule(
        sched.pulse_times - mean_t,
        sched.carriers - mean_f,
        pri=sched.pri,
        f0=0.0,
        span=sched.span,
        baseband=True,
    )
    return out, mean_t, mean_f


def center_times(sched: HopSchedule) -> Tuple[HopSchedule, float]:
    """Shift the slow-time origin to the CPI centroid, keeping carriers.

    This is the canonical framing for experiments: the state estimate is
    referenced to the CPI midpoint, where delay and Doppler decouple for
    symmetric hop patterns.
    """
    mean_t = float(sched.pulse_times.mean())
    return replace(sched, pulse_times=sched.pulse_times - mean_t), mean_t


def moments(sched: HopSchedule, centered: bool = False) -> ScheduleMoments:
    """Compute the slow-time/carrier moments of a schedule.

    With ``centered=True`` the sums are taken over the mean-removed carrier
    and mixed sequences, which is exactly what amplitude elimination yields;
    the raw sums feed the uneliminated Fisher blocks.
    """
    t = sched.pulse_times
    f = sched.carriers
    z = t * f
    p = t.size
    mean_t = float(t.mean())
    mean_f = float(f.mean())
    mean_z = float(z.mean())
    tc = t - mean_t
    fc = f - mean_f
    zc = z - mean_z
    var_t = float(tc @ tc) / p
    var_f = float(fc @ fc) / p
    var_z = float(zc @ zc) / p
    cov_fz = float(fc @ zc) / p
    if centered:
        return ScheduleMoments(
            s0=p,
            s1=0.0,
            s2=float(tc @ tc),
            f1=0.0,
            f2=float(fc @ fc),
            sum_z=0.0,
            sum_z2=float(zc @ zc),
            sum_fz=p * cov_fz,
            var_t=var_t,
            var_f=var_f,
            var_z=var_z,
            mean_t=mean_t,
            mean_f=mean_f,
            mean_z=0.0,
            cov_t_fc2=cov_fz,
            centered=True,
        )
    return ScheduleMoments(
        s0=p,
        s1=float(t.sum()),
        s2=float(t @ t),
        f1=float(f.sum()),
        f2=float(f @ f),
        sum_z=float(z.sum()),
        sum_z2=float(z @ z),
        sum_fz=float(f @ z),
        var_t=var_t,
        var_f=var_f,
        var_z=var_z,
        mean_t=mean_t,
        mean_f=mean_f,
        mean_z=mean_z,
        cov_t_fc2=cov_fz,
        centered=False,
    )
