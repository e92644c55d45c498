"""Seeded Monte Carlo experiments: MSE-vs-SNR tables, bound sweeps over
synthesized bandwidth/time, and geometry coverage heatmaps.

Every trial derives its generator from (master seed, point index, trial
index), so tables are bit-identical across re-runs and worker counts.
"""

from __future__ import annotations

import csv
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from .errors import DegenerateGeometry, IsacLabError
from .estimators import (
    GnConfig,
    SearchBox,
    StateEstimate,
    mle_estimate,
    tsif_estimate,
)
from .fisher import CrlbResult, network_crlb
from .geometry import NetworkLayout, PairingMode, TargetState
from .schedule import HopSchedule, center_times, make_schedule
from .signal_model import synthesize
from .waveform import WaveformSpec, sigma_from_snr


@dataclass(frozen=True)
class ScalePreset:
    """Carrier/span/aperture preset; desk scale keeps grid searches sane."""

    f0: float
    span: float
    n_pulses: int
    pri: float
    beta: float


# Full 28 GHz configuration used for analytic sweeps and heatmaps.
FULL_SCALE = ScalePreset(f0=28e9, span=2e9, n_pulses=12, pri=1e-3, beta=48e6)
# Frequency/time-scaled analog for Monte Carlo estimation runs; beta is zero
# because the synthesized observations carry slow-time information only.
DESK_SCALE = ScalePreset(f0=1e6, span=4e5, n_pulses=12, pri=1.0, beta=0.0)

SCALES = {"full": FULL_SCALE, "desk": DESK_SCALE}

DEFAULT_TARGET_POSITION = (300.0, 200.0)
DEFAULT_TARGET_VELOCITY = (20.0, 15.0)
RING_RADIUS = 1000.0


@dataclass(frozen=True)
class Scenario:
    """A layout, target, shared hop schedule, and signal-strength defaults."""

    layout: NetworkLayout
    target: TargetState
    schedule: HopSchedule
    e_s: float = 1.0
    beta: float = 0.0
    alpha_mag: float = 1.0
    label: str = "scenario"

    def waveforms(
        self, snr_db: float, rng: Optional[np.random.Generator] = None
    ) -> list[WaveformSpec]:
        """Per-path waveform specs at the given SNR; seeded uniform gain
        phases when a generator is supplied, unit gains otherwise."""
        sigma2 = sigma_from_snr(snr_db, self.alpha_mag, self.e_s)
        n = self.layout.n_paths
        if rng is None:
            alphas = [self.alpha_mag + 0.0j] * n
        else:
            phases = rng.uniform(0.0, 2.0 * np.pi, size=n)
            alphas = [self.alpha_mag * np.exp(1j * ph) for ph in phases]
        return [
            WaveformSpec(alpha=a, e_s=self.e_s, beta=self.beta, sigma_w2=sigma2)
            for a in alphas
        ]

    def crlb(self, snr_db: float) -> CrlbResult:
        return network_crlb(
            self.layout, self.target, self.schedule, self.waveforms(snr_db)
        )


def ring_positions(n: int, radius: float = RING_RADIUS, phase_deg: float = 90.0) -> np.ndarray:
    ang = np.deg2rad(phase_deg) + 2.0 * np.pi * np.arange(n) / n
    return np.stack([radius * np.cos(ang), radius * np.sin(ang)], axis=1)


def experiment_schedule(
    scale: ScalePreset,
    kind: str = "palindromic",
    seed: Optional[int] = 7,
    n_pulses: Optional[int] = None,
    span: Optional[float] = None,
) -> HopSchedule:
    """Shared scenario schedule, slow-time centered at the CPI midpoint.

    Palindromic hops are the default: they cover the span, are deterministic,
    and decouple delay from velocity exactly, which is the regime the
    reference experiments operate in.
    """
    sched = make_schedule(
        kind,
        n_pulses if n_pulses is not None else scale.n_pulses,
        scale.pri,
        scale.f0,
        span if span is not None else scale.span,
        seed=seed,
    )
    return center_times(sched)[0]


def monostatic_scenario(
    n_bs: int = 5,
    scale: ScalePreset = DESK_SCALE,
    hop_kind: str = "palindromic",
    target_position=DEFAULT_TARGET_POSITION,
    target_velocity=DEFAULT_TARGET_VELOCITY,
    **schedule_kwargs,
) -> Scenario:
    """Colocated BS ring (radius 1 km) observing the reference target."""
    pos = ring_positions(n_bs)
    layout = NetworkLayout(pos, pos, mode=PairingMode.MONOSTATIC)
    return Scenario(
        layout=layout,
        target=TargetState(np.asarray(target_position), np.asarray(target_velocity)),
        schedule=experiment_schedule(scale, hop_kind, **schedule_kwargs),
        beta=scale.beta,
        label=f"mono{n_bs}",
    )


def multistatic_scenario(
    n_tx: int = 3,
    n_rx: int = 3,
    scale: ScalePreset = DESK_SCALE,
    hop_kind: str = "palindromic",
    target_position=DEFAULT_TARGET_POSITION,
    target_velocity=DEFAULT_TARGET_VELOCITY,
    **schedule_kwargs,
) -> Scenario:
    """Separate tx/rx rings of equal radius, angularly interleaved."""
    tx = ring_positions(n_tx, phase_deg=90.0)
    rx = ring_positions(n_rx, phase_deg=90.0 + 180.0 / n_rx)
    layout = NetworkLayout(tx, rx, mode=PairingMode.MULTISTATIC)
    return Scenario(
        layout=layout,
        target=TargetState(np.asarray(target_position), np.asarray(target_velocity)),
        schedule=experiment_schedule(scale, hop_kind, **schedule_kwargs),
        beta=scale.beta,
        label=f"multi{n_tx}x{n_rx}",
    )


@dataclass(frozen=True)
class ExperimentConfig:
    """Monte Carlo settings shared by the estimation experiments."""

    scenario: Scenario
    trials: int = 200
    master_seed: int = 20260810
    snr_grid_db: tuple = (-10.0, 0.0, 10.0, 20.0, 30.0)
    pos_halfwidth: float = 500.0
    vel_halfwidth: float = 50.0
    coarse_points: int = 15
    refine_factor: int = 3
    pos_resolution: float = 0.05
    vel_resolution: float = 0.05
    top_k: int = 5
    workers: int = 1

    def search_box(self) -> SearchBox:
        return SearchBox.around(
            self.scenario.target.position,
            self.scenario.target.velocity,
            pos_halfwidth=self.pos_halfwidth,
            vel_halfwidth=self.vel_halfwidth,
            coarse_points=self.coarse_points,
            refine_factor=self.refine_factor,
            pos_resolution=self.pos_resolution,
            vel_resolution=self.vel_resolution,
            top_k=self.top_k,
        )


@dataclass(frozen=True)
class ResultRow:
    """One table row; sweep holds the experiment's sweep coordinates."""

    experiment: str
    estimator: str
    sweep: dict
    mse_pos: Optional[float]
    mse_vel: Optional[float]
    crlb_pos: Optional[float]
    crlb_vel: Optional[float]
    outage_rate: Optional[float]
    trials: int
    seed: int


def trial_rng(master_seed: int, point_index: int, trial_index: int) -> np.random.Generator:
    """Counter-style seed derivation: independent of execution order."""
    return np.random.default_rng(
        np.random.SeedSequence([master_seed, point_index, trial_index])
    )


def _run_one_trial(cfg: ExperimentConfig, estimators, snr_db, point_idx, trial_idx):
    """One synthesized trial.

    Returns {estimator: (errors | None, had_outage)} where errors is the
    squared position/velocity error pair, None marks a failed trial
    (excluded from the MSE), and had_outage flags any window-miss event,
    including per-path drops that still left enough paths to fuse.
    """
    scen = cfg.scenario
    rng = trial_rng(cfg.master_seed, point_idx, trial_idx)
    wfs = scen.waveforms(snr_db, rng=rng)
    obs = synthesize(scen.layout, scen.target, scen.schedule, wfs, rng)
    truth_x = scen.target.position
    truth_v = scen.target.velocity
    out = {}
    for name in estimators:
        had_outage = False
        try:
            if name == "mle":
                est = mle_estimate(obs, scen.schedule, scen.layout, cfg.search_box())
            elif name == "tsif":
                prior = StateEstimate(
                    x_hat=truth_x, v_hat=truth_v, objective=0.0, iterations=0, converged=True
                )
                est, n_dropped = tsif_estimate(
                    obs,
                    scen.schedule,
                    scen.layout,
                    wfs,
                    prior,
                    tau_halfwidth=2.0 * cfg.pos_halfwidth / scen.layout.c,
                    r_halfwidth=2.0 * cfg.vel_halfwidth,
                    gn_config=GnConfig(
                        pos_resolution=cfg.pos_resolution,
                        vel_resolution=cfg.vel_resolution,
                    ),
                )
                had_outage = n_dropped > 0
            else:
                raise ValueError(f"unknown estimator {name!r}")
            errors = (
                float(np.sum((est.x_hat - truth_x) ** 2)),
                float(np.sum((est.v_hat - truth_v) ** 2)),
            )
            out[name] = (errors, had_outage)
        except IsacLabError:
            out[name] = (None, True)  # full outage: excluded from the MSE
    return out


def mse_vs_snr(
    cfg: ExperimentConfig, estimators: Sequence[str] = ("mle", "tsif")
) -> list[ResultRow]:
    """Monte Carlo MSE against the bound per SNR point.

    Outages (window misses leaving under two paths, or any estimator-level
    failure) are excluded from the MSE and reported via outage_rate.
    """
    rows = []
    for point_idx, snr_db in enumerate(cfg.snr_grid_db):
        bound = cfg.scenario.crlb(snr_db)
        results = _map_trials(cfg, estimators, snr_db, point_idx)
        for name in estimators:
            outcomes = [res[name] for res in results]
            good = [errs for errs, _ in outcomes if errs is not None]
            n_outage = sum(1 for _, flagged in outcomes if flagged)
            mse_pos = float(np.mean([e[0] for e in good])) if good else None
            mse_vel = float(np.mean([e[1] for e in good])) if good else None
            rows.append(
                ResultRow(
                    experiment="mse_vs_snr",
                    estimator=name,
                    sweep={"snr_db": float(snr_db)},
                    mse_pos=mse_pos,
                    mse_vel=mse_vel,
                    crlb_pos=bound.pos_trace,
                    crlb_vel=bound.vel_trace,
                    outage_rate=n_outage / cfg.trials,
                    trials=cfg.trials,
                    seed=cfg.master_seed,
                )
            )
    return rows


def _map_trials(cfg, estimators, snr_db, point_idx):
    args = [(cfg, tuple(estimators), snr_db, point_idx, t) for t in range(cfg.trials)]
    if cfg.workers <= 1:
        return [_run_one_trial(*a) for a in args]
    with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
        return list(pool.map(_trial_star, args, chunksize=max(1, cfg.trials // (4 * cfg.workers))))


def _trial_star(args):
    return _run_one_trial(*args)


DEFAULT_SPANS_MHZ = (50.0, 100.0, 200.0, 400.0, 700.0, 1000.0, 1400.0, 2000.0)
DEFAULT_PULSES = (4, 8, 12, 16, 24, 32, 48, 64)


def crlb_sweep(
    axis: str = "bandwidth",
    scale: ScalePreset = FULL_SCALE,
    spans_mhz: Sequence[float] = DEFAULT_SPANS_MHZ,
    pulses: Sequence[int] = DEFAULT_PULSES,
    fixed_pulses: int = 12,
    fixed_span_mhz: float = 2000.0,
    snr_db: float = 0.0,
    hop_kind: str = "palindromic",
    master_seed: int = 0,
    scenarios: Optional[Sequence] = None,
) -> list[ResultRow]:
    """Analytic bound traces along synthesized bandwidth and/or pulse count
    for the multistatic 3x3 and monostatic 5-BS reference layouts."""
    if axis not in ("bandwidth", "pulses", "joint"):
        raise ValueError("axis must be bandwidth, pulses, or joint")
    if axis == "bandwidth":
        grid = [(s, fixed_pulses) for s in spans_mhz]
    elif axis == "pulses":
        grid = [(fixed_span_mhz, p) for p in pulses]
    else:
        grid = [(s, p) for s in spans_mhz for p in pulses]

    builders = scenarios or (
        lambda **kw: multistatic_scenario(3, 3, **kw),
        lambda **kw: monostatic_scenario(5, **kw),
    )
    rows = []
    for build in builders:
        for span_mhz, n_pulses in grid:
            scen = build(
                scale=scale,
                hop_kind=hop_kind,
                span=span_mhz * 1e6,
                n_pulses=int(n_pulses),
            )
            try:
                bound = scen.crlb(snr_db)
                crlb_pos, crlb_vel = bound.pos_trace, bound.vel_trace
            except IsacLabError:
                crlb_pos = crlb_vel = None  # flagged singular row
            rows.append(
                ResultRow(
                    experiment="crlb_sweep",
                    estimator="crlb",
                    sweep={
                        "layout": scen.label,
                        "span_mhz": float(span_mhz),
                        "pulses": int(n_pulses),
                    },
                    mse_pos=None,
                    mse_vel=None,
                    crlb_pos=crlb_pos,
                    crlb_vel=crlb_vel,
                    outage_rate=None,
                    trials=0,
                    seed=master_seed,
                )
            )
    return rows


def crlb_heatmap(
    scenario_builder,
    grid_halfwidth: float = 2000.0,
    grid_points: int = 41,
    threshold_pos: float = 2e-5,
    snr_db: float = 10.0,
    scale: ScalePreset = FULL_SCALE,
    hop_kind: str = "palindromic",
    master_seed: int = 0,
    velocity=DEFAULT_TARGET_VELOCITY,
):
    """Position-bound heatmap over a square grid; returns (rows, coverage).

    Coverage is the fraction of grid points whose position bound trace falls
    below the threshold; points coincident with a BS are skipped, marked by
    empty bound columns, and count as uncovered.
    """
    if grid_points < 2:
        raise ValueError("grid needs at least two points per axis")
    axis = np.linspace(-grid_halfwidth, grid_halfwidth, grid_points)
    scen0 = scenario_builder(scale=scale, hop_kind=hop_kind)
    rows = []
    below = 0
    for x in axis:
        for y in axis:
            scen = replace(
                scen0,
                target=TargetState(np.array([x, y]), np.asarray(velocity, dtype=float)),
            )
            try:
                bound = scen.crlb(snr_db)
                pos_trace = bound.pos_trace
                if pos_trace < threshold_pos:
                    below += 1
            except (DegenerateGeometry, IsacLabError):
                pos_trace = None
            rows.append(
                ResultRow(
                    experiment="crlb_heatmap",
                    estimator="crlb",
                    sweep={"layout": scen0.label, "x_m": float(x), "y_m": float(y)},
                    mse_pos=None,
                    mse_vel=None,
                    crlb_pos=pos_trace,
                    crlb_vel=None,
                    outage_rate=None,
                    trials=0,
                    seed=master_seed,
                )
            )
    coverage = below / (grid_points * grid_points)
    return rows, coverage


SCHEMA_PREFIX = ("experiment", "estimator")
SCHEMA_SUFFIX = (
    "mse_pos",
    "mse_vel",
    "crlb_pos",
    "crlb_vel",
    "outage_rate",
    "trials",
    "seed",
)


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, float):
        return repr(float(value))
    return str(value)


def write_csv(rows: Sequence[ResultRow], path, sweep_cols: Optional[Sequence[str]] = None):
    """Write rows under the fixed schema
    experiment, estimator, <sweep cols...>, mse_pos, mse_vel, crlb_pos,
    crlb_vel, outage_rate, trials, seed. Float formatting is shortest
    round-trip so identical results produce identical bytes.
    """
    if sweep_cols is None:
        sweep_cols = list(rows[0].sweep.keys()) if rows else []
    header = [*SCHEMA_PREFIX, *sweep_cols, *SCHEMA_SUFFIX]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow(
                [
                    row.experiment,
                    row.estimator,
                    *(_fmt(row.sweep.get(col)) for col in sweep_cols),
                    _fmt(row.mse_pos),
                    _fmt(row.mse_vel),
                    _fmt(row.crlb_pos),
                    _fmt(row.crlb_vel),
                    _fmt(row.outage_rate),
                    _fmt(row.trials),
                    _fmt(row.seed),
                ]
            )
