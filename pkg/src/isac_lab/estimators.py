"""State estimators: concentrated maximum likelihood over (x, v) and the
two-stage fusion pipeline (per-path delay/radial-speed search followed by
information-weighted Gauss-Newton)."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from .errors import (
    DegenerateGeometry,
    EmptyBox,
    InsufficientPaths,
    SingularGeometry,
    WindowMiss,
)
from .geometry import (
    NODE_DISTANCE_FLOOR,
    NetworkLayout,
    PairingMode,
)
from .kernels import accumulate_path_power
from .schedule import HopSchedule, moments
from .signal_model import SlowTimeObservation, _schedules_per_path, steering_vector
from .waveform import WaveformSpec


@dataclass(frozen=True)
class StateEstimate:
    x_hat: np.ndarray
    v_hat: np.ndarray
    objective: float
    iterations: int
    converged: bool


@dataclass(frozen=True)
class PerPathEstimate:
    """Per-path (delay, radial speed) estimate with its information/covariance."""

    tau_hat: float
    r_hat: float
    cov: np.ndarray    # 2 x 2
    info: np.ndarray   # 2 x 2


@dataclass(frozen=True)
class PathNodes:
    """Node pair defining one propagation path."""

    tx: np.ndarray
    rx: np.ndarray
    monostatic: bool

    def geometry(self, x: np.ndarray):
        """(tau*c, g, J_g) pieces at position x; raises on node coincidence."""
        dt = x - self.tx
        rt = float(np.hypot(dt[0], dt[1]))
        if rt < NODE_DISTANCE_FLOOR:
            raise DegenerateGeometry("position on a node")
        ut = dt / rt
        eye = np.eye(2)
        if self.monostatic:
            g = 2.0 * ut
            total_range = 2.0 * rt
            j_g = (2.0 / rt) * (eye - np.outer(ut, ut))
        else:
            dr = x - self.rx
            rr = float(np.hypot(dr[0], dr[1]))
            if rr < NODE_DISTANCE_FLOOR:
                raise DegenerateGeometry("position on a node")
            ur = dr / rr
            g = ut + ur
            total_range = rt + rr
            j_g = (eye - np.outer(ut, ut)) / rt + (eye - np.outer(ur, ur)) / rr
        return total_range, g, j_g


def layout_path_nodes(layout: NetworkLayout) -> list[PathNodes]:
    mono = layout.mode is PairingMode.MONOSTATIC
    return [
        PathNodes(tx=layout.tx_positions[k], rx=layout.rx_positions[l], monostatic=mono)
        for k, l in layout.path_pairs()
    ]


@dataclass(frozen=True)
class SearchBox:
    """Coarse-to-fine search region and resolution targets for the MLE."""

    x_bounds: tuple      # ((x_lo, x_hi), (y_lo, y_hi)) [m]
    v_bounds: tuple      # ((vx_lo, vx_hi), (vy_lo, vy_hi)) [m/s]
    coarse_points: int = 15
    refine_factor: int = 3
    pos_resolution: float = 0.05   # [m]
    vel_resolution: float = 0.05   # [m/s]
    top_k: int = 5

    def __post_init__(self):
        for lo, hi in (*self.x_bounds, *self.v_bounds):
            if not hi > lo:
                raise EmptyBox("search bounds must have positive extent")
        if self.coarse_points < 2:
            raise EmptyBox("need at least two coarse grid points per axis")
        if self.refine_factor < 2:
            raise ValueError("refine factor must be at least 2")
        if self.top_k < 1:
            raise ValueError("keep at least one cell")

    @classmethod
    def around(
        cls,
        x0,
        v0,
        pos_halfwidth: float = 500.0,
        vel_halfwidth: float = 50.0,
        **kwargs,
    ) -> "SearchBox":
        x0 = np.asarray(x0, dtype=float)
        v0 = np.asarray(v0, dtype=float)
        return cls(
            x_bounds=(
                (x0[0] - pos_halfwidth, x0[0] + pos_halfwidth),
                (x0[1] - pos_halfwidth, x0[1] + pos_halfwidth),
            ),
            v_bounds=(
                (v0[0] - vel_halfwidth, v0[0] + vel_halfwidth),
                (v0[1] - vel_halfwidth, v0[1] + vel_halfwidth),
            ),
            **kwargs,
        )


def _batched_objective(
    obs: Sequence[SlowTimeObservation],
    schedules: Sequence[HopSchedule],
    layout: NetworkLayout,
    xs: np.ndarray,
    vs: np.ndarray,
) -> np.ndarray:
    """Concentrated objective for a batch of (x, v) hypotheses."""
    power = np.zeros(xs.shape[0])
    mono = layout.mode is PairingMode.MONOSTATIC
    for ob, sched, (k, l) in zip(obs, schedules, layout.path_pairs()):
        dt = xs - layout.tx_positions[k]
        rt = np.hypot(dt[:, 0], dt[:, 1])
        ut = dt / rt[:, None]
        if mono:
            rr, ur = rt, ut
        else:
            dr = xs - layout.rx_positions[l]
            rr = np.hypot(dr[:, 0], dr[:, 1])
            ur = dr / rr[:, None]
        tau = (rt + rr) / layout.c
        g = ut + ur
        r = np.einsum("ij,ij->i", g, vs)
        accumulate_path_power(
            tau, r, ob.samples, sched.carriers, sched.pulse_times, layout.c, power
        )
    return power


def concentrated_objective(
    obs: Sequence[SlowTimeObservation],
    schedules: Union[HopSchedule, Sequence[HopSchedule]],
    layout: NetworkLayout,
    x,
    v,
) -> float:
    """Sum over paths of |phi(x, v)^H y|^2 / P at a single state hypothesis."""
    scheds = _schedules_per_path(schedules, layout.n_paths)
    if len(obs) != layout.n_paths:
        raise ValueError("one observation per path required")
    xs = np.asarray(x, dtype=float).reshape(1, 2)
    vs = np.asarray(v, dtype=float).reshape(1, 2)
    return float(_batched_objective(obs, scheds, layout, xs, vs)[0])


def mle_estimate(
    obs: Sequence[SlowTimeObservation],
    schedules: Union[HopSchedule, Sequence[HopSchedule]],
    layout: NetworkLayout,
    box: SearchBox,
) -> StateEstimate:
    """Coarse-to-fine maximization of the concentrated objective.

    Evaluates the 4-D coarse grid, keeps the top-K cells, and shrinks the
    cell size by the refine factor around each retained candidate until both
    resolution targets are met. Deterministic for fixed inputs.
    """
    scheds = _schedules_per_path(schedules, layout.n_paths)
    if len(obs) != layout.n_paths:
        raise ValueError("one observation per path required")

    axes = [
        np.linspace(lo, hi, box.coarse_points)
        for lo, hi in (*box.x_bounds, *box.v_bounds)
    ]
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=1)
    vals = _batched_objective(obs, scheds, layout, pts[:, :2], pts[:, 2:])

    order = np.argsort(vals)[::-1][: min(box.top_k, vals.size)]
    candidates = pts[order]
    best_val = float(vals[order[0]])
    best_pt = candidates[0]

    spacing = np.array([ax[1] - ax[0] for ax in axes])
    lo = np.array([b[0] for b in (*box.x_bounds, *box.v_bounds)])
    hi = np.array([b[1] for b in (*box.x_bounds, *box.v_bounds)])
    targets = np.array(
        [box.pos_resolution, box.pos_resolution, box.vel_resolution, box.vel_resolution]
    )
    offsets = np.arange(-box.refine_factor, box.refine_factor + 1)
    local = np.stack(
        [m.ravel() for m in np.meshgrid(*([offsets] * 4), indexing="ij")], axis=1
    )

    levels = 0
    while np.any(spacing > targets):
        spacing = spacing / box.refine_factor
        pts = (candidates[:, None, :] + local[None, :, :] * spacing).reshape(-1, 4)
        pts = np.unique(np.clip(pts, lo, hi), axis=0)
        vals = _batched_objective(obs, scheds, layout, pts[:, :2], pts[:, 2:])
        order = np.argsort(vals)[::-1][: min(box.top_k, vals.size)]
        candidates = pts[order]
        if vals[order[0]] >= best_val:
            best_val = float(vals[order[0]])
            best_pt = candidates[0]
        levels += 1

    return StateEstimate(
        x_hat=best_pt[:2].copy(),
        v_hat=best_pt[2:].copy(),
        objective=best_val,
        iterations=levels,
        converged=True,
    )


def glrt_objective(y: np.ndarray, sched: HopSchedule, tau: float, r: float, c: float) -> float:
    """Gain-concentrated matched-filter power |phi^H y|^2 / P of one path."""
    phi = steering_vector(sched, tau, r, c)
    num = np.vdot(phi, np.asarray(y, dtype=complex))
    return float((num.real**2 + num.imag**2) / sched.n_pulses)


@dataclass(frozen=True)
class StageAWindow:
    """Search window around a prior (tau, r) for the per-path stage.

    Grid spacings default to quarter-resolution sampling: 1/(8 span) in
    delay and c/(8 f_max T_syn) in radial speed.
    """

    tau_center: float
    tau_halfwidth: float
    r_center: float
    r_halfwidth: float
    tau_spacing: Optional[float] = None
    r_spacing: Optional[float] = None
    fine_factor: int = 8


def _window_axis(center: float, halfwidth: float, spacing: float) -> np.ndarray:
    n = max(int(np.ceil(halfwidth / spacing)), 1)
    return center + np.arange(-n, n + 1) * spacing


def _quadratic_peak(values: np.ndarray, idx: int) -> float:
    """Sub-cell peak offset from a 3-point parabola, clamped to half a cell."""
    if idx == 0 or idx == values.size - 1:
        return 0.0
    left, mid, right = values[idx - 1], values[idx], values[idx + 1]
    denom = left - 2.0 * mid + right
    if denom >= 0:
        return 0.0
    return float(np.clip(0.5 * (left - right) / denom, -0.5, 0.5))


def _grid_peak(y, sched, c, taus, rs):
    power = np.zeros(taus.size * rs.size)
    tt, rr = np.meshgrid(taus, rs, indexing="ij")
    accumulate_path_power(
        tt.ravel(), rr.ravel(), y, sched.carriers, sched.pulse_times, c, power
    )
    surface = power.reshape(taus.size, rs.size)
    it, ir = np.unravel_index(np.argmax(surface), surface.shape)
    return surface, it, ir


def stage_a_info(sched: HopSchedule, wf: WaveformSpec, c: float) -> np.ndarray:
    """Per-path (tau, r) information of the slow-time model.

    A = s P Var_f, B = s (P/c) Cov(f_c, z), D = s (P/c^2) Var_z with
    s = 8 pi^2 |alpha|^2 E_s / sigma^2; no fast-time bandwidth term because
    stage A sees slow-time samples only.
    """
    mom = moments(sched, centered=True)
    s = 8.0 * np.pi**2 * abs(wf.alpha) ** 2 * wf.e_s / wf.sigma_w2
    a_k = s * mom.s0 * mom.var_f
    b_k = s * mom.s0 * mom.cov_t_fc2 / c
    d_k = s * mom.s0 * mom.var_z / c**2
    return np.array([[a_k, -b_k], [-b_k, d_k]])


def stage_a(
    y: np.ndarray,
    sched: HopSchedule,
    wf: WaveformSpec,
    window: StageAWindow,
    c: float,
) -> PerPathEstimate:
    """Per-path delay/radial-speed estimate with its information matrix.

    Windowed grid search of the concentrated power, a local fine pass, and
    one quadratic interpolation per axis. A peak on the window boundary
    signals an outage (WindowMiss).
    """
    y = np.asarray(y, dtype=complex)
    f = sched.carriers
    span = float(f.max() - f.min())
    t_syn = max(sched.t_syn, np.finfo(float).tiny)
    tau_spacing = window.tau_spacing
    if tau_spacing is None:
        tau_spacing = 1.0 / (8.0 * span) if span > 0 else window.tau_halfwidth / 8.0
    r_spacing = window.r_spacing
    if r_spacing is None:
        r_spacing = c / (8.0 * float(np.abs(f).max()) * t_syn)
    tau_spacing = min(tau_spacing, window.tau_halfwidth / 2.0)
    r_spacing = min(r_spacing, window.r_halfwidth / 2.0)

    taus = _window_axis(window.tau_center, window.tau_halfwidth, tau_spacing)
    rs = _window_axis(window.r_center, window.r_halfwidth, r_spacing)
    _, it, ir = _grid_peak(y, sched, c, taus, rs)
    if it in (0, taus.size - 1) or ir in (0, rs.size - 1):
        raise WindowMiss("stage A peak on the window boundary")

    fine_tau = taus[it] + np.linspace(-tau_spacing, tau_spacing, 2 * window.fine_factor + 1)
    fine_r = rs[ir] + np.linspace(-r_spacing, r_spacing, 2 * window.fine_factor + 1)
    surface, jt, jr = _grid_peak(y, sched, c, fine_tau, fine_r)

    dtau = fine_tau[1] - fine_tau[0]
    dr = fine_r[1] - fine_r[0]
    tau_hat = fine_tau[jt] + dtau * _quadratic_peak(surface[:, jr], jt)
    r_hat = fine_r[jr] + dr * _quadratic_peak(surface[jt, :], jr)

    info = stage_a_info(sched, wf, c)
    det = info[0, 0] * info[1, 1] - info[0, 1] ** 2
    if det <= 0:
        raise SingularGeometry("stage A information matrix is singular")
    cov = np.array([[info[1, 1], -info[0, 1]], [-info[1, 0], info[0, 0]]]) / det
    return PerPathEstimate(tau_hat=float(tau_hat), r_hat=float(r_hat), cov=cov, info=info)


@dataclass(frozen=True)
class GnConfig:
    """Gauss-Newton fusion settings."""

    max_iter: int = 50
    step_tol: float = 1e-6          # scaled per-axis against the resolutions
    pos_resolution: float = 0.05    # [m]
    vel_resolution: float = 0.05    # [m/s]
    cost_tol: float = 1e-9
    cond_guard: float = 1e10
    damping_growth: float = 10.0
    damping_shrink: float = 3.0
    max_inner: int = 12


def _fusion_residuals(estimates, nodes, x, v, c):
    out = []
    for est, node in zip(estimates, nodes):
        total_range, g, j_g = node.geometry(x)
        res = np.array([est.tau_hat - total_range / c, est.r_hat - float(g @ v)])
        out.append((res, g, j_g))
    return out


def _fusion_cost(residuals, estimates):
    return float(
        sum(res @ est.info @ res for (res, _g, _jg), est in zip(residuals, estimates))
    )


def stage_b(
    estimates: Sequence[PerPathEstimate],
    layout: NetworkLayout,
    prior: StateEstimate,
    config: GnConfig = GnConfig(),
    path_indices: Optional[Sequence[int]] = None,
) -> StateEstimate:
    """Information-weighted Gauss-Newton fusion of per-path estimates.

    ``path_indices`` selects the layout paths the estimates correspond to
    (all paths when omitted). Damping grows whenever the normal matrix is
    ill-conditioned or a step would increase the weighted cost, so accepted
    iterates never increase it.
    """
    nodes = layout_path_nodes(layout)
    if path_indices is not None:
        nodes = [nodes[i] for i in path_indices]
    if len(estimates) != len(nodes):
        raise ValueError("one estimate per selected path required")
    if len(estimates) < 2:
        raise InsufficientPaths(f"fusion needs at least two paths, got {len(estimates)}")

    c = layout.c
    x = np.asarray(prior.x_hat, dtype=float).copy()
    v = np.asarray(prior.v_hat, dtype=float).copy()
    scale = np.array(
        [config.pos_resolution, config.pos_resolution,
         config.vel_resolution, config.vel_resolution]
    )

    residuals = _fusion_residuals(estimates, nodes, x, v, c)
    cost = _fusion_cost(residuals, estimates)
    damping = 0.0
    converged = False
    it = 0
    for it in range(1, config.max_iter + 1):
        normal = np.zeros((4, 4))
        rhs = np.zeros(4)
        for (res, g, j_g), est in zip(residuals, estimates):
            h_k = np.zeros((2, 4))
            h_k[0, :2] = g / c
            h_k[1, :2] = j_g @ v
            h_k[1, 2:] = g
            normal += h_k.T @ est.info @ h_k
            rhs += h_k.T @ est.info @ res

        if damping == 0.0 and np.linalg.cond(normal) > config.cond_guard:
            damping = 1e-6

        accepted = False
        for _ in range(config.max_inner):
            damped = normal + damping * np.diag(np.diag(normal))
            try:
                delta = np.linalg.solve(damped, rhs)
            except np.linalg.LinAlgError:
                damping = max(damping, 1e-12) * config.damping_growth
                continue
            x_new = x + delta[:2]
            v_new = v + delta[2:]
            try:
                residuals_new = _fusion_residuals(estimates, nodes, x_new, v_new, c)
            except DegenerateGeometry:
                damping = max(damping, 1e-12) * config.damping_growth
                continue
            cost_new = _fusion_cost(residuals_new, estimates)
            if cost_new <= cost * (1.0 + 1e-12) + 1e-300:
                accepted = True
                break
            damping = max(damping, 1e-12) * config.damping_growth
        if not accepted:
            break

        rel_decrease = abs(cost - cost_new) / max(abs(cost), np.finfo(float).tiny)
        x, v, residuals, cost = x_new, v_new, residuals_new, cost_new
        damping /= config.damping_shrink
        if damping < 1e-14:
            damping = 0.0
        step_scaled = float(np.max(np.abs(delta) / scale))
        if step_scaled < config.step_tol and rel_decrease < config.cost_tol:
            converged = True
            break

    return StateEstimate(
        x_hat=x, v_hat=v, objective=cost, iterations=it, converged=converged
    )


def tsif_estimate(
    obs: Sequence[SlowTimeObservation],
    schedules: Union[HopSchedule, Sequence[HopSchedule]],
    layout: NetworkLayout,
    waveforms: Sequence[WaveformSpec],
    prior: StateEstimate,
    tau_halfwidth: float,
    r_halfwidth: float,
    gn_config: GnConfig = GnConfig(),
):
    """Two-stage pipeline from a prior state; returns (estimate, n_outage).

    Stage A windows are centered on the prior's per-path (tau, r); paths
    whose peak hits the window boundary are dropped from fusion. Fewer than
    two surviving paths raises InsufficientPaths (a trial-level outage).
    """
    scheds = _schedules_per_path(schedules, layout.n_paths)
    nodes = layout_path_nodes(layout)
    x0 = np.asarray(prior.x_hat, dtype=float)
    v0 = np.asarray(prior.v_hat, dtype=float)
    survivors = []
    kept_idx = []
    n_outage = 0
    for idx, (ob, sched, wf, node) in enumerate(zip(obs, scheds, waveforms, nodes)):
        total_range, g, _ = node.geometry(x0)
        window = StageAWindow(
            tau_center=total_range / layout.c,
            tau_halfwidth=tau_halfwidth,
            r_center=float(g @ v0),
            r_halfwidth=r_halfwidth,
        )
        try:
            survivors.append(stage_a(ob.samples, sched, wf, window, layout.c))
            kept_idx.append(idx)
        except WindowMiss:
            n_outage += 1
    if len(survivors) < 2:
        raise InsufficientPaths(
            f"only {len(survivors)} stage-A estimates survived the window"
        )
    fused = stage_b(survivors, layout, prior, gn_config, path_indices=kept_idx)
    return fused, n_outage
