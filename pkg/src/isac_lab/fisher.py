"""Fisher information blocks, amplitude elimination, network assembly,
closed-form and data-averaged position/velocity bounds, plus an independent
finite-difference information oracle.

Parameter order for per-path blocks is (tau, v_x, v_y, Re alpha, Im alpha).
All expressions were validated entrywise against the finite-difference
oracle; in particular the delay-velocity coupling uses the mean-removed
mixed-sequence covariance Cov(f_c, z), which is what eliminating the
unknown complex gain actually leaves behind.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .errors import NotCentered, SingularGeometry, StepTooLarge
from .geometry import NetworkLayout, PathGeometry, TargetState, path_geometries
from .schedule import HopSchedule, ScheduleMoments, moments
from .signal_model import _schedules_per_path
from .waveform import OfdmSpec, WaveformSpec, draw_ofdm_beta

CONDITION_GUARD = 1e12


@dataclass(frozen=True)
class PerPathFim:
    """Per-path information: full 5x5 over (tau, v, Re a, Im a) and the
    3x3 (tau, v) block after amplitude elimination."""

    full: np.ndarray
    reduced: np.ndarray


@dataclass(frozen=True)
class PathWeights:
    """Scalar signal weights of one path: delay, velocity, and coupling."""

    w_tau: float    # [1/s^2]
    w_v: float      # [s^2/m^2 scale]
    w_cross: float


@dataclass(frozen=True)
class NetworkFim:
    """Assembled network information in (tau_1..tau_L, v) and (x, v) forms."""

    eta_fim: np.ndarray     # (L+2) x (L+2)
    state_fim: np.ndarray   # 4 x 4
    g_x: np.ndarray         # 2 x 2
    g_v: np.ndarray         # 2 x 2
    g_cross: np.ndarray     # 2 x 2
    c: float


@dataclass(frozen=True)
class CrlbResult:
    """Position/velocity bound blocks plus the uncoupled references."""

    cov_bound: np.ndarray       # 4 x 4
    pos_block: np.ndarray       # 2 x 2 [m^2]
    vel_block: np.ndarray       # 2 x 2 [m^2/s^2]
    pos_trace: float
    vel_trace: float
    pos_uncoupled: np.ndarray   # c^2 G_x^-1
    vel_uncoupled: np.ndarray   # G_v^-1


def _inv2(m: np.ndarray, what: str) -> np.ndarray:
    """Closed-form 2x2 inverse with a conditioning guard."""
    if np.linalg.cond(m) > CONDITION_GUARD:
        raise SingularGeometry(f"{what} condition number exceeds {CONDITION_GUARD:g}")
    a, b = m[0, 0], m[0, 1]
    c_, d = m[1, 0], m[1, 1]
    det = a * d - b * c_
    return np.array([[d, -b], [-c_, a]]) / det


def per_path_fim(
    mom: ScheduleMoments,
    pg: PathGeometry,
    wf: WaveformSpec,
    v: Optional[np.ndarray] = None,
) -> PerPathFim:
    """Per-path 5x5 Fisher information and its amplitude-eliminated 3x3.

    With raw moments the amplitude cross blocks carry the carrier sum and
    the mixed-sequence sum; with centered moments they vanish and the
    (tau, v) block is already the eliminated information. The blocks do not
    depend on the evaluation velocity (phases are linear in v); ``v`` is
    accepted for interface symmetry.
    """
    if mom.centered and (mom.f1 != 0.0 or mom.sum_z != 0.0):
        raise NotCentered("centered moments carry nonzero carrier or mixed sums")
    alpha = complex(wf.alpha)
    g = pg.g
    c = pg.c
    s = 8.0 * np.pi**2 * abs(alpha) ** 2 * wf.e_s / wf.sigma_w2

    full = np.zeros((5, 5))
    full[0, 0] = s * (wf.beta**2 * mom.s0 + mom.f2)
    full[1:3, 1:3] = s * (mom.sum_z2 / c**2) * np.outer(g, g)
    full[0, 1:3] = -s * (mom.sum_fz / c) * g
    full[1:3, 0] = full[0, 1:3]
    full[3:, 3:] = (2.0 * mom.s0 * wf.e_s / wf.sigma_w2) * np.eye(2)
    amp_scale = 4.0 * np.pi * wf.e_s / wf.sigma_w2
    full[0, 3:] = amp_scale * mom.f1 * np.array([alpha.imag, -alpha.real])
    full[3:, 0] = full[0, 3:]
    full[1:3, 3:] = (amp_scale * mom.sum_z / c) * np.outer(
        g, np.array([-alpha.imag, alpha.real])
    )
    full[3:, 1:3] = full[1:3, 3:].T
    return PerPathFim(full=full, reduced=eliminate_amplitude_matrix(full))


def eliminate_amplitude_matrix(full: np.ndarray) -> np.ndarray:
    """Schur complement of the (tau, v) block over the gain block."""
    a = full[:3, :3]
    b = full[:3, 3:]
    d = full[3:, 3:]
    return a - b @ np.linalg.solve(d, b.T)


def eliminate_amplitude(ppf: PerPathFim) -> np.ndarray:
    return eliminate_amplitude_matrix(ppf.full)


def path_weights(mom: ScheduleMoments, wf: WaveformSpec) -> PathWeights:
    """Amplitude-eliminated per-path signal weights.

    w_tau   = (8 pi^2/sigma^2) |a|^2 P E_s (beta^2 + Var_f)
    w_v     = (8 pi^2/sigma^2) |a|^2 E_s (P / c^2) Var_z
    w_cross = -(8 pi^2/sigma^2) |a|^2 E_s (P / c) Cov(f_c, z)

    Var_z and Cov(f_c, z) are moments of the mixed sequence z_p = t_p f_cp;
    centered moments required so the weights match the eliminated blocks.
    """
    if not mom.centered:
        raise NotCentered("path weights require centered schedule moments")
    from .geometry import SPEED_OF_LIGHT

    return _weights_from(mom, wf, SPEED_OF_LIGHT)


def _weights_from(mom: ScheduleMoments, wf: WaveformSpec, c: float) -> PathWeights:
    s = 8.0 * np.pi**2 * abs(wf.alpha) ** 2 * wf.e_s / wf.sigma_w2
    p = mom.s0
    return PathWeights(
        w_tau=s * p * (wf.beta**2 + mom.var_f),
        w_v=s * p * mom.var_z / c**2,
        w_cross=-s * p * mom.cov_t_fc2 / c,
    )


def path_weights_second_moment(mom: ScheduleMoments, wf: WaveformSpec, c: float) -> PathWeights:
    """Comparison variant keeping the uncentered mixed power sum_z2 in w_v.

    This is the form obtained when the gain-velocity cross information is
    (incorrectly) dropped before elimination; retained for comparison only.
    """
    s = 8.0 * np.pi**2 * abs(wf.alpha) ** 2 * wf.e_s / wf.sigma_w2
    return PathWeights(
        w_tau=s * mom.s0 * (wf.beta**2 + mom.var_f),
        w_v=s * mom.sum_z2 / c**2,
        w_cross=-s * mom.s0 * mom.cov_t_fc2 / c,
    )


def assemble_eta_fim(
    weights: Sequence[PathWeights], geometries: Sequence[PathGeometry]
) -> np.ndarray:
    """Network information in (tau_1..tau_L, v): diagonal delay block,
    rank-accumulated velocity block, per-row coupling columns."""
    if len(weights) != len(geometries):
        raise ValueError("weights and geometries must pair one-to-one")
    n = len(weights)
    out = np.zeros((n + 2, n + 2))
    for i, (w, pg) in enumerate(zip(weights, geometries)):
        out[i, i] = w.w_tau
        out[i, n:] = w.w_cross * pg.g
        out[n:, i] = out[i, n:]
        out[n:, n:] += w.w_v * np.outer(pg.g, pg.g)
    return out


def geometry_weighted_sums(
    weights: Sequence[PathWeights], geometries: Sequence[PathGeometry]
):
    """G_x, G_v, G_cross as geometry-weighted outer-product sums."""
    g_x = np.zeros((2, 2))
    g_v = np.zeros((2, 2))
    g_c = np.zeros((2, 2))
    for w, pg in zip(weights, geometries):
        gg = np.outer(pg.g, pg.g)
        g_x += w.w_tau * gg
        g_v += w.w_v * gg
        g_c += w.w_cross * gg
    return g_x, g_v, g_c


def chain_to_state(eta_fim: np.ndarray, delay_jac: np.ndarray, c: float):
    """Chain-rule the (tau, v) information to (x, v) via the delay Jacobian.

    Returns the 4x4 state FIM along with G_x, G_v, G_cross recovered from
    its blocks (state_fim = [[G_x/c^2, G_x/c], ...] structure).
    """
    n = delay_jac.shape[0]
    if eta_fim.shape != (n + 2, n + 2):
        raise ValueError("eta_fim size does not match the delay Jacobian")
    g_full = np.zeros((n + 2, 4))
    g_full[:n, :2] = delay_jac
    g_full[n:, 2:] = np.eye(2)
    state = g_full.T @ eta_fim @ g_full
    g_x = c**2 * state[:2, :2]
    g_cross = c * state[:2, 2:]
    g_v = state[2:, 2:]
    return state, g_x, g_v, g_cross


def crlb(g_x: np.ndarray, g_v: np.ndarray, g_cross: np.ndarray, c: float) -> CrlbResult:
    """Closed-form position/velocity bounds from the geometry-weighted sums.

    CRLB(x) = c^2 (G_x - G_x G_v^-1 G_x)^-1 with G_cross in the middle
    factor, CRLB(v) symmetrically; both via 2x2 Schur complements. Also
    carries the uncoupled references c^2 G_x^-1 and G_v^-1.
    """
    g_v_inv = _inv2(g_v, "G_v")
    g_x_inv = _inv2(g_x, "G_x")
    pos_block = c**2 * _inv2(g_x - g_cross @ g_v_inv @ g_cross, "position Schur")
    vel_block = _inv2(g_v - g_cross @ g_x_inv @ g_cross, "velocity Schur")
    off = -pos_block @ g_cross @ g_v_inv / c  # -S_A^-1 B C^-1 with the c scalings
    cov = np.zeros((4, 4))
    cov[:2, :2] = pos_block
    cov[2:, 2:] = vel_block
    cov[:2, 2:] = off
    cov[2:, :2] = off.T
    return CrlbResult(
        cov_bound=cov,
        pos_block=pos_block,
        vel_block=vel_block,
        pos_trace=float(np.trace(pos_block)),
        vel_trace=float(np.trace(vel_block)),
        pos_uncoupled=c**2 * g_x_inv,
        vel_uncoupled=g_v_inv,
    )


def network_fim(
    layout: NetworkLayout,
    target: TargetState,
    schedules: Union[HopSchedule, Sequence[HopSchedule]],
    waveforms: Sequence[WaveformSpec],
) -> NetworkFim:
    """Assemble the network information for a full scenario."""
    pgs = path_geometries(layout, target)
    scheds = _schedules_per_path(schedules, len(pgs))
    if len(waveforms) != len(pgs):
        raise ValueError(f"expected {len(pgs)} waveform specs, got {len(waveforms)}")
    weights = [
        _weights_from(moments(sched, centered=True), wf, layout.c)
        for sched, wf in zip(scheds, waveforms)
    ]
    eta = assemble_eta_fim(weights, pgs)
    g_x, g_v, g_c = geometry_weighted_sums(weights, pgs)
    state = np.zeros((4, 4))
    state[:2, :2] = g_x / layout.c**2
    state[:2, 2:] = g_c / layout.c
    state[2:, :2] = g_c / layout.c
    state[2:, 2:] = g_v
    return NetworkFim(eta_fim=eta, state_fim=state, g_x=g_x, g_v=g_v, g_cross=g_c, c=layout.c)


def network_crlb(
    layout: NetworkLayout,
    target: TargetState,
    schedules: Union[HopSchedule, Sequence[HopSchedule]],
    waveforms: Sequence[WaveformSpec],
) -> CrlbResult:
    net = network_fim(layout, target, schedules, waveforms)
    return crlb(net.g_x, net.g_v, net.g_cross, net.c)


def numerical_fim(
    mu: Callable[[np.ndarray], np.ndarray],
    eta: np.ndarray,
    sigma_w2: float,
    steps: Sequence[float],
    check: bool = True,
) -> np.ndarray:
    """Finite-difference Fisher information of a complex-Gaussian mean model.

    J_ij = (2/sigma^2) Re{(d mu/d eta_i)^H (d mu/d eta_j)} with central
    differences. The trusted independent oracle for the analytic blocks.
    With ``check`` on, the step is halved and any entry moving by more than
    5 percent (relative, floored at 1e-12 of the Frobenius norm) raises
    StepTooLarge.
    """
    eta = np.asarray(eta, dtype=float)
    steps = np.asarray(steps, dtype=float)
    if steps.shape != eta.shape:
        raise ValueError("one step per parameter required")

    def fd(h):
        cols = []
        for i in range(eta.size):
            e = np.zeros_like(eta)
            e[i] = h[i]
            cols.append((mu(eta + e) - mu(eta - e)) / (2.0 * h[i]))
        d = np.stack(cols, axis=1)
        return (2.0 / sigma_w2) * np.real(d.conj().T @ d)

    j = fd(steps)
    if check:
        j_half = fd(steps / 2.0)
        floor = 1e-12 * np.linalg.norm(j_half)
        rel = np.abs(j - j_half) / (np.abs(j_half) + floor)
        if np.any(rel > 0.05):
            raise StepTooLarge(
                f"fd self-check failed: max entry change {rel.max():.3g} on halving"
            )
        j = j_half
    return j


def slow_fast_mean(
    sched: HopSchedule,
    g: np.ndarray,
    c: float,
    e_s: float = 1.0,
    fast_freqs: Optional[np.ndarray] = None,
) -> Callable[[np.ndarray], np.ndarray]:
    """Separable mean model mu(eta), eta = (tau, v_x, v_y, Re a, Im a).

    Slow time carries the steering phases; the optional fast-time factor is
    a centered spectral comb whose rms width plays the effective bandwidth.
    Built from bare complex exponentials so it is independent of the
    analytic block formulas it validates.
    """
    t = sched.pulse_times
    f = sched.carriers
    g = np.asarray(g, dtype=float).reshape(2)
    if fast_freqs is None:
        fast = np.array([np.sqrt(e_s)])
        nu = np.array([0.0])
    else:
        nu = np.asarray(fast_freqs, dtype=float)
        nu = nu - nu.mean()
        fast = np.full(nu.size, np.sqrt(e_s / nu.size))

    def mu(eta: np.ndarray) -> np.ndarray:
        tau, vx, vy, re_a, im_a = eta
        r = g[0] * vx + g[1] * vy
        slow = np.exp(2j * np.pi * (-f * tau + (f / c) * r * t))
        fastv = fast * np.exp(-2j * np.pi * nu * tau)
        return (re_a + 1j * im_a) * np.kron(slow, fastv)

    return mu


def fast_freq_beta(fast_freqs: np.ndarray) -> float:
    """Effective bandwidth of the uniform centered comb used by the oracle."""
    nu = np.asarray(fast_freqs, dtype=float)
    nu = nu - nu.mean()
    return float(np.sqrt(np.mean(nu**2)))


def data_averaged_crlb(
    ofdm: OfdmSpec,
    layout: NetworkLayout,
    target: TargetState,
    schedules: Union[HopSchedule, Sequence[HopSchedule]],
    waveforms: Sequence[WaveformSpec],
    n_draws: int,
    rng: np.random.Generator,
    fixed_beta: Optional[float] = None,
):
    """Unconditional-information bound under random communication data.

    Per realization, each transmitter draws fresh data symbols and the
    resulting effective bandwidth replaces beta in its paths; the state
    FIMs are averaged over realizations and inverted. Returns the averaged
    bound, the deterministic bound at ``fixed_beta`` (the mean drawn beta
    when not given), and the mean drawn beta.
    """
    if n_draws < 1:
        raise ValueError("need at least one draw")
    pgs = path_geometries(layout, target)
    tx_ids = sorted({pg.tx_index for pg in pgs})
    mean_fim = np.zeros((4, 4))
    beta_sum = 0.0
    for _ in range(n_draws):
        beta_by_tx = {k: draw_ofdm_beta(ofdm, rng) for k in tx_ids}
        wfs = [
            replace(wf, beta=beta_by_tx[pg.tx_index])
            for wf, pg in zip(waveforms, pgs)
        ]
        net = network_fim(layout, target, schedules, wfs)
        mean_fim += net.state_fim
        beta_sum += sum(beta_by_tx.values()) / len(tx_ids)
    mean_fim /= n_draws
    mean_beta = beta_sum / n_draws

    c = layout.c
    g_x = c**2 * mean_fim[:2, :2]
    g_cross = c * mean_fim[:2, 2:]
    g_v = mean_fim[2:, 2:]
    averaged = crlb(g_x, g_v, g_cross, c)

    beta_det = mean_beta if fixed_beta is None else fixed_beta
    wfs_det = [replace(wf, beta=beta_det) for wf in waveforms]
    deterministic = network_crlb(layout, target, schedules, wfs_det)
    return averaged, deterministic, mean_beta
