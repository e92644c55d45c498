"""Estimator oracles: noiseless recovery, gain invariance, fusion convergence."""

import numpy as np
import pytest

from isac_lab import (
    InsufficientPaths,
    SearchBox,
    StageAWindow,
    StateEstimate,
    WaveformSpec,
    WindowMiss,
    center_times,
    concentrated_objective,
    glrt_objective,
    make_schedule,
    mle_estimate,
    path_geometries,
    radial_speed,
    stage_a,
    stage_b,
    synthesize,
    tsif_estimate,
)
from isac_lab.estimators import layout_path_nodes, _fusion_cost, _fusion_residuals
from isac_lab.experiments import DESK_SCALE, monostatic_scenario

C = 299_792_458.0


def desk_scene(n_bs=5):
    scen = monostatic_scenario(n_bs, scale=DESK_SCALE)
    return scen.layout, scen.target, scen.schedule


def noiseless_obs(layout, target, sched, alphas=None):
    n = layout.n_paths
    alphas = alphas if alphas is not None else [1.0] * n
    wfs = [WaveformSpec(alpha=a, sigma_w2=1e-30) for a in alphas]
    return synthesize(layout, target, sched, wfs, np.random.default_rng(0)), wfs


def test_objective_peaks_at_truth_noiseless():
    layout, target, sched = desk_scene()
    alphas = np.exp(1j * np.linspace(0.3, 2.0, layout.n_paths))
    obs, _ = noiseless_obs(layout, target, sched, alphas)
    at_truth = concentrated_objective(obs, sched, layout, target.position, target.velocity)
    # Cauchy-Schwarz equality: sum |alpha|^2 E_s P
    assert at_truth == pytest.approx(layout.n_paths * sched.n_pulses, rel=1e-10)
    off = concentrated_objective(
        obs, sched, layout, target.position + [10.0, 0.0], target.velocity
    )
    assert off < at_truth


def test_objective_gain_phase_invariance():
    layout, target, sched = desk_scene(3)
    obs, _ = noiseless_obs(layout, target, sched)
    base = concentrated_objective(obs, sched, layout, [250.0, 260.0], [10.0, -3.0])
    rotated = [o for o in obs]
    rotated[1] = type(obs[1])(
        samples=obs[1].samples * np.exp(1j * 1.234),
        path_index=obs[1].path_index,
        schedule=obs[1].schedule,
    )
    after = concentrated_objective(rotated, sched, layout, [250.0, 260.0], [10.0, -3.0])
    assert after == pytest.approx(base, rel=1e-12)


def test_mle_noiseless_recovery_within_final_cell():
    layout, target, sched = desk_scene()
    obs, _ = noiseless_obs(layout, target, sched)
    box = SearchBox.around(target.position, target.velocity)
    est = mle_estimate(obs, sched, layout, box)
    assert est.converged
    assert np.all(np.abs(est.x_hat - target.position) <= box.pos_resolution)
    assert np.all(np.abs(est.v_hat - target.velocity) <= box.vel_resolution)
    # monotone refinement: the final peak dominates the coarse-grid best
    coarse_vals = []
    for x0 in np.linspace(*box.x_bounds[0], box.coarse_points):
        coarse_vals.append(
            concentrated_objective(obs, sched, layout, [x0, target.position[1]], target.velocity)
        )
    assert est.objective >= max(coarse_vals) - 1e-12


def test_mle_single_path_ridge_still_flags_converged():
    layout, target, sched = desk_scene(1)
    obs, _ = noiseless_obs(layout, target, sched)
    box = SearchBox.around(target.position, target.velocity, coarse_points=9)
    est = mle_estimate(obs, sched, layout, box)
    assert est.converged
    # on the ambiguity ridge the objective still reaches the global maximum
    assert est.objective == pytest.approx(sched.n_pulses, rel=1e-6)


def test_glrt_noiseless_peak_and_zero_input():
    layout, target, sched = desk_scene(3)
    obs, _ = noiseless_obs(layout, target, sched)
    pg = path_geometries(layout, target)[0]
    r = radial_speed(pg, target.velocity)
    peak = glrt_objective(obs[0].samples, sched, pg.tau, r, C)
    assert peak == pytest.approx(sched.n_pulses, rel=1e-10)
    for dtau, dr in ((1e-6, 0.0), (0.0, 5.0), (-2e-6, -3.0)):
        assert glrt_objective(obs[0].samples, sched, pg.tau + dtau, r + dr, C) < peak
    assert glrt_objective(np.zeros(sched.n_pulses), sched, pg.tau, r, C) == 0.0


def test_glrt_commensurate_carrier_aliasing():
    # carriers on an exact grid: shifting tau by one aliasing period leaves
    # the concentrated power unchanged (documented ambiguity)
    spacing = 5e4
    carriers = 1e6 + spacing * np.arange(8)
    sched = center_times(
        make_schedule("custom", 8, 1.0, 1e6, spacing * 7, custom_carriers=carriers)
    )[0]
    rng = np.random.default_rng(5)
    y = rng.standard_normal(8) + 1j * rng.standard_normal(8)
    tau, r = 3.2e-6, -12.0
    period = 1.0 / spacing
    a = glrt_objective(y, sched, tau, r, C)
    b = glrt_objective(y, sched, tau + period, r, C)
    assert b == pytest.approx(a, rel=1e-9)


def stage_a_window(pg, v, tau_hw=3e-6, r_hw=100.0):
    return StageAWindow(
        tau_center=pg.tau,
        tau_halfwidth=tau_hw,
        r_center=radial_speed(pg, v),
        r_halfwidth=r_hw,
    )


def test_stage_a_noiseless_recovery():
    layout, target, sched = desk_scene(3)
    obs, wfs = noiseless_obs(layout, target, sched)
    pg = path_geometries(layout, target)[0]
    window = stage_a_window(pg, target.velocity)
    est = stage_a(obs[0].samples, sched, wfs[0], window, C)
    r_true = radial_speed(pg, target.velocity)
    # within one refined grid cell
    span = sched.carriers.max() - sched.carriers.min()
    fine_tau = 1.0 / (8.0 * span) / 8.0
    fine_r = C / (8.0 * sched.carriers.max() * sched.t_syn) / 8.0
    assert abs(est.tau_hat - pg.tau) <= fine_tau
    assert abs(est.r_hat - r_true) <= fine_r
    # information is PSD with positive determinant
    assert np.all(np.linalg.eigvalsh(est.info) > 0)
    assert np.allclose(est.cov @ est.info, np.eye(2), atol=1e-9)


def test_stage_a_palindromic_gives_diagonal_covariance():
    layout, target, _ = desk_scene(3)
    sched = center_times(make_schedule("palindromic", 12, 1.0, 1e6, 4e5))[0]
    obs, wfs = noiseless_obs(layout, target, sched)
    pg = path_geometries(layout, target)[0]
    est = stage_a(obs[0].samples, sched, wfs[0], stage_a_window(pg, target.velocity), C)
    scale = np.sqrt(est.info[0, 0] * est.info[1, 1])
    assert abs(est.info[0, 1]) <= 1e-10 * scale
    assert abs(est.cov[0, 1]) <= 1e-10 * abs(est.cov[0, 0] * est.cov[1, 1]) ** 0.5


def test_stage_a_window_miss_raises():
    layout, target, sched = desk_scene(3)
    obs, wfs = noiseless_obs(layout, target, sched)
    pg = path_geometries(layout, target)[0]
    window = StageAWindow(
        tau_center=pg.tau + 2e-5,   # truth far outside the window
        tau_halfwidth=4e-6,
        r_center=radial_speed(pg, target.velocity),
        r_halfwidth=100.0,
    )
    with pytest.raises(WindowMiss):
        stage_a(obs[0].samples, sched, wfs[0], window, C)


def test_stage_b_converges_on_consistent_data():
    from isac_lab.estimators import PerPathEstimate, stage_a_info

    layout, target, sched = desk_scene(5)
    estimates = []
    for pg in path_geometries(layout, target):
        info = stage_a_info(sched, WaveformSpec(), layout.c)
        cov = np.linalg.inv(info)
        estimates.append(
            PerPathEstimate(
                tau_hat=pg.tau,
                r_hat=radial_speed(pg, target.velocity),
                cov=cov,
                info=info,
            )
        )
    prior = StateEstimate(
        x_hat=target.position + np.array([50.0, -50.0]),
        v_hat=target.velocity + np.array([5.0, -5.0]),
        objective=0.0,
        iterations=0,
        converged=False,
    )
    est = stage_b(estimates, layout, prior)
    assert est.converged
    assert np.linalg.norm(est.x_hat - target.position) < 1e-6
    assert np.linalg.norm(est.v_hat - target.velocity) < 1e-4
    # accepted iterates never increased the weighted cost
    nodes = layout_path_nodes(layout)
    cost0 = _fusion_cost(
        _fusion_residuals(estimates, nodes, prior.x_hat, prior.v_hat, layout.c), estimates
    )
    assert est.objective <= cost0


def test_stage_b_requires_two_paths():
    from isac_lab.estimators import PerPathEstimate

    layout, target, sched = desk_scene(1)
    pg = path_geometries(layout, target)[0]
    est = PerPathEstimate(pg.tau, radial_speed(pg, target.velocity), np.eye(2), np.eye(2))
    prior = StateEstimate(target.position, target.velocity, 0.0, 0, True)
    with pytest.raises(InsufficientPaths):
        stage_b([est], layout, prior)


def test_tsif_end_to_end_noiseless():
    layout, target, sched = desk_scene(5)
    obs, wfs = noiseless_obs(layout, target, sched)
    prior = StateEstimate(target.position, target.velocity, 0.0, 0, True)
    est, n_outage = tsif_estimate(
        obs, sched, layout, wfs, prior, tau_halfwidth=3.4e-6, r_halfwidth=100.0
    )
    assert n_outage == 0
    assert np.linalg.norm(est.x_hat - target.position) < 0.05
    assert np.linalg.norm(est.v_hat - target.velocity) < 0.05
