"""Acceptance gate: one test per criterion, each printing a PASS line with
its runtime. Run with ``pytest tests/test_acceptance.py -v -s``.

The Monte Carlo criteria run the frequency/time-scaled analog of the
reference configuration (grid search at 28 GHz spans is not desk-feasible);
bound-only criteria run at full scale.
"""

import time

import numpy as np
import pytest

from isac_lab import (
    NetworkLayout,
    OfdmSpec,
    PairingMode,
    SearchBox,
    StateEstimate,
    TargetState,
    WaveformSpec,
    center_times,
    crlb,
    data_averaged_crlb,
    eliminate_amplitude,
    make_schedule,
    moments,
    mle_estimate,
    network_fim,
    numerical_fim,
    path_geometries,
    per_path_fim,
    radial_speed,
    slow_fast_mean,
    stage_a,
    stage_b,
    synthesize,
)
from isac_lab.estimators import PerPathEstimate, StageAWindow, stage_a_info
from isac_lab.experiments import (
    DESK_SCALE,
    FULL_SCALE,
    ExperimentConfig,
    crlb_heatmap,
    crlb_sweep,
    monostatic_scenario,
    mse_vs_snr,
    multistatic_scenario,
    write_csv,
)
from isac_lab.fisher import fast_freq_beta


class Gate:
    """Timing + reporting helper for one criterion."""

    def __init__(self, number: int, budget_s: float, detail: str = ""):
        self.number = number
        self.budget = budget_s
        self.detail = detail
        self.t0 = time.perf_counter()

    def done(self, detail: str = ""):
        elapsed = time.perf_counter() - self.t0
        print(f"[criterion {self.number:2d}] PASS ({elapsed:6.1f} s): {detail or self.detail}")
        assert elapsed < self.budget, f"criterion {self.number} exceeded {self.budget} s"


def db_ratio(a: float, b: float) -> float:
    return 10.0 * np.log10(a / b)


# ---------------------------------------------------------------- criterion 1
def test_criterion_1_fim_oracle_equivalence():
    gate = Gate(1, 10.0)
    sched = center_times(make_schedule("linear", 8, 1e-3, 1e6, 2e5))[0]
    layout = NetworkLayout([[1000.0, 0.0]], [[1000.0, 0.0]], mode=PairingMode.MONOSTATIC)
    target = TargetState([300.0, 200.0], [20.0, 15.0])
    pg = path_geometries(layout, target)[0]
    comb = np.linspace(-2.5e4, 2.5e4, 9)
    wf = WaveformSpec(alpha=0.8 + 0.5j, e_s=1.0, beta=fast_freq_beta(comb), sigma_w2=1.0)
    analytic = per_path_fim(moments(sched), pg, wf).full
    mu = slow_fast_mean(sched, pg.g, layout.c, e_s=wf.e_s, fast_freqs=comb)
    eta0 = np.array([pg.tau, *target.velocity, wf.alpha.real, wf.alpha.imag])
    numeric = numerical_fim(mu, eta0, wf.sigma_w2, [1e-10, 1e-3, 1e-3, 1e-6, 1e-6])
    rel = np.linalg.norm(analytic - numeric) / np.linalg.norm(numeric)
    assert rel <= 1e-3
    gate.done(f"analytic 5x5 vs finite differences, rel Frobenius {rel:.2e}")


# ---------------------------------------------------------------- criterion 2
def test_criterion_2_closed_form_bounds():
    gate = Gate(2, 5.0)
    rng = np.random.default_rng(2026)
    worst = 0.0
    for trial in range(100):
        n_bs = int(rng.integers(3, 7))
        pos = rng.uniform(-1500.0, 1500.0, size=(n_bs, 2))
        layout = NetworkLayout(pos, pos, mode=PairingMode.MONOSTATIC)
        target = TargetState(rng.uniform(-400.0, 400.0, 2), rng.uniform(-30.0, 30.0, 2))
        sched = center_times(
            make_schedule("permuted", int(rng.integers(6, 16)), 1e-3, 28e9, 2e9,
                          seed=trial)
        )[0]
        wfs = [WaveformSpec(alpha=np.exp(2j * np.pi * rng.uniform())) for _ in range(n_bs)]
        net = network_fim(layout, target, sched, wfs)
        res = crlb(net.g_x, net.g_v, net.g_cross, layout.c)
        direct = np.linalg.inv(net.state_fim)
        rel = np.linalg.norm(res.cov_bound - direct) / np.linalg.norm(direct)
        worst = max(worst, rel)
        assert rel <= 1e-10
        for blk, ref in ((res.pos_block, res.pos_uncoupled), (res.vel_block, res.vel_uncoupled)):
            eig = np.linalg.eigvalsh(blk - ref)
            assert eig.min() >= -1e-9 * np.linalg.norm(blk)

    # equality case under palindromic hops
    pal = center_times(make_schedule("palindromic", 12, 1e-3, 28e9, 2e9))[0]
    pos = np.array([[1000.0, 0.0], [0.0, 1000.0], [-800.0, -600.0]])
    layout = NetworkLayout(pos, pos, mode=PairingMode.MONOSTATIC)
    target = TargetState([300.0, 200.0], [20.0, 15.0])
    net = network_fim(layout, target, pal, [WaveformSpec()] * 3)
    res = crlb(net.g_x, net.g_v, net.g_cross, layout.c)
    assert np.linalg.norm(res.pos_block - res.pos_uncoupled) <= 1e-9 * np.linalg.norm(res.pos_block)
    assert np.linalg.norm(res.vel_block - res.vel_uncoupled) <= 1e-9 * np.linalg.norm(res.vel_block)
    gate.done(f"Schur vs direct inverse on 100 geometries, worst rel {worst:.2e}")


# ---------------------------------------------------------------- criterion 3
def test_criterion_3_centering_invariance():
    gate = Gate(3, 5.0)
    rng = np.random.default_rng(33)
    layout = NetworkLayout([[1000.0, 0.0]], [[-400.0, 900.0]])
    target = TargetState([300.0, 200.0], [20.0, 15.0])
    pg = path_geometries(layout, target)[0]
    worst = 0.0
    for _ in range(50):
        p = int(rng.integers(2, 32))
        carriers = rng.uniform(0.2e9, 3e9, size=p)
        pri = float(rng.uniform(1e-4, 2e-3))
        sched = make_schedule("custom", p, pri, 1e9, 1e9, custom_carriers=carriers)
        wf = WaveformSpec(
            alpha=rng.normal() + 1j * rng.normal() or 1.0,
            e_s=float(rng.uniform(0.5, 2.0)),
            beta=float(rng.uniform(0.0, 5e7)),
            sigma_w2=float(rng.uniform(0.1, 5.0)),
        )
        red_raw = eliminate_amplitude(per_path_fim(moments(sched), pg, wf))
        red_cen = eliminate_amplitude(per_path_fim(moments(sched, centered=True), pg, wf))
        rel = np.linalg.norm(red_raw - red_cen) / np.linalg.norm(red_cen)
        worst = max(worst, rel)
        assert rel <= 1e-9
    gate.done(f"raw vs centered reduced information on 50 schedules, worst rel {worst:.2e}")


# ---------------------------------------------------------------- criterion 4
def test_criterion_4_monotone_sweeps():
    gate = Gate(4, 10.0)
    spans = (50.0, 100.0, 200.0, 400.0, 700.0, 1000.0, 1400.0, 2000.0)
    pulses = (4, 8, 12, 16, 24, 32, 48, 64)
    for axis, grid in (("bandwidth", spans), ("pulses", pulses)):
        rows = crlb_sweep(axis=axis, scale=FULL_SCALE, spans_mhz=spans, pulses=pulses)
        for layout_label in ("multi3x3", "mono5"):
            sel = [r for r in rows if r.sweep["layout"] == layout_label]
            pos = [r.crlb_pos for r in sel]
            vel = [r.crlb_vel for r in sel]
            assert all(a > b for a, b in zip(pos, pos[1:])), (axis, layout_label, pos)
            assert all(a > b for a, b in zip(vel, vel[1:])), (axis, layout_label, vel)
    gate.done("position and velocity bounds strictly decrease in span and pulse count")


# ---------------------------------------------------------------- criterion 5
def test_criterion_5_multistatic_vs_monostatic():
    gate = Gate(5, 2.0)
    multi = multistatic_scenario(3, 3, scale=FULL_SCALE)
    mono = monostatic_scenario(3, scale=FULL_SCALE)
    bm, bo = multi.crlb(0.0), mono.crlb(0.0)
    assert bm.pos_trace < bo.pos_trace
    assert bm.vel_trace < bo.vel_trace
    gate.done(
        f"9-path multistatic below 3-path monostatic: pos {bm.pos_trace:.3e} < {bo.pos_trace:.3e}"
    )


# --------------------------------------------------- shared Monte Carlo run
MC_SNRS = (30.0, -2.0, -10.0)


@pytest.fixture(scope="module")
def monte_carlo_rows():
    scen = monostatic_scenario(5, scale=DESK_SCALE)
    cfg = ExperimentConfig(
        scenario=scen,
        trials=200,
        master_seed=20260810,
        snr_grid_db=MC_SNRS,
        pos_halfwidth=800.0,
        vel_halfwidth=50.0,
    )
    t0 = time.perf_counter()
    rows = mse_vs_snr(cfg, estimators=("mle", "tsif"))
    elapsed = time.perf_counter() - t0
    by_key = {(r.sweep["snr_db"], r.estimator): r for r in rows}
    return by_key, elapsed


# ---------------------------------------------------------------- criterion 6
def test_criterion_6_mle_efficiency(monte_carlo_rows):
    by_key, elapsed = monte_carlo_rows
    high = by_key[(30.0, "mle")]
    low = by_key[(-10.0, "mle")]
    gap_pos = db_ratio(high.mse_pos, high.crlb_pos)
    gap_vel = db_ratio(high.mse_vel, high.crlb_vel)
    assert abs(gap_pos) <= 3.0
    assert abs(gap_vel) <= 3.0
    thresh_pos = db_ratio(low.mse_pos, low.crlb_pos)
    thresh_vel = db_ratio(low.mse_vel, low.crlb_vel)
    assert thresh_pos > 10.0
    assert thresh_vel > 10.0
    assert elapsed < 600.0, "shared Monte Carlo run exceeded 10 min"
    print(
        f"[criterion  6] PASS ({elapsed:6.1f} s shared): 30 dB gaps pos {gap_pos:+.2f} dB, "
        f"vel {gap_vel:+.2f} dB; -10 dB threshold excess pos {thresh_pos:.1f} dB, "
        f"vel {thresh_vel:.1f} dB"
    )


# ---------------------------------------------------------------- criterion 7
def test_criterion_7_tsif_vs_mle(monte_carlo_rows):
    by_key, elapsed = monte_carlo_rows
    mle_hi = by_key[(30.0, "mle")]
    tsif_hi = by_key[(30.0, "tsif")]
    gap_pos = abs(db_ratio(tsif_hi.mse_pos, mle_hi.mse_pos))
    gap_vel = abs(db_ratio(tsif_hi.mse_vel, mle_hi.mse_vel))
    assert gap_pos <= 1.5
    assert gap_vel <= 1.5
    mle_lo = by_key[(-2.0, "mle")]
    tsif_lo = by_key[(-2.0, "tsif")]
    assert tsif_lo.mse_pos >= mle_lo.mse_pos
    assert tsif_lo.mse_vel >= mle_lo.mse_vel
    assert tsif_lo.outage_rate > 0.0
    assert elapsed < 600.0
    print(
        f"[criterion  7] PASS ({elapsed:6.1f} s shared): 30 dB TSIF-MLE gaps pos {gap_pos:.2f} dB, "
        f"vel {gap_vel:.2f} dB; -2 dB TSIF/MLE {tsif_lo.mse_pos / mle_lo.mse_pos:.1f}x pos, "
        f"outage rate {tsif_lo.outage_rate:.3f}"
    )


# ---------------------------------------------------------------- criterion 8
def test_criterion_8_noiseless_recovery():
    gate = Gate(8, 30.0)
    scen = monostatic_scenario(5, scale=DESK_SCALE)
    layout, target, sched = scen.layout, scen.target, scen.schedule
    wfs = [WaveformSpec(sigma_w2=1e-30)] * layout.n_paths
    obs = synthesize(layout, target, sched, wfs, np.random.default_rng(0))

    box = SearchBox.around(target.position, target.velocity)
    est = mle_estimate(obs, sched, layout, box)
    assert np.all(np.abs(est.x_hat - target.position) <= box.pos_resolution)
    assert np.all(np.abs(est.v_hat - target.velocity) <= box.vel_resolution)

    pg = path_geometries(layout, target)[0]
    window = StageAWindow(
        tau_center=pg.tau, tau_halfwidth=3e-6,
        r_center=radial_speed(pg, target.velocity), r_halfwidth=100.0,
    )
    a_est = stage_a(obs[0].samples, sched, wfs[0], window, layout.c)
    span = sched.carriers.max() - sched.carriers.min()
    assert abs(a_est.tau_hat - pg.tau) <= 1.0 / (8.0 * span) / 8.0
    assert abs(a_est.r_hat - radial_speed(pg, target.velocity)) <= (
        layout.c / (8.0 * sched.carriers.max() * sched.t_syn) / 8.0
    )

    exact = []
    for pg_i in path_geometries(layout, target):
        info = stage_a_info(sched, WaveformSpec(), layout.c)
        exact.append(
            PerPathEstimate(
                tau_hat=pg_i.tau,
                r_hat=radial_speed(pg_i, target.velocity),
                cov=np.linalg.inv(info),
                info=info,
            )
        )
    prior = StateEstimate(
        x_hat=target.position + np.array([50.0, 0.0]),
        v_hat=target.velocity + np.array([5.0, 0.0]),
        objective=0.0, iterations=0, converged=False,
    )
    fused = stage_b(exact, layout, prior)
    err = np.linalg.norm(fused.x_hat - target.position)
    assert fused.converged
    assert err < 1e-6
    gate.done(f"MLE/stage-A within one cell; stage-B consistency error {err:.1e} m")


# ---------------------------------------------------------------- criterion 9
def test_criterion_9_heatmap_coverage():
    gate = Gate(9, 60.0)

    def mono_n(n):
        return lambda scale, hop_kind: monostatic_scenario(n, scale=scale, hop_kind=hop_kind)

    kwargs = dict(grid_halfwidth=2000.0, grid_points=41, threshold_pos=2e-5, snr_db=10.0)
    _, cov3 = crlb_heatmap(mono_n(3), **kwargs)
    _, cov5 = crlb_heatmap(mono_n(5), **kwargs)
    assert cov5 > cov3
    gate.done(f"coverage below 2e-5 m^2: 5 BSs {cov5:.4f} > 3 BSs {cov3:.4f}")


# --------------------------------------------------------------- criterion 10
def test_criterion_10_data_averaged_bound():
    gate = Gate(10, 60.0)
    scen = monostatic_scenario(5, scale=DESK_SCALE)
    ofdm = OfdmSpec(n_sub=1024, spacing=1.62e3)
    avg, det, mean_beta = data_averaged_crlb(
        ofdm, scen.layout, scen.target, scen.schedule, scen.waveforms(0.0),
        n_draws=200, rng=np.random.default_rng(42),
    )
    rel_pos = abs(avg.pos_trace - det.pos_trace) / det.pos_trace
    rel_vel = abs(avg.vel_trace - det.vel_trace) / det.vel_trace
    assert rel_pos < 0.02
    assert rel_vel < 0.02
    gate.done(
        f"200 16-QAM draws (mean beta {mean_beta / 1e3:.1f} kHz): "
        f"trace differences pos {rel_pos:.2e}, vel {rel_vel:.2e}"
    )


# --------------------------------------------------------------- criterion 11
def test_criterion_11_determinism(tmp_path):
    gate = Gate(11, 120.0)
    scen = monostatic_scenario(3, scale=DESK_SCALE)

    def run(workers):
        cfg = ExperimentConfig(
            scenario=scen, trials=6, master_seed=555, snr_grid_db=(30.0, -2.0),
            coarse_points=9, top_k=3, workers=workers,
        )
        return mse_vs_snr(cfg, estimators=("mle", "tsif"))

    rows_a = run(workers=1)
    rows_b = run(workers=1)
    rows_c = run(workers=3)
    assert rows_a == rows_b == rows_c
    paths = []
    for tag, rows in (("a", rows_a), ("b", rows_b), ("c", rows_c)):
        p = tmp_path / f"{tag}.csv"
        write_csv(rows, p, sweep_cols=["snr_db"])
        paths.append(p.read_bytes())
    assert paths[0] == paths[1] == paths[2]

    sweep_a = crlb_sweep(axis="bandwidth", spans_mhz=(100.0, 1000.0))
    sweep_b = crlb_sweep(axis="bandwidth", spans_mhz=(100.0, 1000.0))
    assert sweep_a == sweep_b
    gate.done("bit-identical tables across re-runs and worker counts")
