"""CLI contract: exit codes, CSV outputs, manifest round-trip."""

from isac_lab.cli import run

FAST_MC = """
scenario.layout = mono
scenario.n_bs = 3
scenario.scale = desk
experiment.trials = 3
experiment.snr_grid_db = [30.0]
experiment.estimators = ["mle"]
experiment.seed = 11
"""

FAST_SWEEP = """
experiment.axis = bandwidth
experiment.spans_mhz = [200.0, 2000.0]
"""


def test_version_exits_zero(capsys):
    assert run(["version"]) == 0
    assert "isac-lab" in capsys.readouterr().out


def test_missing_config_names_path(capsys):
    code = run(["--config", "/nonexistent/desk.cfg", "crlb-sweep"])
    assert code == 1
    assert "/nonexistent/desk.cfg" in capsys.readouterr().err


def test_unknown_key_rejected(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("scenario.nope = 1\n")
    assert run(["--config", str(cfg), "crlb-sweep"]) == 1
    assert "scenario.nope" in capsys.readouterr().err


def test_crlb_sweep_writes_documented_csv(tmp_path):
    cfg = tmp_path / "sweep.cfg"
    cfg.write_text(FAST_SWEEP)
    out = tmp_path / "out"
    assert run(["--config", str(cfg), "--out", str(out), "crlb-sweep"]) == 0
    csv_path = out / "crlb_sweep.csv"
    text = csv_path.read_text().splitlines()
    assert text[0] == (
        "experiment,estimator,layout,span_mhz,pulses,mse_pos,mse_vel,"
        "crlb_pos,crlb_vel,outage_rate,trials,seed"
    )
    assert any(line.startswith("crlb_sweep,crlb,multi3x3,") for line in text[1:])
    assert (out / "run_manifest.txt").exists()


def test_mse_vs_snr_manifest_round_trip(tmp_path):
    cfg = tmp_path / "mc.cfg"
    cfg.write_text(FAST_MC)
    out1 = tmp_path / "out1"
    out2 = tmp_path / "out2"
    assert run(["--config", str(cfg), "--out", str(out1), "mse-vs-snr"]) == 0
    manifest = out1 / "run_manifest.txt"
    assert manifest.exists()
    # the dumped effective config re-runs to identical outputs
    assert run(["--config", str(manifest), "--out", str(out2), "mse-vs-snr"]) == 0
    a = (out1 / "mse_vs_snr.csv").read_bytes()
    b = (out2 / "mse_vs_snr.csv").read_bytes()
    assert a == b


def test_json_config_accepted(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text('{"experiment.spans_mhz": [100.0, 500.0]}')
    out = tmp_path / "o"
    assert run(["--config", str(cfg), "--out", str(out), "crlb-sweep"]) == 0


def test_fim_check_passes(capsys):
    assert run(["fim-check"]) == 0
    captured = capsys.readouterr().out
    assert "relative Frobenius error" in captured
    err = float(captured.strip().rsplit(" ", 1)[-1])
    assert err <= 1e-3


def test_beta_ofdm_runs_small(tmp_path, capsys):
    cfg = tmp_path / "b.cfg"
    cfg.write_text(
        "scenario.n_bs = 3\nexperiment.ofdm_draws = 20\nofdm.n_sub = 128\n"
        "ofdm.spacing_hz = 3000.0\n"
    )
    assert run(["--config", str(cfg), "beta-ofdm"]) == 0
    out = capsys.readouterr().out
    assert "data-averaged bound traces" in out


def test_seed_flag_changes_output(tmp_path):
    cfg = tmp_path / "mc.cfg"
    cfg.write_text(FAST_MC)
    out1 = tmp_path / "s1"
    out2 = tmp_path / "s2"
    assert run(["--config", str(cfg), "--out", str(out1), "--seed", "1", "mse-vs-snr"]) == 0
    assert run(["--config", str(cfg), "--out", str(out2), "--seed", "2", "mse-vs-snr"]) == 0
    assert (out1 / "mse_vs_snr.csv").read_bytes() != (out2 / "mse_vs_snr.csv").read_bytes()


def test_env_seed_fallback(tmp_path, monkeypatch):
    cfg = tmp_path / "mc.cfg"
    cfg.write_text(FAST_MC)
    out1 = tmp_path / "e1"
    out2 = tmp_path / "e2"
    monkeypatch.setenv("ISAC_LAB_SEED", "314159")
    assert run(["--config", str(cfg), "--out", str(out1), "mse-vs-snr"]) == 0
    monkeypatch.delenv("ISAC_LAB_SEED")
    assert run(["--config", str(cfg), "--out", str(out2), "--seed", "314159", "mse-vs-snr"]) == 0
    assert (out1 / "mse_vs_snr.csv").read_bytes() == (out2 / "mse_vs_snr.csv").read_bytes()


def test_heatmap_small_grid(tmp_path):
    cfg = tmp_path / "h.cfg"
    cfg.write_text(
        "experiment.heatmap_bs = [3]\nexperiment.heatmap_grid_points = 5\n"
        "experiment.heatmap_threshold_pos = 1e-4\n"
    )
    out = tmp_path / "oh"
    assert run(["--config", str(cfg), "--out", str(out), "heatmap"]) == 0
    lines = (out / "heatmap.csv").read_text().splitlines()
    assert lines[0].startswith("experiment,estimator,layout,x_m,y_m,")
    assert len(lines) == 1 + 25
    manifest = (out / "run_manifest.txt").read_text()
    assert "coverage.mono3" in manifest
