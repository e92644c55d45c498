"""Command-line entry point: structured config parsing, experiment dispatch,
CSV outputs, and validation subcommands.

Config files are line-oriented ``dotted.key = value`` text (values parsed as
JSON fragments, ``#`` comments allowed); a JSON object file is accepted too.
Every run dumps the effective configuration as ``run_manifest.txt`` beside
its outputs, and that manifest is itself a valid config file.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ConfigError, IsacLabError
from .experiments import (
    DEFAULT_PULSES,
    DEFAULT_SPANS_MHZ,
    SCALES,
    ExperimentConfig,
    crlb_heatmap,
    crlb_sweep,
    monostatic_scenario,
    mse_vs_snr,
    multistatic_scenario,
    write_csv,
)
from .fisher import data_averaged_crlb, numerical_fim, per_path_fim, slow_fast_mean
from .geometry import NetworkLayout, PairingMode, TargetState, path_geometries
from .schedule import center_times, make_schedule, moments
from .waveform import OfdmSpec, WaveformSpec

ENV_SEED = "ISAC_LAB_SEED"

DEFAULTS = {
    "scenario.layout": "mono",            # mono | multi
    "scenario.n_bs": 5,                    # monostatic BS count
    "scenario.n_tx": 3,
    "scenario.n_rx": 3,
    "scenario.scale": "desk",              # desk | full
    "scenario.hop_kind": "palindromic",    # linear | permuted | palindromic
    "scenario.hop_seed": 7,
    "scenario.span_hz": None,              # override preset span
    "scenario.pulses": None,               # override preset pulse count
    "scenario.target": [300.0, 200.0],
    "scenario.velocity": [20.0, 15.0],
    "experiment.trials": 200,
    "experiment.seed": 20260810,
    "experiment.workers": 1,
    "experiment.estimators": ["mle", "tsif"],
    "experiment.snr_grid_db": [-10.0, 0.0, 10.0, 20.0, 30.0],
    "experiment.pos_halfwidth_m": 500.0,
    "experiment.vel_halfwidth_ms": 50.0,
    "experiment.axis": "bandwidth",        # crlb-sweep: bandwidth | pulses | joint
    "experiment.spans_mhz": list(DEFAULT_SPANS_MHZ),
    "experiment.pulses_grid": list(DEFAULT_PULSES),
    "experiment.sweep_snr_db": 0.0,
    "experiment.heatmap_bs": [3, 5],
    "experiment.heatmap_grid_points": 41,
    "experiment.heatmap_halfwidth_m": 2000.0,
    "experiment.heatmap_threshold_pos": 2e-5,
    "experiment.heatmap_snr_db": 10.0,
    "experiment.ofdm_draws": 200,
    "ofdm.n_sub": 1024,
    "ofdm.spacing_hz": 1620.0,
    "ofdm.constellation": "qam16",
    "output.dir": "out",
    "output.prefix": "",
}


def parse_config_text(text: str, source: str = "<config>") -> dict:
    """Parse dotted-key lines or a JSON object into a flat config dict."""
    stripped = text.lstrip()
    if stripped.startswith("{"):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{source}: invalid JSON config: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError(f"{source}: JSON config must be an object")
        return {str(k): v for k, v in data.items()}
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        sep = "=" if "=" in line else (":" if ":" in line else None)
        if sep is None:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value'")
        key, value = line.split(sep, 1)
        key = key.strip()
        value = value.strip()
        try:
            out[key] = json.loads(value)
        except json.JSONDecodeError:
            out[key] = value
    return out


def load_config(path: str | None) -> dict:
    cfg = dict(DEFAULTS)
    if path is not None:
        p = Path(path)
        if not p.exists():
            raise ConfigError(f"config file not found: {p}")
        file_cfg = parse_config_text(p.read_text(), source=str(p))
        for key, value in file_cfg.items():
            if key not in DEFAULTS:
                raise ConfigError(f"{p}: unknown config key {key!r}")
            cfg[key] = value
    return cfg


def _scenario_from(cfg: dict):
    scale_name = cfg["scenario.scale"]
    if scale_name not in SCALES:
        raise ConfigError(f"scenario.scale must be one of {sorted(SCALES)}")
    scale = SCALES[scale_name]
    kwargs = dict(
        scale=scale,
        hop_kind=cfg["scenario.hop_kind"],
        target_position=cfg["scenario.target"],
        target_velocity=cfg["scenario.velocity"],
        seed=cfg["scenario.hop_seed"],
    )
    if cfg["scenario.span_hz"] is not None:
        kwargs["span"] = float(cfg["scenario.span_hz"])
    if cfg["scenario.pulses"] is not None:
        kwargs["n_pulses"] = int(cfg["scenario.pulses"])
    if cfg["scenario.layout"] == "mono":
        return monostatic_scenario(int(cfg["scenario.n_bs"]), **kwargs)
    if cfg["scenario.layout"] == "multi":
        return multistatic_scenario(
            int(cfg["scenario.n_tx"]), int(cfg["scenario.n_rx"]), **kwargs
        )
    raise ConfigError("scenario.layout must be 'mono' or 'multi'")


def _write_manifest(cfg: dict, out_dir: Path, extras: dict | None = None):
    lines = [f"{key} = {json.dumps(cfg[key])}" for key in sorted(cfg)]
    if extras:
        lines.append("")
        lines.extend(f"# {k} = {v}" for k, v in extras.items())
    (out_dir / "run_manifest.txt").write_text("\n".join(lines) + "\n")


def _out_dir(cfg: dict) -> Path:
    out = Path(cfg["output.dir"])
    out.mkdir(parents=True, exist_ok=True)
    return out


def _cmd_mse_vs_snr(cfg: dict) -> int:
    scen = _scenario_from(cfg)
    exp = ExperimentConfig(
        scenario=scen,
        trials=int(cfg["experiment.trials"]),
        master_seed=int(cfg["experiment.seed"]),
        snr_grid_db=tuple(float(s) for s in cfg["experiment.snr_grid_db"]),
        pos_halfwidth=float(cfg["experiment.pos_halfwidth_m"]),
        vel_halfwidth=float(cfg["experiment.vel_halfwidth_ms"]),
        workers=int(cfg["experiment.workers"]),
    )
    rows = mse_vs_snr(exp, estimators=tuple(cfg["experiment.estimators"]))
    out = _out_dir(cfg)
    path = out / f"{cfg['output.prefix']}mse_vs_snr.csv"
    write_csv(rows, path, sweep_cols=["snr_db"])
    _write_manifest(cfg, out)
    print(f"wrote {path}")
    return 0


def _cmd_crlb_sweep(cfg: dict) -> int:
    # bound sweeps are analytic, so they always run the full-scale layouts
    rows = crlb_sweep(
        axis=cfg["experiment.axis"],
        scale=SCALES["full"],
        spans_mhz=[float(s) for s in cfg["experiment.spans_mhz"]],
        pulses=[int(p) for p in cfg["experiment.pulses_grid"]],
        snr_db=float(cfg["experiment.sweep_snr_db"]),
        hop_kind=cfg["scenario.hop_kind"],
        master_seed=int(cfg["experiment.seed"]),
    )
    out = _out_dir(cfg)
    path = out / f"{cfg['output.prefix']}crlb_sweep.csv"
    write_csv(rows, path, sweep_cols=["layout", "span_mhz", "pulses"])
    _write_manifest(cfg, out)
    print(f"wrote {path}")
    return 0


def _cmd_heatmap(cfg: dict) -> int:
    rows = []
    coverages = {}
    for n_bs in cfg["experiment.heatmap_bs"]:
        def build(scale, hop_kind, n=n_bs):
            return monostatic_scenario(
                int(n),
                scale=scale,
                hop_kind=hop_kind,
                target_velocity=cfg["scenario.velocity"],
                seed=cfg["scenario.hop_seed"],
            )

        layout_rows, coverage = crlb_heatmap(
            build,
            grid_halfwidth=float(cfg["experiment.heatmap_halfwidth_m"]),
            grid_points=int(cfg["experiment.heatmap_grid_points"]),
            threshold_pos=float(cfg["experiment.heatmap_threshold_pos"]),
            snr_db=float(cfg["experiment.heatmap_snr_db"]),
            scale=SCALES["full"],  # threshold is a full-scale quantity
            hop_kind=cfg["scenario.hop_kind"],
            master_seed=int(cfg["experiment.seed"]),
        )
        rows.extend(layout_rows)
        coverages[f"coverage.mono{n_bs}"] = coverage
        print(f"mono{n_bs}: coverage {coverage:.4f} below {cfg['experiment.heatmap_threshold_pos']}")
    out = _out_dir(cfg)
    path = out / f"{cfg['output.prefix']}heatmap.csv"
    write_csv(rows, path, sweep_cols=["layout", "x_m", "y_m"])
    _write_manifest(cfg, out, extras=coverages)
    print(f"wrote {path}")
    return 0


# Desk-scale oracle configuration: low carrier so finite differences are
# well conditioned; the information algebra is scale covariant.
FIM_CHECK = dict(
    f0=1e6, span=2e5, n_pulses=8, pri=1e-3, beta_comb=np.linspace(-2.5e4, 2.5e4, 9)
)


def _cmd_fim_check(cfg: dict) -> int:
    sched = center_times(
        make_schedule("linear", FIM_CHECK["n_pulses"], FIM_CHECK["pri"],
                      FIM_CHECK["f0"], FIM_CHECK["span"])
    )[0]
    layout = NetworkLayout([[1000.0, 0.0]], [[1000.0, 0.0]], mode=PairingMode.MONOSTATIC)
    target = TargetState(np.asarray(cfg["scenario.target"], dtype=float),
                         np.asarray(cfg["scenario.velocity"], dtype=float))
    pg = path_geometries(layout, target)[0]
    comb = FIM_CHECK["beta_comb"]
    beta = float(np.sqrt(np.mean((comb - comb.mean()) ** 2)))
    wf = WaveformSpec(alpha=0.8 + 0.5j, e_s=1.0, beta=beta, sigma_w2=1.0)

    analytic = per_path_fim(moments(sched), pg, wf).full
    mu = slow_fast_mean(sched, pg.g, layout.c, e_s=wf.e_s, fast_freqs=comb)
    eta0 = np.array([pg.tau, *target.velocity, wf.alpha.real, wf.alpha.imag])
    steps = np.array([1e-10, 1e-3, 1e-3, 1e-6, 1e-6])
    numeric = numerical_fim(mu, eta0, wf.sigma_w2, steps)
    rel = np.linalg.norm(analytic - numeric) / np.linalg.norm(numeric)
    print(f"analytic vs finite-difference FIM: relative Frobenius error {rel:.3e}")
    return 0 if rel <= 1e-3 else 2


def _cmd_beta_ofdm(cfg: dict) -> int:
    scen = _scenario_from(cfg)
    ofdm = OfdmSpec(
        n_sub=int(cfg["ofdm.n_sub"]),
        spacing=float(cfg["ofdm.spacing_hz"]),
        constellation=cfg["ofdm.constellation"],
    )
    rng = np.random.default_rng(int(cfg["experiment.seed"]))
    wfs = scen.waveforms(snr_db=float(cfg["experiment.sweep_snr_db"]))
    averaged, deterministic, mean_beta = data_averaged_crlb(
        ofdm, scen.layout, scen.target, scen.schedule, wfs,
        n_draws=int(cfg["experiment.ofdm_draws"]), rng=rng,
    )
    print(f"mean effective bandwidth over draws: {mean_beta:.6g} Hz")
    print(f"data-averaged bound traces: pos {averaged.pos_trace:.6g}  vel {averaged.vel_trace:.6g}")
    print(f"deterministic at mean beta: pos {deterministic.pos_trace:.6g}  vel {deterministic.vel_trace:.6g}")
    rel_pos = abs(averaged.pos_trace - deterministic.pos_trace) / deterministic.pos_trace
    rel_vel = abs(averaged.vel_trace - deterministic.vel_trace) / deterministic.vel_trace
    print(f"relative trace differences: pos {rel_pos:.4%}  vel {rel_vel:.4%}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="isac-lab",
        description="Synthetic sensing-network simulation and estimation toolkit",
    )
    parser.add_argument("--config", metavar="PATH", help="config file (dotted keys or JSON)")
    parser.add_argument("--out", metavar="DIR", help="output directory override")
    parser.add_argument("--seed", metavar="U64", type=int, help="master seed override")
    parser.add_argument("--workers", metavar="N", type=int, help="parallel worker count")
    parser.add_argument("--trials", metavar="N", type=int, help="Monte Carlo trial override")
    parser.add_argument(
        "command",
        choices=["crlb-sweep", "mse-vs-snr", "heatmap", "fim-check", "beta-ofdm", "version"],
    )
    return parser


def run(argv) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "version":
        print(f"isac-lab {__version__}")
        return 0
    try:
        cfg = load_config(args.config)
        if args.out is not None:
            cfg["output.dir"] = args.out
        if args.seed is not None:
            cfg["experiment.seed"] = args.seed
        elif os.environ.get(ENV_SEED):
            cfg["experiment.seed"] = int(os.environ[ENV_SEED])
        if args.workers is not None:
            cfg["experiment.workers"] = args.workers
        if args.trials is not None:
            cfg["experiment.trials"] = args.trials
    except (ConfigError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    try:
        handler = {
            "crlb-sweep": _cmd_crlb_sweep,
            "mse-vs-snr": _cmd_mse_vs_snr,
            "heatmap": _cmd_heatmap,
            "fim-check": _cmd_fim_check,
            "beta-ofdm": _cmd_beta_ofdm,
        }[args.command]
        return handler(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except IsacLabError as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
