"""Command-line entry point.

Subcommands: entangle, bell, dfs, calibrate-readout.  Each experiment writes
<experiment>_report.json, <experiment>_shots.csv and a PNG figure into the
output directory.  Exit codes: 0 success, 1 runtime failure, 2 bad
configuration or usage.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .config import ConfigError, build_config, default_config, load_config
from .experiments import RunResult, run_experiment
from .readout import calibrate_readout, misclassification_rate
from .reporting import write_report_json, write_shot_csv

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_CONFIG = 2


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on usage errors already; route through a clean
    # exception so cli_main controls the process exit
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="ionsim", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", type=str, default=None, help="INI config file")
        p.add_argument("--seed", type=int, default=None, help="master seed (u64)")
        p.add_argument("--shots", type=int, default=None, help="shots per setting")
        p.add_argument("--out-dir", type=str, default="runs", help="output directory")
        p.add_argument("--analytic", action="store_true", default=None,
                       help="exact expectations instead of sampling")
        p.add_argument("--runs", type=int, default=None, help="independent repetitions")
        p.add_argument("--eps", type=float, default=None,
                       help="per-ion detection flip probability")
        p.add_argument("--depolarize", type=float, default=None,
                       help="depolarizing probability per entangling gate")
        p.add_argument("--no-figures", action="store_true", help="skip PNG rendering")

    p_ent = sub.add_parser("entangle", help="entangling gate, parity fringe, fidelity")
    add_common(p_ent)
    p_ent.add_argument("--ions", type=int, default=None, choices=(2, 4))

    p_bell = sub.add_parser("bell", help="four-setting correlation test")
    add_common(p_bell)
    p_bell.add_argument("--jitter", type=float, default=None,
                        help="per-run Gaussian phase-setting error (rad)")

    p_dfs = sub.add_parser("dfs", help="protected-subspace storage experiment")
    add_common(p_dfs)
    p_dfs.add_argument("--mode", type=str, default=None,
                       choices=("encoded", "test", "both"))
    p_dfs.add_argument("--gamma", type=float, default=None,
                       help="engineered dephasing rate (1/us)")
    p_dfs.add_argument("--schedule", type=str, default=None,
                       choices=("fraction", "delay"))

    p_cal = sub.add_parser("calibrate-readout",
                           help="tune photon-count readout to a target error rate")
    p_cal.add_argument("--ions", type=int, default=2, choices=(1, 2, 3, 4))
    p_cal.add_argument("--target-rate", type=float, default=0.02)
    p_cal.add_argument("--dark-ratio", type=float, default=0.01)
    p_cal.add_argument("--out-dir", type=str, default="runs")
    p_cal.add_argument("--no-figures", action="store_true")
    return parser


def _experiment_overrides(args) -> dict:
    overrides: dict = {"kind": args.command}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.shots is not None:
        overrides["shots_per_setting"] = args.shots
    if args.runs is not None:
        overrides["runs"] = args.runs
    if args.analytic:
        overrides["analytic"] = True
    if args.eps is not None:
        overrides["detection_flip_eps"] = args.eps
    if args.depolarize is not None:
        overrides["gate_depolarize_p"] = args.depolarize
    if getattr(args, "ions", None) is not None:
        overrides["n_ions"] = args.ions
    if getattr(args, "jitter", None) is not None:
        overrides["phase_jitter_sigma"] = args.jitter
    if getattr(args, "mode", None) is not None:
        overrides["mode"] = args.mode
    if getattr(args, "schedule", None) is not None:
        overrides["schedule"] = args.schedule
    if getattr(args, "gamma", None) is not None:
        overrides["dephasing_kind"] = "engineered-white"
        overrides["dephasing_rate_gamma"] = args.gamma
    return overrides


def _write_outputs(result: RunResult, out_dir: Path, figures: bool) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    name = result.report.experiment
    write_report_json(result.report, out_dir / f"{name}_report.json")
    write_shot_csv(result.shot_tables, out_dir / f"{name}_shots.csv")
    if figures:
        from . import figures as figs

        if name == "entangle":
            figs.render_parity_fringe(result.report, out_dir / "entangle_parity_fringe.png")
        elif name == "bell":
            figs.render_bell_histograms(
                result.report, result.shot_tables, out_dir / "bell_histograms.png"
            )
        elif name == "dfs":
            figs.render_dfs_decay(result.report, out_dir / "dfs_decay.png")


def _run_calibrate(args) -> int:
    cfg = calibrate_readout(
        target_rate=args.target_rate, n_ions=args.ions, dark_ratio=args.dark_ratio
    )
    rate = misclassification_rate(cfg, args.ions)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    payload = {
        "model": cfg.model,
        "n_ions": args.ions,
        "lambda_bright": cfg.lambda_bright,
        "lambda_dark": cfg.lambda_dark,
        "thresholds": list(cfg.thresholds),
        "misclassification_rate": rate,
        "target_rate": args.target_rate,
    }
    path = out_dir / "readout_calibration.json"
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    if not args.no_figures:
        from .figures import render_readout_calibration

        render_readout_calibration(
            cfg.lambda_bright, cfg.lambda_dark, cfg.thresholds, args.ions, rate,
            out_dir / "readout_calibration.png",
        )
    print(f"calibrated lambda_bright={cfg.lambda_bright:.4f} thresholds={cfg.thresholds} "
          f"rate={rate:.4f} -> {path}")
    return EXIT_OK


def cli_main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        if args.command == "calibrate-readout":
            return _run_calibrate(args)
        overrides = _experiment_overrides(args)
        if args.config is not None:
            cfg = load_config(args.config, overrides)
        else:
            cfg = default_config(**overrides)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        result = run_experiment(cfg)
        _write_outputs(result, Path(args.out_dir), figures=not args.no_figures)
    except Exception as exc:  # runtime failure, exit 1 per contract
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME

    key = {"entangle": "fidelity", "bell": "bell_mean"}.get(cfg.experiment)
    if key:
        print(f"{cfg.experiment}: {key} = {result.report.estimates[key]:.6f} "
              f"+/- {result.report.errors.get(key, 0.0):.6f}")
    else:
        rates = {k: v for k, v in result.report.estimates.items() if k.startswith("decay_rate")}
        print("dfs: " + ", ".join(f"{k} = {v:.6g}/us" for k, v in sorted(rates.items())))
    print(f"wrote outputs to {Path(args.out_dir).resolve()}")
    return EXIT_OK


def main() -> None:
    sys.exit(cli_main())
