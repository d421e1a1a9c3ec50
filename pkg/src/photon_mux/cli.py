"""Command-line surface: scenario runs, sweeps, HOM scans, tables, reports.

Every command is reproducible: the (config, seed, trials) triple fully
determines the output bytes.  JSON output carries a metadata header with the
config hash, seed, engine version and trial count; CSV rows use a fixed
column order.  Exit codes: 0 success, 2 config error, 3 infeasible
optimization, 4 I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass

import numpy as np

from . import __version__
from .config import (
    SWEEPABLE_KEYS,
    config_hash,
    load_config,
    to_experiment_config,
    to_hom_settings,
)
from .interference import hom_config_for, hom_scan
from .mux import ConfigError, ExperimentConfig, SimResult, analyze, simulate_trials
from .predictor import (
    PredictorError,
    build_comparison_table,
    load_reference_sources,
    optimize_mu_n,
    this_work_figures,
)
from .presets import PRESET_NAMES
from .temporal_checks import DelayLineSpec, health_report

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INFEASIBLE = 3
EXIT_IO = 4

CSV_HEADER = "axis,value,p_h,p_1,p_2,g2_true,g2_est,se_p1,se_g2"
ROW_FIELDS = ("axis", "value", "p_h", "p_1", "p_2", "g2_true", "g2_est", "se_p1", "se_g2")


class OutputError(RuntimeError):
    """Raised when results cannot be written."""


@dataclass(frozen=True)
class RunSpec:
    """Parsed invocation of one CLI command."""

    command: str
    config_path: str
    overrides: tuple
    seed: int | None
    trials: int
    output_format: str
    output_path: str | None


def _result_row(axis: str, value, res: SimResult) -> dict:
    return {
        "axis": axis,
        "value": value,
        "p_h": res.p_h,
        "p_1": res.p_1,
        "p_2": res.p_2,
        "g2_true": res.g2_true,
        "g2_est": res.g2_est,
        "se_p1": res.se_p_1,
        "se_g2": res.se_g2,
    }


def _run_point(cfg: ExperimentConfig, spec: RunSpec, point_index: int) -> SimResult:
    if spec.trials > 0:
        # decorrelate sweep points while staying reproducible from one seed
        return simulate_trials(cfg, spec.trials, seed=spec.seed + point_index)
    return analyze(cfg)


def emit_results(rows: list[dict], output_format: str, path: str | None,
                 meta: dict) -> str:
    """Serialise rows; returns the emitted text (also written to path)."""
    if not rows:
        raise OutputError("refusing to emit an empty result set")
    if output_format == "json":
        text = json.dumps({"meta": meta, "rows": rows}, indent=2) + "\n"
    elif output_format == "csv":
        keys = list(rows[0].keys())
        if keys == list(ROW_FIELDS):
            header = CSV_HEADER
        else:
            header = ",".join(keys)
        lines = [header]
        for row in rows:
            lines.append(",".join(_csv_cell(row[k]) for k in keys))
        text = "\n".join(lines) + "\n"
    else:
        raise OutputError(f"unknown output format {output_format!r}")
    if path:
        try:
            with open(path, "w") as fh:
                fh.write(text)
        except OSError as exc:
            raise OutputError(f"cannot write {path!r}: {exc}") from exc
    return text


def _csv_cell(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _meta(values: dict, spec: RunSpec, extra: dict | None = None) -> dict:
    meta = {
        "config_hash": config_hash(values),
        "seed": spec.seed,
        "trials": spec.trials,
        "version": __version__,
    }
    if extra:
        meta.update(extra)
    return meta


def _parse_values(raw: str, as_int: bool) -> list:
    """Comma list ("1,2,5") or inclusive range ("1:40" / "1:40:5")."""
    raw = raw.strip()
    if ":" in raw:
        parts = raw.split(":")
        if len(parts) not in (2, 3):
            raise ConfigError(f"range must be start:stop[:step], got {raw!r}")
        start, stop = float(parts[0]), float(parts[1])
        step = float(parts[2]) if len(parts) == 3 else 1.0
        if step <= 0:
            raise ConfigError(f"range step must be > 0, got {raw!r}")
        values = list(np.arange(start, stop + step * 0.5, step))
    else:
        values = [float(v) for v in raw.split(",") if v.strip()]
    if not values:
        raise ConfigError(f"no sweep values in {raw!r}")
    return [int(round(v)) if as_int else v for v in values]


def cmd_simulate(spec: RunSpec) -> int:
    values = load_config(spec.config_path, list(spec.overrides))
    cfg = to_experiment_config(values)
    res = _run_point(cfg, spec, 0)
    rows = [_result_row("n_bins", cfg.n_bins, res)]
    print(emit_results(rows, spec.output_format, spec.output_path, _meta(values, spec)),
          end="")
    return EXIT_OK


def cmd_sweep(spec: RunSpec, axis: str, values_raw: str) -> int:
    if axis not in SWEEPABLE_KEYS:
        raise ConfigError(
            f"axis {axis!r} is not sweepable; choose one of {', '.join(SWEEPABLE_KEYS)}"
        )
    values = load_config(spec.config_path, list(spec.overrides))
    as_int = axis in ("n_bins", "cycle_offset")
    axis_values = _parse_values(values_raw, as_int)
    rows = []
    for i, v in enumerate(axis_values):
        point = dict(values)
        point[axis] = v
        cfg = to_experiment_config(point)
        res = _run_point(cfg, spec, i)
        rows.append(_result_row(axis, v, res))
    print(emit_results(rows, spec.output_format, spec.output_path, _meta(values, spec)),
          end="")
    return EXIT_OK


def cmd_hom(spec: RunSpec) -> int:
    values = load_config(spec.config_path, list(spec.overrides))
    cfg = to_experiment_config(values)
    hom = to_hom_settings(values)
    result = hom_scan(
        hom_config_for(
            cfg,
            mu_ref=hom.mu_ref,
            indistinguishability=hom.indistinguishability,
            delay_scan_ps=hom.delay_scan(),
            pulse_sigma_ps=hom.pulse_sigma_ps,
            gvd_ps2_per_cycle=hom.gvd_ps2_per_cycle,
            drift_ps=hom.drift_ps,
        )
    )
    rows = [
        {
            "delay_ps": float(d),
            "coincidence": float(c),
            "coincidence_subtracted": float(cs),
        }
        for d, c, cs in zip(
            result.delays_ps, result.coincidences, result.coincidences_subtracted
        )
    ]
    meta = _meta(values, spec, {"v_raw": result.v_raw, "v_sub": result.v_sub})
    print(emit_results(rows, spec.output_format, spec.output_path, meta), end="")
    return EXIT_OK


def cmd_table(spec: RunSpec, folds: str) -> int:
    values = load_config(spec.config_path, list(spec.overrides))
    cfg = to_experiment_config(values)
    fold_list = [int(f) for f in folds.split(",") if f.strip()]
    rows = list(load_reference_sources())
    rows.append(
        this_work_figures(
            cfg, indistinguishability=values["hom.indistinguishability"]
        )
    )
    improvement = load_config("improvement", [])
    rows.append(
        this_work_figures(
            to_experiment_config(improvement),
            indistinguishability=improvement["hom.indistinguishability"],
            label="possible_improvement",
        )
    )
    table = build_comparison_table(rows, fold_list)
    print(emit_results(table, spec.output_format, spec.output_path, _meta(values, spec)),
          end="")
    return EXIT_OK


def cmd_optimize(spec: RunSpec, g2_max: float, n_max: int) -> int:
    values = load_config(spec.config_path, list(spec.overrides))
    cfg = to_experiment_config(values)
    result = optimize_mu_n(cfg, g2_max=g2_max, n_max=n_max)
    if not result.feasible:
        print(
            json.dumps(
                {"meta": _meta(values, spec), "feasible": False,
                 "reason": f"no mu in bounds satisfies g2 <= {g2_max}"},
                indent=2,
            )
        )
        return EXIT_INFEASIBLE
    rows = [
        {
            "mu": result.mu,
            "n_bins": result.n_bins,
            "p_1": result.p_1,
            "g2": result.g2,
        }
    ]
    meta = _meta(values, spec, {"feasible": True, "g2_max": g2_max, "n_max": n_max})
    print(emit_results(rows, spec.output_format, spec.output_path, meta), end="")
    return EXIT_OK


def cmd_report(spec: RunSpec) -> int:
    values = load_config(spec.config_path, list(spec.overrides))
    delay_spec = DelayLineSpec(
        loss_per_cycle=values["loop_loss_per_cycle"],
        cycle_ns=values["tau_ns"],
        gvd_ps2_per_cycle=values["hom.gvd_ps2_per_cycle"],
        drift_ps_per_hour=values["hom.drift_ps"],
        pulse_sigma_ps=values["hom.pulse_sigma_ps"],
    )
    report = health_report(delay_spec, n_bins=values["n_bins"])
    rows = [report]
    print(emit_results(rows, spec.output_format, spec.output_path, _meta(values, spec)),
          end="")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="photon-mux",
        description="Time-multiplexed heralded single-photon source simulator",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, mc=False):
        p.add_argument(
            "--config", default="mu018",
            help=f"preset name ({', '.join(PRESET_NAMES)}) or config file path",
        )
        p.add_argument(
            "--set", dest="overrides", action="append", default=[],
            metavar="KEY=VALUE", help="override a config key",
        )
        p.add_argument("--format", choices=("json", "csv"), default="json")
        p.add_argument("--output", default=None, help="path to write results")
        if mc:
            p.add_argument(
                "--trials", type=int, default=0,
                help="Monte Carlo trials per point (0 = analytic only)",
            )
            p.add_argument("--seed", type=int, default=None)

    common(sub.add_parser("simulate", help="figures of merit for one config"), mc=True)
    p_sweep = sub.add_parser("sweep", help="scan one parameter")
    common(p_sweep, mc=True)
    p_sweep.add_argument("--axis", required=True)
    p_sweep.add_argument(
        "--values", required=True, help='comma list "1,2,5" or range "1:40[:step]"'
    )
    common(sub.add_parser("hom", help="HOM coincidence scan and visibilities"))
    p_table = sub.add_parser("table", help="multi-source coincidence comparison")
    common(p_table)
    p_table.add_argument("--folds", default="10,30", help="comma list of M values")
    p_opt = sub.add_parser("optimize", help="search (mu, n_bins) under a g2 cap")
    common(p_opt)
    p_opt.add_argument("--g2-max", type=float, required=True)
    p_opt.add_argument("--n-max", type=int, default=40)
    common(sub.add_parser("report", help="delay-line health report"))
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    trials = getattr(args, "trials", 0) or 0
    seed = getattr(args, "seed", None)
    if trials > 0 and seed is None:
        print("error: --seed is required for Monte Carlo runs", file=sys.stderr)
        return EXIT_CONFIG
    spec = RunSpec(
        command=args.command,
        config_path=args.config,
        overrides=tuple(args.overrides),
        seed=seed,
        trials=trials,
        output_format=args.format,
        output_path=args.output,
    )
    try:
        if args.command == "simulate":
            return cmd_simulate(spec)
        if args.command == "sweep":
            return cmd_sweep(spec, args.axis, args.values)
        if args.command == "hom":
            return cmd_hom(spec)
        if args.command == "table":
            return cmd_table(spec, args.folds)
        if args.command == "optimize":
            return cmd_optimize(spec, args.g2_max, args.n_max)
        if args.command == "report":
            return cmd_report(spec)
        raise ConfigError(f"unknown command {args.command!r}")
    except (ConfigError, PredictorError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OutputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
