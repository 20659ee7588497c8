"""Command-line front end.

Exit codes: 0 success, 2 usage/config/parse error, 3 numerical divergence.
See ``docs/cli.md`` for flags and the JSON config schema of each subcommand.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import math
import os
import sys
import time
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from . import svg
from .dynamics import SystemSpec, Trajectory, _canonical, add_noise, integrate
from .entropy import EntropyConfig, apen, sampen
from .exceptions import (
    EmptySupportWarning,
    IntegrationDivergedError,
    SingularSystemError,
    UndefinedEntropyWarning,
)
from .experiments import (
    DEFAULT_BOX,
    SPLITS,
    GridSpec,
    adaptive_vs_uniform,
    bagging_runs,
    coefficient_variance_study,
    noise_sweep,
    run_grid,
    search_vs_random,
    window_stability,
    write_noise_table,
)
from .features import build_library, central_diff
from .fim import SCORE_MODES, block_scan
from .regression import FitConfig, coefficient_loss, fit_system, ground_truth
from .sampling import AcquisitionConfig, SamplingConfig, SearchConfig, adaptive_sample, entropy_search_sindy

EXIT_OK, EXIT_CONFIG, EXIT_DIVERGED = 0, 2, 3

DEFAULT_PARAMS = {
    "lorenz": {"sigma": 10.0, "rho": 28.0, "beta": 8.0 / 3.0},
    "rossler": {"a": 0.2, "b": 0.2, "c": 5.7},
    "vanderpol": {"mu": 0.8},
}


class ConfigError(ValueError):
    """Bad flags or config contents; maps to exit code 2."""


# --- helpers ----------------------------------------------------------------


def _floats(text, name):
    try:
        return [float(v) for v in str(text).split(",") if v.strip() != ""]
    except ValueError as exc:
        raise ConfigError(f"{name}: expected comma-separated numbers, got {text!r}") from exc


def _params(text):
    """Parse ``k=v,k=v`` into a dict."""
    if not text:
        return {}
    out = {}
    for part in str(text).split(","):
        if "=" not in part:
            raise ConfigError(f"--params: expected key=value, got {part!r}")
        k, v = part.split("=", 1)
        try:
            out[k.strip()] = float(v)
        except ValueError as exc:
            raise ConfigError(f"--params: {k.strip()} is not a number") from exc
    return out


def make_system(name, params=None) -> SystemSpec:
    """System with the standard parameters, overridden by ``params``."""
    try:
        canonical = _canonical(name)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    merged = dict(DEFAULT_PARAMS[canonical])
    merged.update(params or {})
    return SystemSpec(canonical, merged)


def _clean(obj):
    """JSON-safe copy: NaN/inf become None, numpy scalars and arrays become Python values."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    return obj


def _dump(obj) -> str:
    return json.dumps(_clean(obj), indent=2, sort_keys=True)


def _load_config(path):
    if path is None:
        return {}
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    return data


def _merge(defaults: dict, given: dict, where: str) -> dict:
    unknown = sorted(set(given) - set(defaults))
    if unknown:
        raise ConfigError(f"{where}: unknown keys {unknown}; allowed {sorted(defaults)}")
    out = dict(defaults)
    out.update(given)
    return out


def _dataclass(cls, given, where):
    given = given or {}
    if not isinstance(given, dict):
        raise ConfigError(f"{where} must be an object")
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = sorted(set(given) - names)
    if unknown:
        raise ConfigError(f"{where}: unknown keys {unknown}; allowed {sorted(names)}")
    kwargs = {k: tuple(v) if isinstance(v, list) else v for k, v in given.items()}
    try:
        return cls(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def _write_manifest(out_dir, command, config, seed, started, outputs):
    manifest = {
        "command": command,
        "config": config,
        "seed": seed,
        "version": __version__,
        "wall_time_s": round(time.perf_counter() - started, 3),
        "outputs": sorted(outputs),
    }
    (Path(out_dir) / "manifest.json").write_text(_dump(manifest) + "\n")


def _out_dir(path):
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _trajectory_from_args(args, system=None):
    """Trajectory from ``--input`` or an inline simulation."""
    if args.input:
        try:
            return Trajectory.from_csv(args.input)
        except (OSError, ValueError) as exc:
            raise ConfigError(f"cannot parse trajectory CSV {args.input}: {exc}") from exc
    if system is None or args.ic is None:
        raise ConfigError("need --input CSV, or --system with --ic for an inline simulation")
    traj = integrate(system, _floats(args.ic, "--ic"), args.t_end, args.dt)
    if args.noise:
        traj = add_noise(traj, args.noise, args.seed)
    return traj


# --- simple subcommands -----------------------------------------------------


def cmd_simulate(args):
    system = make_system(args.system, _params(args.params))
    traj = integrate(system, _floats(args.ic, "--ic"), args.t_end, args.dt)
    if args.noise:
        traj = add_noise(traj, args.noise, args.seed)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    traj.to_csv(out)
    print(_dump({"m": traj.m, "dt": args.dt if args.dt is not None else system.default_dt,
                 "noise": args.noise, "seed": args.seed, "system": system.to_dict(), "output": str(out)}))
    return EXIT_OK


def cmd_fit(args):
    system = make_system(args.system, _params(args.params)) if args.system else None
    traj = _trajectory_from_args(args, system)
    fit_cfg = FitConfig(args.degree, args.threshold, args.alpha, args.max_iter)
    if traj.m < 3:
        raise ConfigError("need at least 3 samples to differentiate")
    A = build_library(traj, fit_cfg.library())
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", EmptySupportWarning)
        model = fit_system(A, central_diff(traj), fit_cfg.threshold, fit_cfg.alpha, fit_cfg.max_iter)
    names = [f"x{j}'" for j in range(traj.n)]
    for line in model.equations(args.precision, names):
        print(line)
    if model.n_terms == 0:
        print("warning: every coefficient was thresholded to zero", file=sys.stderr)
    elif any(issubclass(w.category, EmptySupportWarning) for w in caught):
        print("warning: some equations have an empty support", file=sys.stderr)
    report = {"n_terms": model.n_terms}
    if system is not None and system.dim == traj.n:
        try:
            truth = ground_truth(system, fit_cfg.degree, fit_cfg.include_constant)
        except ValueError as exc:
            print(f"warning: no loss report, {exc}", file=sys.stderr)
        else:
            report["loss_l1"] = coefficient_loss(model, truth, "L1")
            report["loss_l2"] = coefficient_loss(model, truth, "L2")
            print(f"L2 loss vs ground truth: {report['loss_l2']:.6g}")
    if args.model_out:
        Path(args.model_out).write_text(_dump({"model": model.to_dict(), "report": report}) + "\n")
    return EXIT_OK


def cmd_scan(args):
    started = time.perf_counter()
    system = make_system(args.system, _params(args.params)) if args.system else None
    traj = _trajectory_from_args(args, system)
    if args.score_mode not in SCORE_MODES:
        raise ConfigError(f"--score-mode must be one of {SCORE_MODES}")
    block = traj.m if args.block_size == 0 else args.block_size
    if block > traj.m:
        raise ConfigError(f"--block-size {block} exceeds the {traj.m} samples")
    A = build_library(traj, FitConfig(args.degree).library())
    scan = block_scan(A, args.sigma, block, args.stride, traj.times, args.score_mode)
    out = _out_dir(args.out)
    scan.to_csv(out / "scan.csv")
    panels = [("state", traj.times, {f"x{j}": traj.states[:, j] for j in range(traj.n)}),
              ("largest FIM eigenvalue per block", scan.block_start_times, {"lambda_max": scan.column("lambda_max")})]
    if args.plot_score:
        panels.append(("information score", scan.block_start_times, {"score": scan.info_scores}))
    (out / "scan.svg").write_text(svg.line_plot(panels))
    lam = scan.column("lambda_max")
    summary = {"n_blocks": len(scan), "block_size": block, "stride": args.stride,
               "argmax_block": int(np.argmax(lam)), "argmax_time": float(scan.block_start_times[np.argmax(lam)])}
    print(_dump(summary))
    config = {"input": args.input, "system": system.to_dict() if system else None, "ic": args.ic,
              "t_end": args.t_end, "dt": args.dt, "noise": args.noise, "degree": args.degree, "sigma": args.sigma,
              "block_size": block, "stride": args.stride, "score_mode": args.score_mode}
    _write_manifest(out, "scan", config, args.seed, started, ["scan.csv", "scan.svg"])
    return EXIT_OK


def cmd_entropy(args):
    if args.input:
        try:
            with Path(args.input).open(newline="") as fh:
                rows = list(csv.reader(fh))
        except OSError as exc:
            raise ConfigError(f"cannot read {args.input}: {exc}") from exc
        if not rows:
            raise ConfigError(f"{args.input} is empty")
        header, body = rows[0], [r for r in rows[1:] if r]
        col = header.index(args.column) if args.column in header else None
        if col is None:
            try:
                col = int(args.column)
            except ValueError as exc:
                raise ConfigError(f"column {args.column!r} not found in {header}") from exc
        try:
            series = np.array([float(r[col]) for r in body])
        except (ValueError, IndexError) as exc:
            raise ConfigError(f"cannot parse column {args.column!r}: {exc}") from exc
    elif args.values:
        series = np.array(_floats(args.values, "--values"))
    else:
        raise ConfigError("need --input CSV or --values")
    cfg = EntropyConfig(args.m, args.r, args.absolute_r)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UndefinedEntropyWarning)
        result = {"apen": apen(series, cfg), "sampen": sampen(series, cfg), "n": int(series.size), "m": args.m,
                  "r": args.r, "absolute_r": args.absolute_r}
    print(_dump(result))
    return EXIT_OK


# --- experiment subcommands (JSON config) -----------------------------------

COMMON = {"system": "lorenz", "params": {}, "fit": {}, "seed": 0, "output_dir": "out"}

SCHEMAS = {
    "grid": {"x_range": [-10.0, 10.0, 21], "y_range": [-10.0, 10.0, 21], "z_value": 9.0, "train_length": 100,
             "noise_level": 0.01, "dt": None, "loss": "L2", "score_mode": "Combined", "extremes_window": 200,
             "log_loss": True},
    "stability": {"n_ics": 100, "window_long": 2500, "window_short": 625, "full_length": 5000,
                  "box": [list(b) for b in DEFAULT_BOX], "noise_level": 0.01, "dt": None,
                  "score_mode": "Combined", "loss": "L1"},
    "noise": {"x0": [1.0, 3.0, 5.0], "splits": list(SPLITS), "noise_levels": [0.0, 0.01, 0.02, 0.05],
              "n_seeds": 20, "t_end": 5.0, "dt": 0.01, "loss": "L1", "outlier_factor": 10.0},
    "bag": {"n_runs": 100, "window": 625, "noise_level": 0.01, "n_boot": 50, "box": [list(b) for b in DEFAULT_BOX],
            "dt": None, "variance_study": None},
    "sample": {"x0": [1.0, 3.0, 5.0], "sampling": {}, "n_seeds": 10, "noise_level": 0.001},
    "search": {"search": {}, "acquisition": {}, "n_seeds": 1, "n_baselines": 20},
}

VARIANCE_DEFAULTS = {"x0": [1.0, 3.0, 5.0], "noise_level": 0.03, "n_outer": 20, "n_boot": 50, "window": 625}


def _resolve(command, args):
    raw = _load_config(args.config)
    cfg = _merge({**COMMON, **SCHEMAS[command]}, raw, f"{command} config")
    if args.seed is not None:
        cfg["seed"] = args.seed
    if args.out is not None:
        cfg["output_dir"] = args.out
    if not isinstance(cfg["params"], dict):
        raise ConfigError("params must be an object")
    if isinstance(cfg["seed"], bool) or not isinstance(cfg["seed"], int):
        raise ConfigError("seed must be an integer")
    system = make_system(cfg["system"], cfg["params"])
    fit_cfg = _dataclass(FitConfig, cfg["fit"], "fit")
    cfg["system"] = system.display_name
    cfg["params"] = dict(system.params)
    cfg["fit"] = dataclasses.asdict(fit_cfg)
    return cfg, system, fit_cfg


def _jobs(args):
    return args.jobs if args.jobs is not None else (os.cpu_count() or 1)


def cmd_grid(args):
    started = time.perf_counter()
    cfg, system, fit_cfg = _resolve("grid", args)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            spec = GridSpec(system, tuple(cfg["x_range"]), tuple(cfg["y_range"]), cfg["z_value"], cfg["train_length"],
                            cfg["noise_level"], cfg["seed"], cfg["dt"], cfg["loss"], cfg["score_mode"],
                            cfg["extremes_window"])
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"grid config: {exc}") from exc
    res = run_grid(spec, fit_cfg, _jobs(args))
    out = _out_dir(cfg["output_dir"])
    res.write_csvs(out)
    (out / "loss.svg").write_text(svg.heatmap(res.loss, spec.xs, spec.ys, f"{cfg['loss']} coefficient loss",
                                              log_scale=bool(cfg["log_loss"]), colorbar_label="loss"))
    (out / "extremes.svg").write_text(svg.heatmap(res.extremes, spec.xs, spec.ys, "extreme derivative count",
                                                  colorbar_label="count"))
    (out / "info_score.svg").write_text(svg.heatmap(res.info_score, spec.xs, spec.ys, "information score",
                                                    colorbar_label="score"))
    summary = {"band_ratio": res.band_ratio(), "spearman_score_loss": res.score_loss_spearman(),
               "n_diverged": int(np.sum(res.status == 1)), "n_degenerate": int(np.sum(res.status == 2))}
    (out / "summary.json").write_text(_dump(summary) + "\n")
    print(_dump(summary))
    _write_manifest(out, "grid", cfg, cfg["seed"], started,
                    ["loss.csv", "extremes.csv", "info_score.csv", "loss.svg", "extremes.svg", "info_score.svg",
                     "summary.json"])
    return EXIT_OK


def cmd_stability(args):
    started = time.perf_counter()
    cfg, system, fit_cfg = _resolve("stability", args)
    try:
        res = window_stability(system, cfg["n_ics"], cfg["window_long"], cfg["window_short"], cfg["full_length"],
                               cfg["seed"], cfg["box"], cfg["noise_level"], cfg["dt"], fit_cfg, cfg["score_mode"],
                               cfg["loss"])
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"stability config: {exc}") from exc
    out = _out_dir(cfg["output_dir"])
    res.to_csv(out / "stability.csv")
    (out / "stability_short.svg").write_text(svg.scatter_plot(
        res.score_short, np.log10(res.loss_short), "short window", "information score", "log10 loss"))
    (out / "stability_long.svg").write_text(svg.scatter_plot(
        res.score_long, np.log10(res.loss_long), "long window", "information score", "log10 loss"))
    summary = {"spearman_short": res.spearman_short, "spearman_long": res.spearman_long,
               "resampled": res.resampled}
    (out / "summary.json").write_text(_dump(summary) + "\n")
    print(_dump(summary))
    _write_manifest(out, "stability", cfg, cfg["seed"], started,
                    ["stability.csv", "stability_short.svg", "stability_long.svg", "summary.json"])
    return EXIT_OK


def cmd_noise(args):
    started = time.perf_counter()
    cfg, system, fit_cfg = _resolve("noise", args)
    tables = {}
    try:
        for split in cfg["splits"]:
            tables[split] = noise_sweep(system, cfg["x0"], split, tuple(cfg["noise_levels"]), cfg["n_seeds"],
                                        cfg["t_end"], cfg["dt"], fit_cfg, cfg["seed"], cfg["loss"],
                                        cfg["outlier_factor"])
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"noise config: {exc}") from exc
    out = _out_dir(cfg["output_dir"])
    write_noise_table(out / "noise.csv", tables)
    levels = [100 * v for v in cfg["noise_levels"]]
    panels = [("mean loss (outliers excluded), log10", levels,
               {s: np.log10([r.mean for r in rows]) for s, rows in tables.items()}),
              ("outlier rate", levels, {s: [r.outlier_rate for r in rows] for s, rows in tables.items()})]
    (out / "noise.svg").write_text(svg.line_plot(panels))
    summary = {s: [{"level": r.level, "mean": r.mean, "outlier_rate": r.outlier_rate} for r in rows]
               for s, rows in tables.items()}
    print(_dump(summary))
    _write_manifest(out, "noise", cfg, cfg["seed"], started, ["noise.csv", "noise.svg"])
    return EXIT_OK


def cmd_bag(args):
    started = time.perf_counter()
    cfg, system, fit_cfg = _resolve("bag", args)
    var_cfg = None
    if cfg["variance_study"] is not None:
        var_cfg = _merge(VARIANCE_DEFAULTS, cfg["variance_study"], "variance_study")
        cfg["variance_study"] = var_cfg
    try:
        runs = bagging_runs(system, cfg["n_runs"], cfg["window"], cfg["noise_level"], cfg["n_boot"], cfg["seed"],
                            cfg["box"], cfg["dt"], fit_cfg)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bag config: {exc}") from exc
    out = _out_dir(cfg["output_dir"])
    cols = ["run", "d_eff_mean_fim", "mean_member_d_eff", "kappa_mean_fim", "median_member_kappa",
            "max_leading_angle_deg", "mean_leading_angle_deg", "n_boot"]
    with (out / "bagging.csv").open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(cols)
        for r in runs:
            writer.writerow([r[c] if isinstance(r[c], int) else f"{r[c]:.17g}" for c in cols])
    d_gain = [r["d_eff_mean_fim"] - r["mean_member_d_eff"] for r in runs]
    (out / "bagging.svg").write_text(svg.line_plot([
        ("d_eff(mean FIM) - mean member d_eff", [r["run"] for r in runs], {"gain": d_gain}),
        ("log10 kappa", [r["run"] for r in runs],
         {"mean FIM": np.log10([r["kappa_mean_fim"] for r in runs]),
          "median member": np.log10([r["median_member_kappa"] for r in runs])}),
    ]))
    summary = {
        "n_runs": len(runs),
        "runs_d_eff_mean_fim_ge_mean_member": int(sum(g >= -1e-9 for g in d_gain)),
        "min_d_eff_gain": float(min(d_gain)) if d_gain else math.nan,
        "runs_kappa_mean_fim_le_median_member": int(sum(r["kappa_mean_fim"] <= r["median_member_kappa"]
                                                        for r in runs)),
    }
    outputs = ["bagging.csv", "bagging.svg", "summary.json"]
    if var_cfg is not None:
        single, bagged, active = coefficient_variance_study(
            system, var_cfg["x0"], var_cfg["noise_level"], var_cfg["n_outer"], var_cfg["n_boot"], var_cfg["window"],
            cfg["dt"], fit_cfg, cfg["seed"])
        summary["variance_active_entries"] = int(active.sum())
        summary["variance_bagged_le_single"] = int(np.sum((bagged <= single) & active))
        with (out / "coefficient_variance.csv").open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["term", "state", "active", "single_variance", "bagged_variance"])
            for k, j in np.ndindex(single.shape):
                writer.writerow([k, j, int(active[k, j]), f"{single[k, j]:.17g}", f"{bagged[k, j]:.17g}"])
        outputs.append("coefficient_variance.csv")
    (out / "summary.json").write_text(_dump(summary) + "\n")
    print(_dump(summary))
    _write_manifest(out, "bag", cfg, cfg["seed"], started, outputs)
    return EXIT_OK


def cmd_sample(args):
    started = time.perf_counter()
    cfg, system, fit_cfg = _resolve("sample", args)
    s_cfg = _dataclass(SamplingConfig, cfg["sampling"], "sampling")
    cfg["sampling"] = dataclasses.asdict(s_cfg)
    out = _out_dir(cfg["output_dir"])
    # the trace of the first seed is kept for plotting
    trace, _ = adaptive_sample(system, cfg["x0"], s_cfg, fit_cfg, noise_level=cfg["noise_level"],
                               seed=cfg["seed"])
    trace.to_csv(out / "trace.csv")
    steps = list(range(1, len(trace.metric_history) + 1))
    (out / "trace.svg").write_text(svg.line_plot([
        ("sample time per step", steps, {"t": trace.sampled_times[1:]}),
        ("log10 metric", steps, {"metric": np.log10(np.maximum(trace.metric_history, 1e-300))}),
        ("fine mode", steps, {"FINE": [1.0 if m == "FINE" else 0.0 for m in trace.modes]}),
    ]))
    outputs = ["trace.csv", "trace.svg", "summary.json"]
    summary = {"n_observed": trace.n_observed, "stop_reason": trace.stop_reason,
               "switches": [[i, m] for i, m in trace.switches]}
    if cfg["n_seeds"] > 0:
        rows = adaptive_vs_uniform(system, cfg["x0"], s_cfg, cfg["n_seeds"], cfg["noise_level"], fit_cfg,
                                   cfg["seed"])
        cols = ["seed", "n_adaptive", "loss_adaptive", "n_baseline", "loss_baseline", "fine_fraction",
                "stop_reason"]
        with (out / "adaptive_vs_uniform.csv").open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(cols)
            for r in rows:
                writer.writerow([f"{r[c]:.17g}" if isinstance(r[c], float) else r[c] for c in cols])
        summary["median_n_adaptive"] = float(np.median([r["n_adaptive"] for r in rows]))
        summary["median_loss_adaptive"] = float(np.median([r["loss_adaptive"] for r in rows]))
        summary["median_loss_baseline"] = float(np.median([r["loss_baseline"] for r in rows]))
        outputs.append("adaptive_vs_uniform.csv")
    (out / "summary.json").write_text(_dump(summary) + "\n")
    print(_dump(summary))
    _write_manifest(out, "sample", cfg, cfg["seed"], started, outputs)
    return EXIT_OK


def cmd_search(args):
    started = time.perf_counter()
    cfg, system, fit_cfg = _resolve("search", args)
    search = _dataclass(SearchConfig, cfg["search"], "search")
    acq = _dataclass(AcquisitionConfig, cfg["acquisition"], "acquisition")
    if len(search.domain_low) != system.dim:
        raise ConfigError(f"search.domain_low/high need {system.dim} coordinates for {system.display_name}")
    cfg["search"] = dataclasses.asdict(search)
    cfg["acquisition"] = dataclasses.asdict(acq)
    out = _out_dir(cfg["output_dir"])
    res = entropy_search_sindy(system, search, acq, fit_cfg, cfg["seed"])
    res.to_json(out / "search.json")
    lam = [r.lambda_min for r in res.rounds]
    (out / "search.svg").write_text(svg.line_plot([
        ("aggregate lambda_min per round", list(range(len(lam))), {"lambda_min": lam})]))
    summary = {"initial_conditions": [r.initial_condition for r in res.rounds], "lambda_min": lam,
               "lambda_min_nondecreasing": bool(np.all(np.diff(lam) >= -1e-10 * max(1.0, abs(lam[-1])))),
               "loss_l2": res.loss_l2}
    outputs = ["search.json", "search.svg", "summary.json"]
    if cfg["n_baselines"] > 0 and cfg["n_seeds"] > 0:
        rows = search_vs_random(system, search, acq, cfg["n_seeds"], cfg["n_baselines"], fit_cfg, cfg["seed"])
        with (out / "search_vs_random.csv").open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["seed", "loss_search", "median_baseline", "win", "lambda_min_monotone"])
            for r in rows:
                writer.writerow([r["seed"], f"{r['loss_search']:.17g}", f"{r['median_baseline']:.17g}",
                                 int(r["win"]), int(r["lambda_min_monotone"])])
        summary["wins"] = int(sum(r["win"] for r in rows))
        summary["n_seeds"] = len(rows)
        outputs.append("search_vs_random.csv")
    (out / "summary.json").write_text(_dump(summary) + "\n")
    print(_dump(summary))
    _write_manifest(out, "search", cfg, cfg["seed"], started, outputs)
    return EXIT_OK


# --- parser -----------------------------------------------------------------


def _add_source(p, need_system=False):
    p.add_argument("--input", help="trajectory CSV (t,x0,x1,...)")
    p.add_argument("--system", required=need_system, help="lorenz, rossler or vanderpol")
    p.add_argument("--params", default="", help="comma-separated key=value system parameters")
    p.add_argument("--ic", help="initial condition, comma-separated")
    p.add_argument("--t-end", type=float, default=10.0)
    p.add_argument("--dt", type=float, default=None, help="step (default: per-system)")
    p.add_argument("--noise", type=float, default=0.0, help="noise level, fraction of each state's std")
    p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sindyinfo", description="Data informativeness for sparse system identification")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="integrate a benchmark system to CSV")
    p.add_argument("--system", required=True)
    p.add_argument("--params", default="")
    p.add_argument("--ic", required=True)
    p.add_argument("--t-end", type=float, required=True)
    p.add_argument("--dt", type=float, default=None)
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="trajectory.csv")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("fit", help="sparse regression on a trajectory")
    _add_source(p)
    p.add_argument("--degree", type=int, default=2)
    p.add_argument("--threshold", type=float, default=0.1)
    p.add_argument("--alpha", type=float, default=1e-5)
    p.add_argument("--max-iter", type=int, default=20)
    p.add_argument("--precision", type=int, default=6)
    p.add_argument("--model-out", help="write model and loss report as JSON")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("scan", help="sliding-block FIM metrics along a trajectory")
    _add_source(p)
    p.add_argument("--degree", type=int, default=2)
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--block-size", type=int, default=20, help="0 means one block spanning the trajectory")
    p.add_argument("--stride", type=int, default=1)
    p.add_argument("--score-mode", default="Combined")
    p.add_argument("--plot-score", action="store_true")
    p.add_argument("--out", default="scan_out")
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("entropy", help="approximate and sample entropy of a series")
    p.add_argument("--input", help="CSV file")
    p.add_argument("--column", default="x0", help="column name or index")
    p.add_argument("--values", help="comma-separated series instead of a file")
    p.add_argument("--m", type=int, default=2)
    p.add_argument("--r", type=float, default=0.2)
    p.add_argument("--absolute-r", action="store_true")
    p.set_defaults(func=cmd_entropy)

    for name, func, text in (("grid", cmd_grid, "initial-condition landscape"),
                             ("stability", cmd_stability, "score/loss correlation at two window lengths"),
                             ("noise", cmd_noise, "first-oscillation noise sweep"),
                             ("bag", cmd_bag, "bootstrap spectral diagnostics"),
                             ("sample", cmd_sample, "adaptive coarse/fine sampling"),
                             ("search", cmd_search, "entropy-driven multi-trajectory search")):
        p = sub.add_parser(name, help=text)
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--out", help="output directory (overrides output_dir)")
        p.add_argument("--seed", type=int, help="overrides the config seed")
        p.add_argument("--jobs", type=int, help="worker threads (default: logical cores)")
        p.set_defaults(func=func)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except IntegrationDivergedError as exc:
        print(f"error: {exc} (last valid t={exc.last_valid_time})", file=sys.stderr)
        return EXIT_DIVERGED
    except SingularSystemError as exc:
        print(f"error: singular system: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    except (ValueError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
