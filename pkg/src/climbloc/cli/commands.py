"""Pipeline commands: simulate, train, run, report.

The lifecycle is file-based and staged: `simulate` writes a scenario
directory, `train` fits the two sensor models and then the fusion bundle
(in that order), `run` produces one trajectory file per algorithm, and
`report` turns trajectories plus truth into metric tables. Every stage is
deterministic for a given config document, so re-running a manifest
reproduces its outputs byte for byte.

Exit codes: 0 ok, 2 config error, 3 missing input, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .. import __version__
from ..core import SlidingWindow, Vec3Enu
from ..errors import ConfigError, MissingInputError, NumericalFailureError, OrderingError
from ..fusion import (
    amfa_pipeline,
    collect_fusion_frames,
    fusion_from_dict,
    fusion_to_dict,
    init_attention_params,
    init_encoders,
    train_fusion,
)
from ..metrics import (
    REFERENCE_LABEL,
    REFERENCE_MAX_M,
    REFERENCE_RMSE_M,
    REFERENCE_STD_M,
    boxplot_summary,
    composite_objective,
    compute_cdf,
    compute_metrics,
    match_series,
    write_boxplot_csv,
    write_cdf_csv,
    write_metrics_csv,
)
from ..models import (
    BaroFcnnModel,
    UwbFcnnModel,
    baro_fcnn_infer,
    model_from_dict,
    model_to_dict,
    train_baro_model,
    train_uwb_model,
    uwb_fcnn_infer,
)
from ..sim import simulate_scenario
from ..solvers import PoseEstimate, UwbSigmaModel, baro_altitude, uwb_geometric_solve
from . import config as cfgmod
from . import records

ALGORITHMS = ("baro", "baro-fcnn", "uwb-geo", "uwb-fcnn", "gpsins-ekf", "amfa")
MODEL_FILES = {"uwb": "uwb.json", "baro": "baro.json", "fusion": "fusion.json"}


def _write_json(path, doc) -> None:
    with open(path, "w") as fh:
        json.dump(doc, fh, separators=(",", ":"))
        fh.write("\n")


def _read_json(path):
    if not os.path.exists(path):
        raise MissingInputError(f"file not found: {path}")
    with open(path) as fh:
        return json.load(fh)


def _write_history_csv(path, history) -> None:
    with open(path, "w") as fh:
        fh.write("epoch,train_loss,val_loss\n")
        for i, (train_loss, val_loss) in enumerate(history):
            fh.write(f"{i},{float(train_loss)!r},{float(val_loss)!r}\n")


def _history_path(model_path: str) -> str:
    stem, _ = os.path.splitext(model_path)
    return stem + ".history.csv"


def cmd_simulate(config_path, out_dir) -> dict:
    """Generate a scenario directory plus its manifest."""
    doc = cfgmod.load_config(config_path)
    scenario_cfg = cfgmod.scenario_config(doc)
    data = simulate_scenario(scenario_cfg)
    files = records.write_scenario(out_dir, data)
    manifest = {
        "tool_version": __version__,
        "config_digest": cfgmod.config_digest(doc),
        "seeds": {
            "sim": scenario_cfg.seed,
            "nnet": doc["nnet"]["seed"],
            "fusion": doc["fusion"]["seed"],
        },
        "files": files,
    }
    records.write_manifest(out_dir, manifest)
    for name in records.SCENARIO_FILES:
        print(f"wrote {os.path.join(out_dir, files[name])} ({len(getattr(data, name))} records)")
    return manifest


def _load_sensor_model(models_dir, which):
    path = os.path.join(models_dir, MODEL_FILES[which])
    if not os.path.exists(path):
        raise MissingInputError(f"missing {which} model: {path} (run train --model {which} first)")
    model = model_from_dict(_read_json(path))
    expected = {"uwb": UwbFcnnModel, "baro": BaroFcnnModel}[which]
    if not isinstance(model, expected):
        raise ConfigError(f"{path}: not a {which} sensor model")
    return model


def cmd_train(model, data_dir, out_path, config_path=None, seed=None, epochs=None, models_dir=None):
    """Fit one stage and write its JSON file plus a loss-history CSV."""
    doc = cfgmod.load_config(config_path)
    scenario = records.read_scenario(data_dir)
    os.makedirs(os.path.dirname(out_path) or ".", exist_ok=True)

    if model == "uwb":
        opts = cfgmod.fcnn_options(doc, "uwb")
        trained, history = train_uwb_model(
            scenario, cfgmod.sensor_train_config(doc, "uwb", seed, epochs), **opts
        )
        _write_json(out_path, model_to_dict(trained))
    elif model == "baro":
        opts = cfgmod.fcnn_options(doc, "baro")
        trained, history = train_baro_model(
            scenario, cfgmod.sensor_train_config(doc, "baro", seed, epochs), **opts
        )
        _write_json(out_path, model_to_dict(trained))
    elif model == "fusion":
        # staged order: both sensor models must already exist
        models_dir = models_dir or os.path.dirname(out_path) or "."
        uwb_model = _load_sensor_model(models_dir, "uwb")
        baro_model = _load_sensor_model(models_dir, "baro")
        fu = doc["fusion"]
        train_cfg = cfgmod.fusion_train_config(doc, seed, epochs)
        encoders = init_encoders(
            L=fu["window"], d_e=fu["embed_dim"], hidden=fu["hidden"], seed=train_cfg.seed
        )
        params = init_attention_params(
            d_e=fu["embed_dim"], d_k=fu["key_dim"], seed=train_cfg.seed
        )
        encoders, params, history = train_fusion(
            scenario,
            uwb_model,
            baro_model,
            encoders=encoders,
            params=params,
            cfg=train_cfg,
            L=fu["window"],
        )
        bundle = fusion_to_dict(
            encoders, params, cfgmod.ukf_state(doc), L=fu["window"], lam=fu["lambda"]
        )
        _write_json(out_path, bundle)
    else:
        raise ConfigError(f"unknown model stage {model!r} (expected uwb, baro, or fusion)")

    _write_history_csv(_history_path(out_path), history)
    final = history[-1] if history else (float("nan"), float("nan"))
    print(f"wrote {out_path} ({len(history)} epochs, final val loss {final[1]:.4g})")
    return out_path


def _zero_xy_pose(t, altitude, sigma_z, source) -> PoseEstimate:
    # altitude-only algorithms report x = y = 0 placeholders
    return PoseEstimate(
        t=t, position=Vec3Enu(0.0, 0.0, float(altitude)), sigma=(0.0, 0.0, float(sigma_z)), source=source
    )


def run_algorithm(scenario, algo, models_dir=None, doc=None):
    """Trajectory for one algorithm as a PoseEstimate sequence."""
    doc = doc if doc is not None else cfgmod.load_config(None)
    if algo == "baro":
        ref = scenario.baro_reference
        return [
            _zero_xy_pose(s.t, baro_altitude(s.pressure, ref), 0.0, "baro")
            for s in scenario.baro
        ]
    if algo == "baro-fcnn":
        model = _load_sensor_model(models_dir, "baro")
        poses, window = [], SlidingWindow(model.k)
        for s in scenario.baro:
            window = window.push(s)
            if window.is_full:
                alt, sigma_z = baro_fcnn_infer(model, window)
                poses.append(_zero_xy_pose(s.t, alt, sigma_z, "baro-fcnn"))
        return poses
    if algo == "uwb-geo":
        sigma_model = UwbSigmaModel(
            range_sigma=doc["sim"]["uwb"]["range_sigma"],
            angle_sigma=doc["sim"]["uwb"]["angle_sigma"],
        )
        return [uwb_geometric_solve(m, scenario.anchor, sigma_model) for m in scenario.uwb]
    if algo == "uwb-fcnn":
        model = _load_sensor_model(models_dir, "uwb")
        poses, window = [], SlidingWindow(model.k)
        for m in scenario.uwb:
            window = window.push(m)
            if window.is_full:
                poses.append(uwb_fcnn_infer(model, window, scenario.anchor))
        return poses
    if algo == "gpsins-ekf":
        frames = collect_fusion_frames(scenario, None, None, L=doc["fusion"]["window"])
        return [f.fallback for f in frames]
    if algo == "amfa":
        bundle_path = os.path.join(models_dir, MODEL_FILES["fusion"])
        if not os.path.exists(bundle_path):
            raise MissingInputError(
                f"missing fusion bundle: {bundle_path} (run train --model fusion first)"
            )
        encoders, params, ukf, L, lam = fusion_from_dict(_read_json(bundle_path))
        uwb_model = _load_sensor_model(models_dir, "uwb")
        baro_model = _load_sensor_model(models_dir, "baro")
        return list(
            amfa_pipeline(scenario, uwb_model, baro_model, encoders, params, ukf, L=L, lam=lam)
        )
    raise ConfigError(f"unknown algorithm {algo!r} (expected one of {', '.join(ALGORITHMS)})")


def cmd_run(data_dir, models_dir, algo, out_path, config_path=None):
    doc = cfgmod.load_config(config_path)
    scenario = records.read_scenario(data_dir)
    poses = run_algorithm(scenario, algo, models_dir=models_dir, doc=doc)
    os.makedirs(os.path.dirname(out_path) or ".", exist_ok=True)
    n = records.write_trajectory(out_path, poses, algo)
    print(f"wrote {out_path} ({n} epochs)")
    return out_path


def _truth_arrays(truth_path):
    rows = records.read_jsonl(truth_path)
    t = [float(r["t"]) for r in rows]
    xyz = [(float(r["x"]), float(r["y"]), float(r["z"])) for r in rows]
    return t, xyz


def cmd_report(est_paths, truth_path, out_dir, config_path=None):
    """Metric/CDF/boxplot CSVs plus a comparison table on stdout."""
    doc = cfgmod.load_config(config_path)
    ev = cfgmod.eval_options(doc)
    truth_t, truth_xyz = _truth_arrays(truth_path)
    os.makedirs(out_dir, exist_ok=True)

    rows, cdf_table, summaries, report_rows = [], {}, [], []
    for path in est_paths:
        recs, algo = records.read_trajectory(path)
        est_t = [r["t"] for r in recs]
        est_xyz = [(r["x"], r["y"], r["z"]) for r in recs]
        est_sigma = [(r["sx"], r["sy"], r["sz"]) for r in recs]
        series = match_series(
            est_t, est_xyz, truth_t, truth_xyz, est_sigma=est_sigma, tolerance=ev["match_tolerance"]
        )
        if series.matched == 0:
            raise NumericalFailureError(f"{path}: no epochs matched the truth timeline")
        row = compute_metrics(series, algorithm=algo)
        rows.append(row)
        cdf_table[algo] = compute_cdf(series.magnitudes, ev["cdf_thresholds"])
        summaries.append(boxplot_summary(series.magnitudes, algorithm=algo))
        report_rows.append(
            {
                "algorithm": algo,
                "rmse": row.rmse,
                "std": row.std,
                "max": row.max_error,
                "mean_error": row.mean_error,
                "mae": list(row.mae_axes),
                "rmse_axes": list(row.rmse_axes),
                "composite": composite_objective(row, ev["k1"], ev["k2"]),
                "matched_epochs": row.matched_epochs,
                "excluded_epochs": row.excluded_epochs,
            }
        )

    write_metrics_csv(os.path.join(out_dir, "metrics.csv"), rows, include_reference=True)
    write_cdf_csv(os.path.join(out_dir, "cdf.csv"), ev["cdf_thresholds"], cdf_table)
    write_boxplot_csv(os.path.join(out_dir, "boxplot.csv"), summaries)
    report = {
        "rows": report_rows,
        "cdf_thresholds": ev["cdf_thresholds"],
        "trade_off": {"k1": ev["k1"], "k2": ev["k2"]},
        "reference": {
            "label": REFERENCE_LABEL,
            "rmse": REFERENCE_RMSE_M,
            "std": REFERENCE_STD_M,
            "max": REFERENCE_MAX_M,
        },
    }
    with open(os.path.join(out_dir, "report.json"), "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")

    header = f"{'algorithm':<28}{'rmse':>9}{'std':>9}{'max':>9}{'matched':>9}{'excluded':>9}"
    print(header)
    print("-" * len(header))
    for row in rows:
        print(
            f"{row.algorithm:<28}{row.rmse:>9.3f}{row.std:>9.3f}{row.max_error:>9.3f}"
            f"{row.matched_epochs:>9d}{row.excluded_epochs:>9d}"
        )
    print(
        f"{REFERENCE_LABEL:<28}{REFERENCE_RMSE_M:>9.3f}{REFERENCE_STD_M:>9.3f}{REFERENCE_MAX_M:>9.3f}"
        f"{'-':>9}{'-':>9}"
    )
    print("reference row: field accuracy of the fused stack on the original")
    print("climbing-robot hardware; shown for context, not a simulation target.")
    return report


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="climbloc",
        description="Simulate, train, run, and evaluate the climbing-robot localization stack.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate a synthetic scenario directory")
    p.add_argument("--config", help="JSON config document (defaults when omitted)")
    p.add_argument("--out", required=True, help="output scenario directory")

    p = sub.add_parser("train", help="fit one model stage")
    p.add_argument("--model", required=True, choices=("uwb", "baro", "fusion"))
    p.add_argument("--data", required=True, help="scenario directory")
    p.add_argument("--out", required=True, help="output model JSON path")
    p.add_argument("--config")
    p.add_argument("--seed", type=int)
    p.add_argument("--epochs", type=int)
    p.add_argument("--models", help="directory holding prerequisite sensor models (fusion stage)")

    p = sub.add_parser("run", help="produce one algorithm's trajectory")
    p.add_argument("--data", required=True, help="scenario directory")
    p.add_argument("--models", help="directory holding trained model files")
    p.add_argument("--algo", required=True, choices=ALGORITHMS)
    p.add_argument("--out", required=True, help="output trajectory JSONL path")
    p.add_argument("--config")

    p = sub.add_parser("report", help="evaluate trajectories against truth")
    p.add_argument("--est", required=True, nargs="+", help="trajectory JSONL files")
    p.add_argument("--truth", required=True, help="truth JSONL file")
    p.add_argument("--out", required=True, help="output report directory")
    p.add_argument("--config")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "simulate":
            cmd_simulate(args.config, args.out)
        elif args.command == "train":
            cmd_train(
                args.model,
                args.data,
                args.out,
                config_path=args.config,
                seed=args.seed,
                epochs=args.epochs,
                models_dir=args.models,
            )
        elif args.command == "run":
            cmd_run(args.data, args.models or ".", args.algo, args.out, config_path=args.config)
        elif args.command == "report":
            cmd_report(args.est, args.truth, args.out, config_path=args.config)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return 2
    except (MissingInputError, FileNotFoundError) as err:
        print(f"missing input: {err}", file=sys.stderr)
        return 3
    except NumericalFailureError as err:
        print(f"numerical failure: {err}", file=sys.stderr)
        return 4
    except (OrderingError, ValueError) as err:
        print(f"invalid data: {err}", file=sys.stderr)
        return 2
    return 0
