"""Command-line front end: ``bldc-ann <subcommand>``.

Exit status 0 on success, 2 for usage, configuration and file problems,
3 when the simulation or the training diverges.
"""
from __future__ import annotations

import argparse
import glob
import os
import re
import sys

import numpy as np

from . import svg
from .ann.cases import CASES, build_case, case_train_config, initial_network, predict_case
from .ann.gradcheck import audit
from .ann.io import export_metrics_csv, import_metrics_csv, load_model, save_model
from .ann.training import train
from .config import CONFIG_KEYS, read_config_file, sim_config_from_mapping
from .errors import (
    ConfigInvalid,
    DimensionMismatch,
    IoFailure,
    MissingColumn,
    NonFiniteLoss,
    NumericalDivergence,
    ParseFailure,
    SchemaMismatch,
)
from .sim import run_simulation, summarize
from .trace import export_csv, import_csv

EXIT_USAGE = 2
EXIT_NUMERIC = 3
GRAD_TOLERANCE = 1e-6


class UsageError(Exception):
    pass


def _config_epilog():
    lines = ["config keys (TOML, dotted or tabled):"]
    for key, (default, text) in CONFIG_KEYS.items():
        lines.append(f"  {key:28s} {text} [default {default}]")
    return "\n".join(lines)


def _flat_config(path):
    if path is None:
        return {}
    if not os.path.isfile(path):
        raise UsageError(f"config not found: {path}")
    return read_config_file(path)


def _outdir(path):
    try:
        os.makedirs(path, exist_ok=True)
    except OSError as exc:
        raise IoFailure(f"cannot create output directory {path}: {exc}") from exc
    return path


def _write_text(path, text):
    try:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def summary_text(trace) -> str:
    s = summarize(trace)
    settle = "not settled" if s.settle_time is None else f"{s.settle_time:.2f} s"
    return "\n".join([
        f"rows                  {len(trace)}",
        f"settle time (1%)      {settle}",
        f"steady-state error    {100 * s.steady_state_error:.4f} %",
        f"final speed           {s.final_speed_rpm:.3f} rpm",
        f"final load torque     {s.final_load_torque:.4f} N*m",
        f"mean Te (last 5 s)    {s.mean_te:.4f} N*m",
        f"TL + B*w (last 5 s)   {s.expected_te:.4f} N*m",
    ]) + "\n"


def cmd_simulate(args):
    flat = _flat_config(args.config)
    if args.seed is not None:
        flat["sim.seed"] = args.seed
    cfg = sim_config_from_mapping(flat)
    trace = run_simulation(cfg)
    out = _outdir(args.out)
    path = os.path.join(out, "trace.csv")
    export_csv(trace, path)
    text = summary_text(trace)
    _write_text(os.path.join(out, "summary.txt"), text)
    print(text, end="")
    print(f"wrote {path}")
    return 0


def _train_config(args, flat):
    overrides = {}
    for key in ("epochs", "learning_rate", "lr_decay", "batch_size", "split_fraction", "seed",
                "optimizer", "loss"):
        if f"train.{key}" in flat:
            overrides[key] = flat[f"train.{key}"]
    if args.epochs is not None:
        overrides["epochs"] = args.epochs
    if args.lr is not None:
        overrides["learning_rate"] = args.lr
    if args.seed is not None:
        overrides["seed"] = args.seed
    try:
        return case_train_config(args.case, **overrides)
    except (TypeError, ValueError) as exc:
        raise ConfigInvalid(f"bad training settings: {exc}") from exc


def _trace_path(args):
    return args.trace or os.path.join(args.out, "trace.csv")


def cmd_train(args):
    cfg = _train_config(args, _flat_config(args.config))
    trace = import_csv(_trace_path(args))
    data, layers = build_case(args.case, trace, cfg.split_fraction, cfg.seed, args.softmax)
    net = initial_network(args.case, data, layers, cfg.seed)
    net, history = train(net, data, cfg)
    out = _outdir(args.out)
    export_metrics_csv(history, os.path.join(out, f"case{args.case}_metrics.csv"))
    save_model(net, os.path.join(out, f"case{args.case}_model.txt"))
    m = history[-1]
    print(f"case {args.case}  epochs {m.epoch}  optimizer {cfg.optimizer}  lr {cfg.learning_rate:g}")
    print(f"train loss {m.train_loss:.6g}  val loss {m.val_loss:.6g}")
    print(f"train accuracy {m.train_accuracy:.4f}  val accuracy {m.val_accuracy:.4f}")
    print(f"val mse {m.mse:.6g}  val mae {m.mae:.6g}")
    return 0


def cmd_predict(args):
    trace = import_csv(_trace_path(args))
    model_path = args.model or os.path.join(args.out, f"case{args.case}_model.txt")
    net = load_model(model_path)
    seed = 0 if args.seed is None else args.seed
    data, _ = build_case(args.case, trace, seed=seed,
                         softmax_output=net.layers[-1].activation == "softmax")
    if net.input_width != data.inputs.shape[1] or net.output_width != data.targets.shape[1]:
        raise DimensionMismatch(f"{model_path} does not fit case {args.case}")
    series = predict_case(net, data)
    names = CASES[args.case].targets
    header = ["t"] + [f"{n}_target" for n in names] + [f"{n}_prediction" for n in names]
    cols = [series["t"][:, None], series["target"], series["prediction"]]
    out = _outdir(args.out)
    path = os.path.join(out, f"case{args.case}_predictions.csv")
    try:
        np.savetxt(path, np.hstack(cols), fmt="%.9g", delimiter=",", header=",".join(header),
                   comments="")
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc
    print(f"wrote {path}")
    return 0


def cmd_gradcheck(args):
    results = audit(seed=0 if args.seed is None else args.seed)
    worst = 0.0
    for r in results:
        worst = max(worst, r.max_rel_error)
        print(f"{r.hidden:9s} {r.output:9s} {r.loss:21s} {r.max_rel_error:.3e}")
    ok = worst < GRAD_TOLERANCE
    print(f"max relative error {worst:.3e}: {'PASS' if ok else 'FAIL'}")
    return 0 if ok else EXIT_NUMERIC


def _waveform_figures(trace):
    t = trace["t"]
    main = svg.render([
        svg.Panel("speed", "rpm").add(t, trace["speed_ref"], "reference")
                                .add(t, trace["speed_actual"], "actual"),
        svg.Panel("torque", "N*m").add(t, trace["te"], "Te").add(t, trace["load_torque"], "load"),
        svg.Panel("phase currents", "A").add(t, trace["ia"], "ia").add(t, trace["ib"], "ib")
                                       .add(t, trace["ic"], "ic"),
    ], title="closed-loop run")
    # logic-level strips over the first 100 logged rows
    k = slice(0, min(100, len(t)))
    strips = [svg.Panel("normalised back-EMF", "").add(t[k], trace["emf_norm_a"][k], "a")
              .add(t[k], trace["emf_norm_b"][k], "b").add(t[k], trace["emf_norm_c"][k], "c")]
    for group, names in (("Hall", ("hall_a", "hall_b", "hall_c")),
                         ("PWM enables", ("pwm_a", "pwm_b", "pwm_c", "pwm_d", "pwm_e", "pwm_f"))):
        panel = svg.Panel(group, "", step=True)
        for j, n in enumerate(names):
            panel.add(t[k], trace[n][k] + 1.5 * j, n)
        strips.append(panel)
    return {"waveforms.svg": main, "signals.svg": svg.render(strips, title="sensor and switch signals")}


def _metric_figure(case_id, history):
    ep = [m.epoch for m in history]
    return svg.render([
        svg.Panel("accuracy", "").add(ep, [m.train_accuracy for m in history], "train")
                                 .add(ep, [m.val_accuracy for m in history], "validation"),
        svg.Panel("loss", "").add(ep, [m.train_loss for m in history], "train")
                             .add(ep, [m.val_loss for m in history], "validation"),
        svg.Panel("mean absolute error", "target units").add(ep, [m.mae for m in history], "validation"),
    ], title=f"case {case_id} training", xlabel="epoch")


def cmd_figures(args):
    out = _outdir(args.out)
    written = []
    figures = _waveform_figures(import_csv(_trace_path(args)))
    metrics_dir = args.metrics_dir or args.out
    for path in sorted(glob.glob(os.path.join(metrics_dir, "case*_metrics.csv"))):
        case_id = int(re.search(r"case(\d+)_metrics", os.path.basename(path)).group(1))
        figures[f"case{case_id}_metrics.svg"] = _metric_figure(case_id, import_metrics_csv(path))
    for name, text in figures.items():
        _write_text(os.path.join(out, name), text)
        written.append(name)
    print("wrote " + ", ".join(written))
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="bldc-ann",
        description="Six-step BLDC drive simulator and trace-trained neural networks.",
        epilog=_config_epilog(),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, case=False, trace=False):
        p.add_argument("--config", help="TOML config file (see keys below)")
        p.add_argument("--out", default="out", help="output directory [out]")
        p.add_argument("--seed", type=int, help="seed override")
        if case:
            p.add_argument("--case", type=int, required=True, choices=sorted(CASES),
                           help="prediction case 1-4")
        if trace:
            p.add_argument("--trace", help="trace CSV [<out>/trace.csv]")
        p.epilog = _config_epilog()
        p.formatter_class = argparse.RawDescriptionHelpFormatter
        return p

    p = common(sub.add_parser("simulate", help="run the closed-loop drive, write trace.csv"))
    p.set_defaults(func=cmd_simulate)

    p = common(sub.add_parser("train", help="train one case network on a trace"), True, True)
    p.add_argument("--epochs", type=int, help="epochs [100]")
    p.add_argument("--lr", type=float, help="learning rate [per case]")
    p.add_argument("--softmax", action="store_true", help="softmax output for cases 1-2")
    p.set_defaults(func=cmd_train)

    p = common(sub.add_parser("predict", help="run a trained model over a trace"), True, True)
    p.add_argument("--model", help="model file [<out>/case<N>_model.txt]")
    p.set_defaults(func=cmd_predict)

    p = common(sub.add_parser("gradcheck", help="finite-difference audit of backprop"))
    p.set_defaults(func=cmd_gradcheck)

    p = common(sub.add_parser("figures", help="SVG charts from trace and metrics files"),
               trace=True)
    p.add_argument("--metrics-dir", help="directory holding case*_metrics.csv [<out>]")
    p.set_defaults(func=cmd_figures)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, ConfigInvalid, IoFailure, SchemaMismatch, ParseFailure, MissingColumn,
            DimensionMismatch) as exc:
        msg = exc.args[0] if isinstance(exc, MissingColumn) and exc.args else exc
        print(f"error: {msg}", file=sys.stderr)
        return EXIT_USAGE
    except (NumericalDivergence, NonFiniteLoss) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
