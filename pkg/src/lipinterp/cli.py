"""Command-line entry point.

    lipinterp <subcommand> [--config PATH] [--out DIR] [--seed N] [--format csv|json] [--svg PATH]

Every subcommand writes its tables into ``--out`` (a directory, created if needed).
Exit status is 0 on success, 2 for an invalid config and 1 for any other failure; on
failure a one-line JSON error record goes to stderr.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys

import numpy as np

from . import config as cfgmod
from .control import ControlConfig, MC_SUMMARY_HEADER, TRACE_HEADER, mc_summary_rows, run_monte_carlo, trace_rows
from .core import LipschitzInterpolator, SampleSet, uniform_grid
from .errors import ConfigurationError, LipInterpError
from .experiments import (LACKI_HEADER, LACKI_SUMMARY_HEADER, STUDY_HEADER, SUMMARY_HEADER, ConvergenceStudyConfig,
                          fit_loglog_slope, lacki_rows, lacki_summary_rows, run_convergence_study, run_lacki_study,
                          study_rows, summary_rows, theoretical_rate)
from .lacki import LackiState
from .noise import empirical_eta_check
from .svg import render_svg, Series, study_svg, trajectory_svg
from .tables import atomic_path, read_csv, write_table

log = logging.getLogger("lipinterp")

COMMANDS = ("fit", "predict", "rate-study", "lacki-study", "pendulum", "eta-check")


def _workers() -> int:
    try:
        return max(1, int(os.environ.get("LI_THREADS", "1")))
    except ValueError:
        return 1


def _write_svg(path, text):
    if path:
        with atomic_path(path) as tmp, open(tmp, "w", encoding="utf-8") as fh:
            fh.write(text)


def _model(cfg):
    """Interpolator from a fit/predict config; LACKI when no Lipschitz constant is given."""
    data = SampleSet.from_csv(cfg["data"])
    metric = cfgmod.metric_from(cfg)
    if cfg["lipschitz"] is not None:
        lipschitz, source = cfg["lipschitz"], "config"
    else:
        if cfg["lambda"] is None and cfg["noise_bound"] is None:
            raise ConfigurationError("set lipschitz, or lambda / noise_bound to estimate it with LACKI")
        state = LackiState(data.dim, cfg["lambda"], metric, noise_bound=cfg["noise_bound"])
        for s, y in zip(data.inputs, data.outputs):
            state.update(s, y)
        lipschitz, source = state.current_l, "lacki"
    return data, LipschitzInterpolator(metric, lipschitz, cfg["noise_bound"]), source


def cmd_fit(cfg, args):
    data, model, source = _model(cfg)
    header = ("n_samples", "dim", "p", "alpha", "lipschitz", "source", "noise_bound")
    m = model.metric.to_dict()
    row = (len(data), data.dim, m["p"], m["alpha"], float(model.lipschitz), source,
           float("nan") if model.noise_bound is None else float(model.noise_bound))
    return [write_table(os.path.join(args.out, "model"), header, [row], args.format)]


def cmd_predict(cfg, args):
    data, model, _ = _model(cfg)
    if cfg["queries"]:
        rows = read_csv(cfg["queries"])
        cols = [f"x{i}" for i in range(data.dim)]
        queries = np.array([[float(r[c]) for c in cols] for r in rows]).reshape(-1, data.dim)
    elif cfg["grid"]:
        g = cfg["grid"]
        queries = uniform_grid(g["lower"], g["upper"], g["points"])
    else:
        queries = np.array(data.inputs)
    lo, hi = model.floor_ceiling(data, queries)
    pred = 0.5 * hi + 0.5 * lo
    header = [f"x{i}" for i in range(data.dim)] + ["prediction", "floor", "ceiling"]
    cols = [queries[:, i] for i in range(data.dim)] + [pred, lo, hi]
    if model.noise_bound is not None:
        header += ["lower", "upper"]
        cols += [lo - model.noise_bound, hi + model.noise_bound]
    rows = zip(*(c.tolist() for c in cols))
    return [write_table(os.path.join(args.out, "predictions"), header, rows, args.format)]


def _study_config(cfg):
    return ConvergenceStudyConfig(
        target=cfg["target"], metric=cfgmod.metric_from(cfg), lipschitz=cfg["lipschitz"],
        noise=cfgmod.noise_from(cfg), sample_sizes=cfg["sample_sizes"], repetitions=cfg["repetitions"],
        grid_points=cfg["grid_points"], seed=cfg["seed"])


def cmd_rate_study(cfg, args):
    study = _study_config(cfg)
    result = run_convergence_study(study, workers=_workers())
    spec = study.rate_spec()
    exponent = theoretical_rate(spec)[0] if spec else None
    out = [
        write_table(os.path.join(args.out, "results"), STUDY_HEADER, study_rows(result), args.format),
        write_table(os.path.join(args.out, "summary"), SUMMARY_HEADER, summary_rows(result, exponent), args.format),
    ]
    if len(result.sample_sizes) >= 3 and np.all(result.mean > 0):
        log.info("fitted log-log slope %.4f (theoretical %s)", fit_loglog_slope(result)[0],
                 "n/a" if exponent is None else f"{-exponent:.4f}")
    _write_svg(args.svg, study_svg(result.sample_sizes, result.mean, exponent))
    return out


def cmd_lacki_study(cfg, args):
    study = _study_config(cfg)
    result = run_lacki_study(study, cfg["lambda"], workers=_workers())
    out = [
        write_table(os.path.join(args.out, "lacki"), LACKI_HEADER, lacki_rows(result), args.format),
        write_table(os.path.join(args.out, "lacki_summary"), LACKI_SUMMARY_HEADER, lacki_summary_rows(result), args.format),
    ]
    ns = result.sample_sizes
    _write_svg(args.svg, render_svg(
        [Series(ns, result.mean_estimate, label="mean L(n)"),
         Series(ns, np.full(len(ns), result.l_star), label="L*", color="#d62728", dashed=True)],
        title="LACKI estimate", xlabel="n", ylabel="L(n)", logx=True))
    return out


def cmd_pendulum(cfg, args):
    if args.reps is not None:
        cfg["repetitions"] = args.reps
    if args.steps is not None:
        cfg["steps"] = args.steps
    control = ControlConfig(
        delta=cfg["delta"], k1=cfg["k1"], k2=cfg["k2"], lipschitz=cfg["lipschitz"], noise=cfgmod.noise_from(cfg),
        x0=tuple(cfg["x0"]), setpoint=tuple(cfg["setpoint"]), steps=cfg["steps"], repetitions=cfg["repetitions"],
        seed=cfg["seed"], metric=cfgmod.metric_from(cfg), oracle=cfg["oracle"])
    result = run_monte_carlo(control)
    out = [
        write_table(os.path.join(args.out, "trace"), TRACE_HEADER, trace_rows(result), args.format),
        write_table(os.path.join(args.out, "summary"), MC_SUMMARY_HEADER, mc_summary_rows(result), args.format),
    ]
    _write_svg(args.svg, trajectory_svg(result.errors, control.delta))
    return out


def cmd_eta_check(cfg, args):
    model = cfgmod.noise_from(cfg)
    rng = np.random.default_rng(np.random.SeedSequence([cfg["seed"]]))
    report = empirical_eta_check(model, cfg["n_draws"], cfg["epsilons"], rng, eta=cfg["eta"], gamma=cfg["gamma"])
    header = ("epsilon", "upper_freq", "lower_freq", "bound", "margin", "passed")
    rows = [(r.epsilon, r.upper_freq, r.lower_freq, r.bound, r.margin, int(r.passed)) for r in report.rows]
    log.info("eta check %s", "passed" if report.passed else "FAILED")
    return [write_table(os.path.join(args.out, "eta_check"), header, rows, args.format)]


HANDLERS = {
    "fit": cmd_fit,
    "predict": cmd_predict,
    "rate-study": cmd_rate_study,
    "lacki-study": cmd_lacki_study,
    "pendulum": cmd_pendulum,
    "eta-check": cmd_eta_check,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lipinterp", description="Lipschitz interpolation studies")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON config file (defaults apply when omitted)")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--seed", type=int, help="override the config seed")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--svg", help="also render a plot to this path")
        if name == "pendulum":
            p.add_argument("--reps", type=int)
            p.add_argument("--steps", type=int)
    return parser


def _fail(status: int, exc: Exception) -> int:
    record = {"status": status, "error": type(exc).__name__, "message": str(exc)}
    if isinstance(exc, cfgmod.SchemaError):
        record["diagnostics"] = exc.diagnostics
    print(json.dumps(record), file=sys.stderr)
    return status


def dispatch(args) -> int:
    try:
        cfg = cfgmod.read_config(args.command, args.config)
        if args.seed is not None:
            if "seed" not in cfgmod.SCHEMAS[args.command]["properties"]:
                raise cfgmod.SchemaError([f"{args.command} takes no seed"])
            cfg["seed"] = args.seed
            cfg = cfgmod.load_config(args.command, cfg)
        os.makedirs(args.out, exist_ok=True)
        written = HANDLERS[args.command](cfg, args)
    except ConfigurationError as exc:
        return _fail(2, exc)
    except (LipInterpError, OSError, ValueError) as exc:
        return _fail(1, exc)
    for path in written + ([args.svg] if args.svg else []):
        log.info("wrote %s", path)
    return 0


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(message)s")
    return dispatch(build_parser().parse_args(argv))


if __name__ == "__main__":
    sys.exit(main())
