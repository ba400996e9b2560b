"""Command-line surface: synthesis, estimation, rolling analysis, benchmark.

Every subcommand validates its configuration before touching data, writes
machine-readable CSV or JSON (JSON carries a schema version and the full
run configuration), and is byte-deterministic for a fixed seed. Exit codes:
0 ok, 1 computation failed on valid usage, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv as csv_mod
import io
import json
import math
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from . import fit as fit_mod
from .bench import bench_estimators
from .mle import ml_fit
from .rolling import rolling_estimates, variogram
from .series import (AnalysisWindow, ingest_csv, log_transform, returns,
                     serialize_csv, window_slice)
from .spectrum import cross_scale_correlation, scale_spectrum
from .synth import GaussianProcessSpec, synth_fbm, synth_mbm

SCHEMA_VERSION = "1"
OUTPUT_DIR_ENV = "SCALESPEC_OUTPUT_DIR"


class UsageError(Exception):
    """Invalid flags/config or unreadable input; maps to exit code 2."""


@dataclass
class RunConfig:
    """Validated run parameters; echoed verbatim into JSON output."""

    subcommand: str
    inputs: tuple = ()
    m: object = None            # positive int, or None for the full series
    j_i: int = 1
    j_e: object = None
    mode: str = ""
    h0: float = 0.5
    steps_per_year: int = 252
    seed: object = None
    replicas: object = None
    fmt: str = "csv"
    output: str = "-"
    extras: dict = field(default_factory=dict)

    def echo(self):
        doc = {
            "subcommand": self.subcommand,
            "inputs": list(self.inputs),
            "M": self.m,
            "j_i": self.j_i,
            "j_e": self.j_e,
            "mode": self.mode,
            "H0": self.h0,
            "steps_per_year": self.steps_per_year,
            "seed": self.seed,
            "replicas": self.replicas,
            "format": self.fmt,
            "output": self.output,
        }
        doc.update(self.extras)
        return {key: _json_safe(value) for key, value in doc.items()}


def _json_safe(value):
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        out = float(value)
        return out if math.isfinite(out) else None
    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]
    return value


def _cell(value):
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return str(value)


def _csv_text(columns, rows):
    lines = [",".join(columns)]
    for row in rows:
        lines.append(",".join(_cell(row[col]) for col in columns))
    return "\n".join(lines) + "\n"


def _json_text(config, rows, extra_tables=None):
    doc = {"schema_version": SCHEMA_VERSION, "config": config.echo(),
           "rows": [{k: _json_safe(v) for k, v in row.items()} for row in rows]}
    for name, table in (extra_tables or {}).items():
        doc[name] = [{k: _json_safe(v) for k, v in row.items()} for row in table]
    return json.dumps(doc, indent=2) + "\n"


def _resolve_path(path):
    if path != "-" and not os.path.isabs(path):
        base = os.environ.get(OUTPUT_DIR_ENV)
        if base:
            return os.path.join(base, path)
    return path


def _write_text(path, text):
    path = _resolve_path(path)
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w") as handle:
            handle.write(text)


def _emit(config, columns, rows, extra_tables=None, csv_text=None):
    if config.fmt == "json":
        text = _json_text(config, rows, extra_tables)
    else:
        text = csv_text if csv_text is not None else _csv_text(columns, rows)
    _write_text(config.output, text)


def _read_file(path):
    try:
        with open(path) as handle:
            return handle.read()
    except OSError as exc:
        raise UsageError(f"cannot read input file {path!r}: {exc}") from None


def _series_rows(series):
    value_col = {"price": "price", "return": "return"}.get(series.kind, "value")
    date_col = "date" if series.dates is not None else "index"
    rows = []
    for i, v in enumerate(series.values):
        stamp = (series.dates[i].isoformat() if series.dates is not None
                 else series.start_index + i)
        rows.append({date_col: stamp, value_col: float(v)})
    return [date_col, value_col], rows


def _load_log_series(text, args):
    kind = args.input_kind
    series = ingest_csv(text, date_column=args.date_column,
                        value_column=args.value_column, kind=kind)
    return log_transform(series) if kind == "price" else series


def _window_from(series, m, n0):
    if m is None:
        return AnalysisWindow.from_values(series.values, center_index=n0)
    if n0 is None:
        n0 = max(1, len(series) // 2)
    return window_slice(series, n0, m)


def _read_named_column(text, column):
    reader = csv_mod.DictReader(io.StringIO(text))
    if reader.fieldnames is None or column not in reader.fieldnames:
        raise ValueError(
            f"column {column!r} not found in header {reader.fieldnames}")
    out = []
    for row in reader:
        raw = (row.get(column) or "").strip()
        if raw == "" or raw.upper() in ("NA", "NAN"):
            out.append(math.nan)
            continue
        try:
            out.append(float(raw))
        except ValueError:
            raise ValueError(
                f"unparseable {column} value {raw!r}") from None
    return np.asarray(out, dtype=float)


# ---------------------------------------------------------------- parsing

def build_parser():
    out_p = argparse.ArgumentParser(add_help=False)
    out_p.add_argument("--format", choices=("csv", "json"), default="csv",
                       help="output format (default csv)")
    out_p.add_argument("--output", default="-", metavar="PATH",
                       help="output path; '-' writes to stdout; relative "
                            f"paths resolve under ${OUTPUT_DIR_ENV} when set")

    in_p = argparse.ArgumentParser(add_help=False)
    in_p.add_argument("--input", required=True, metavar="CSV")

    cols_p = argparse.ArgumentParser(add_help=False)
    # default None: pick "date" if present, else "index"
    cols_p.add_argument("--date-column", default=None)
    cols_p.add_argument("--value-column", default="price")
    cols_p.add_argument("--input-kind", choices=("price", "log_price"),
                        default="price",
                        help="whether the value column holds prices or "
                             "log prices (default price)")

    win_p = argparse.ArgumentParser(add_help=False)
    win_p.add_argument("--M", default="full", metavar="M|full",
                       help="window length, or 'full' for the whole series")
    win_p.add_argument("--n0", type=int, default=None,
                       help="1-based center time (default: series midpoint)")

    scale_p = argparse.ArgumentParser(add_help=False)
    scale_p.add_argument("--ji", type=int, default=1,
                         help="smallest fitted scale (default 1)")
    scale_p.add_argument("--je", type=int, default=None,
                         help="largest fitted scale (default floor(Meff/2))")

    year_p = argparse.ArgumentParser(add_help=False)
    year_p.add_argument("--steps-per-year", type=int, default=252)

    parser = argparse.ArgumentParser(
        prog="scalespec",
        description="Local power-law structure of time series: scale "
                    "spectra, Hurst/volatility estimation, rolling tracks.")
    sub = parser.add_subparsers(dest="subcommand", required=True,
                                metavar="command")

    p = sub.add_parser("synth", parents=[out_p],
                       help="generate a synthetic log-price path")
    p.add_argument("--kind", choices=("fbm", "mbm"), required=True)
    p.add_argument("--H", type=float, required=True)
    p.add_argument("--H-end", type=float, default=None,
                   help="linear ramp endpoint for H (mbm only)")
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--sigma-end", type=float, default=None,
                   help="linear ramp endpoint for sigma (mbm only)")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--method", choices=("auto", "circulant", "dense"),
                   default="auto", help="fbm sampler (default auto)")
    p.add_argument("--K", type=int, default=2 ** 16,
                   help="mbm frequency grid size (default 65536)")
    p.add_argument("--Xi", type=float, default=None,
                   help="mbm frequency cutoff (default pi*n)")

    sub.add_parser("returns", parents=[out_p, in_p, cols_p],
                   help="simple returns of a price series")

    sub.add_parser("spectrum", parents=[out_p, in_p, cols_p, win_p, scale_p],
                   help="scale spectrum of one analysis window")

    p = sub.add_parser("fit", parents=[out_p, in_p, cols_p, win_p, scale_p,
                                       year_p],
                       help="power-law fit of one window's scale spectrum")
    p.add_argument("--mode", choices=("robust", "linear", "cubic", "fixed"),
                   default="robust")
    p.add_argument("--H0", type=float, default=0.5,
                   help="pinned H for --mode fixed (default 0.5)")
    p.add_argument("--points-output", default=None, metavar="PATH",
                   help="also write per-scale points and fitted line (CSV)")

    sub.add_parser("ml-fit", parents=[out_p, in_p, cols_p, win_p, scale_p,
                                      year_p],
                   help="Gaussian maximum-likelihood fit of one window")

    p = sub.add_parser("roll", parents=[out_p, in_p, cols_p, scale_p, year_p],
                       help="rolling (H, sigma, misfit) parameter track")
    p.add_argument("--M", type=int, required=True, help="window length")
    p.add_argument("--mode", choices=("robust", "fixed"), default="robust")
    p.add_argument("--H0", type=float, default=0.5)

    p = sub.add_parser("xcorr", parents=[out_p, in_p, cols_p, win_p, scale_p],
                       help="per-scale detail correlation of two series")
    p.add_argument("--other", required=True, metavar="CSV",
                   help="second input file")

    p = sub.add_parser("variogram", parents=[out_p, in_p],
                       help="semivariance of a track column vs lag")
    p.add_argument("--column", default="misfit")
    p.add_argument("--max-lag", type=int, required=True)

    p = sub.add_parser("bench-estimators", parents=[out_p, scale_p],
                       help="Monte Carlo comparison of the four estimators")
    p.add_argument("--H", required=True, metavar="H[,H...]",
                   help="comma-separated true Hurst values")
    p.add_argument("--noise", type=float, default=0.0,
                   help="observation noise std as a multiple of the "
                        "per-step increment std (default 0)")
    p.add_argument("--replicas", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--residual-output", default=None, metavar="PATH",
                   help="also write per-scale residual ratios (CSV)")

    return parser


def _check(cond, message):
    if not cond:
        raise UsageError(message)


def _parse_m(raw):
    if raw == "full":
        return None
    try:
        m = int(raw)
    except ValueError:
        raise UsageError(f"--M must be an integer or 'full', got {raw!r}") from None
    _check(m >= 4, f"--M must be >= 4, got {m}")
    return m


def _check_scales(args, strict):
    _check(args.ji >= 1, f"--ji must be >= 1, got {args.ji}")
    if args.je is not None:
        if strict:
            _check(args.je > args.ji,
                   f"need --je > --ji, got [{args.ji}, {args.je}]")
        else:
            _check(args.je >= args.ji,
                   f"need --je >= --ji, got [{args.ji}, {args.je}]")


def _check_open_unit_flag(value, name):
    _check(0.0 < value < 1.0, f"{name} must lie strictly in (0, 1), got {value}")


def _make_config(args):
    """Validate flags against module preconditions; raises UsageError."""
    sc = args.subcommand
    cfg = RunConfig(subcommand=sc, fmt=args.format, output=args.output)

    if sc == "synth":
        _check(args.n >= 2, f"--n must be >= 2, got {args.n}")
        _check_open_unit_flag(args.H, "--H")
        _check(args.sigma >= 0, f"--sigma must be >= 0, got {args.sigma}")
        if args.kind == "fbm":
            _check(args.H_end is None and args.sigma_end is None,
                   "--H-end/--sigma-end require --kind mbm")
            _check(args.sigma > 0, "--sigma must be > 0 for fbm")
        else:
            if args.H_end is not None:
                _check_open_unit_flag(args.H_end, "--H-end")
            if args.sigma_end is not None:
                _check(args.sigma_end >= 0, "--sigma-end must be >= 0")
            _check(args.K >= 2 ** 12 and args.K % 2 == 0,
                   f"--K must be an even integer >= 4096, got {args.K}")
            _check(args.K >= 4 * args.n,
                   f"--K must be >= 4n = {4 * args.n}, got {args.K}")
            if args.Xi is not None:
                _check(args.Xi > 0, "--Xi must be > 0")
        cfg.seed = args.seed
        cfg.extras = {"kind": args.kind, "H": args.H, "H_end": args.H_end,
                      "sigma": args.sigma, "sigma_end": args.sigma_end,
                      "n": args.n, "method": args.method, "K": args.K,
                      "Xi": args.Xi}
        return cfg

    if sc == "bench-estimators":
        try:
            h_values = [float(tok) for tok in args.H.split(",") if tok.strip()]
        except ValueError:
            raise UsageError(f"--H must be comma-separated floats, "
                             f"got {args.H!r}") from None
        _check(bool(h_values), "--H needs at least one value")
        for h in h_values:
            _check_open_unit_flag(h, "--H")
        _check(args.noise >= 0, f"--noise must be >= 0, got {args.noise}")
        _check(args.replicas >= 10, f"--replicas must be >= 10, "
                                    f"got {args.replicas}")
        _check(args.n >= 32, f"--n must be >= 32, got {args.n}")
        _check_scales(args, strict=True)
        cfg.j_i, cfg.j_e = args.ji, args.je
        cfg.seed, cfg.replicas = args.seed, args.replicas
        cfg.extras = {"H_values": h_values, "noise": args.noise, "n": args.n,
                      "residual_output": args.residual_output}
        return cfg

    # the remaining subcommands read --input
    cfg.inputs = (args.input,) if sc != "xcorr" else (args.input, args.other)

    if sc == "returns":
        _check(args.input_kind == "price",
               "returns needs actual prices; --input-kind log_price "
               "is not supported here")
        cfg.extras = {"date_column": args.date_column,
                      "value_column": args.value_column}
        return cfg

    if sc == "variogram":
        _check(args.max_lag >= 1, f"--max-lag must be >= 1, got {args.max_lag}")
        cfg.extras = {"column": args.column, "max_lag": args.max_lag}
        return cfg

    if sc == "roll":
        _check(args.M >= 4, f"--M must be >= 4, got {args.M}")
        _check_scales(args, strict=True)
        if args.je is not None:
            _check(args.je <= args.M // 2,
                   f"--je must be <= floor(M/2) = {args.M // 2}, got {args.je}")
        _check_open_unit_flag(args.H0, "--H0")
        _check(args.steps_per_year >= 1, "--steps-per-year must be >= 1")
        cfg.m, cfg.j_i, cfg.j_e = args.M, args.ji, args.je
        cfg.mode, cfg.h0 = args.mode, args.H0
        cfg.steps_per_year = args.steps_per_year
        cfg.extras = {"date_column": args.date_column,
                      "value_column": args.value_column,
                      "input_kind": args.input_kind}
        return cfg

    # spectrum / fit / ml-fit / xcorr share the window-selection flags
    cfg.m = _parse_m(args.M)
    strict = sc in ("fit", "ml-fit")
    _check_scales(args, strict=strict)
    if args.n0 is not None:
        _check(args.n0 >= 1, f"--n0 must be >= 1, got {args.n0}")
    cfg.j_i, cfg.j_e = args.ji, args.je
    cfg.extras = {"date_column": args.date_column,
                  "value_column": args.value_column,
                  "input_kind": args.input_kind, "n0": args.n0}
    if sc == "fit":
        _check_open_unit_flag(args.H0, "--H0")
        _check(args.steps_per_year >= 1, "--steps-per-year must be >= 1")
        cfg.mode, cfg.h0 = args.mode, args.H0
        cfg.steps_per_year = args.steps_per_year
        cfg.extras["points_output"] = args.points_output
    elif sc == "ml-fit":
        _check(args.steps_per_year >= 1, "--steps-per-year must be >= 1")
        cfg.mode = "ml"
        cfg.steps_per_year = args.steps_per_year
    elif sc == "xcorr":
        cfg.extras["other"] = args.other
    return cfg


# ------------------------------------------------------------- dispatch

def _cmd_synth(config, args):
    ex = config.extras
    if ex["kind"] == "fbm":
        spec = GaussianProcessSpec(h_path=ex["H"], sigma_path=ex["sigma"],
                                   n=ex["n"], seed=config.seed)
        series = synth_fbm(spec, method=ex["method"])
    else:
        n = ex["n"]
        h_path = (np.linspace(ex["H"], ex["H_end"], n)
                  if ex["H_end"] is not None else ex["H"])
        sigma_path = (np.linspace(ex["sigma"], ex["sigma_end"], n)
                      if ex["sigma_end"] is not None else ex["sigma"])
        spec = GaussianProcessSpec(h_path=h_path, sigma_path=sigma_path,
                                   n=n, seed=config.seed)
        series = synth_mbm(spec, freq_grid_size=ex["K"], freq_cutoff=ex["Xi"])
    columns, rows = _series_rows(series)
    _emit(config, columns, rows, csv_text=serialize_csv(series))


def _cmd_returns(config, args):
    text = _read_file(config.inputs[0])
    prices = ingest_csv(text, date_column=args.date_column,
                        value_column=args.value_column, kind="price")
    out = returns(prices)
    columns, rows = _series_rows(out)
    _emit(config, columns, rows, csv_text=serialize_csv(out))


def _cmd_spectrum(config, args):
    text = _read_file(config.inputs[0])
    series = _load_log_series(text, args)
    window = _window_from(series, config.m, config.extras["n0"])
    spec = scale_spectrum(window, config.j_i, config.j_e)
    rows = [{"j": int(j), "scale_steps": int(2 * j), "s_j": float(s),
             "n_j": int(c)}
            for j, s, c in zip(spec.scales, spec.s_values, spec.counts)]
    _emit(config, ["j", "scale_steps", "s_j", "n_j"], rows)


def _fit_row(result, steps_per_year):
    return {
        "h": result.h_hat,
        "sigma_step": result.sigma_step,
        "sigma_annual": fit_mod.annualize(result.sigma_step, result.h_hat,
                                          steps_per_year),
        "c": result.c_hat,
        "p": result.p_hat,
        "misfit": result.misfit,
        "branch": result.branch,
    }


_FIT_COLUMNS = ["h", "sigma_step", "sigma_annual", "c", "p", "misfit", "branch"]


def _cmd_fit(config, args):
    text = _read_file(config.inputs[0])
    series = _load_log_series(text, args)
    window = _window_from(series, config.m, config.extras["n0"])
    spec = scale_spectrum(window, config.j_i, config.j_e)
    if config.mode == "robust":
        result = fit_mod.robust_fit(spec)
    elif config.mode == "linear":
        result = fit_mod.gls_fit(spec, 1)
    elif config.mode == "cubic":
        result = fit_mod.gls_fit(spec, 3)
    else:
        result = fit_mod.fixed_h_fit(spec, config.h0)
    _emit(config, _FIT_COLUMNS, [_fit_row(result, config.steps_per_year)])
    points_path = config.extras.get("points_output")
    if points_path:
        x = spec.log2_scale_axis
        fitted = result.c_hat + result.p_hat * x
        rows = [{"j": int(j), "scale_steps": int(2 * j),
                 "log2_scale": float(xv), "log2_s": float(np.log2(s)),
                 "fitted_log2_s": float(f)}
                for j, xv, s, f in zip(spec.scales, x, spec.s_values, fitted)]
        _write_text(points_path,
                    _csv_text(["j", "scale_steps", "log2_scale", "log2_s",
                               "fitted_log2_s"], rows))


def _cmd_ml_fit(config, args):
    text = _read_file(config.inputs[0])
    series = _load_log_series(text, args)
    window = _window_from(series, config.m, config.extras["n0"])
    result = ml_fit(window)
    spec = scale_spectrum(window, config.j_i, config.j_e)
    implied = fit_mod.implied_power_law(result.h_hat, result.sigma_step,
                                        spec.j_range, branch="ml")
    row = {
        "h": result.h_hat,
        "sigma_step": result.sigma_step,
        "sigma_annual": fit_mod.annualize(result.sigma_step, result.h_hat,
                                          config.steps_per_year),
        "c": implied.c_hat,
        "p": implied.p_hat,
        "misfit": fit_mod.spectral_misfit(spec, implied),
        "branch": "ml",
        "log_likelihood": result.log_likelihood,
    }
    _emit(config, _FIT_COLUMNS + ["log_likelihood"], [row])


def _cmd_roll(config, args):
    text = _read_file(config.inputs[0])
    series = _load_log_series(text, args)
    mode = "fixed_h" if config.mode == "fixed" else "robust"
    track = rolling_estimates(series, config.m, j_i=config.j_i,
                              j_e=config.j_e, mode=mode, h0=config.h0,
                              steps_per_year=config.steps_per_year)
    rows = []
    for i in range(len(series)):
        stamp = (series.dates[i].isoformat() if series.dates is not None
                 else series.start_index + i)
        rows.append({
            "date": stamp,
            "h": float(track.h_track[i]),
            "sigma_annual": float(track.sigma_annual_track[i]),
            "misfit": float(track.misfit_track[i]),
            "flag": bool(track.flags[i]),
        })
    _emit(config, ["date", "h", "sigma_annual", "misfit", "flag"], rows)


def _cmd_xcorr(config, args):
    text_a = _read_file(config.inputs[0])
    text_b = _read_file(config.inputs[1])
    series_a = _load_log_series(text_a, args)
    series_b = _load_log_series(text_b, args)
    window_a = _window_from(series_a, config.m, config.extras["n0"])
    window_b = _window_from(series_b, config.m, config.extras["n0"])
    cross = cross_scale_correlation(window_a, window_b, config.j_i, config.j_e)
    j_lo, j_hi = cross.j_range
    rows = [{"j": int(j), "scale_steps": int(2 * j), "rho": float(r)}
            for j, r in zip(range(j_lo, j_hi + 1), cross.rho)]
    _emit(config, ["j", "scale_steps", "rho"], rows)


def _cmd_variogram(config, args):
    text = _read_file(config.inputs[0])
    values = _read_named_column(text, config.extras["column"])
    result = variogram(values, config.extras["max_lag"])
    rows = [{"lag": int(lag), "gamma": float(g)}
            for lag, g in zip(result.lags, result.gamma)]
    _emit(config, ["lag", "gamma"], rows)


def _cmd_bench(config, args):
    ex = config.extras
    rows, residual_rows = bench_estimators(
        ex["H_values"], ex["noise"], config.replicas, ex["n"], config.seed,
        j_i=config.j_i, j_e=config.j_e)
    columns = ["H", "noise", "estimator", "mean_h", "std_h", "std_error",
               "bias"]
    _emit(config, columns, rows,
          extra_tables={"residual_rows": residual_rows})
    if ex["residual_output"]:
        _write_text(ex["residual_output"],
                    _csv_text(["H", "noise", "scale_steps", "ratio"],
                              residual_rows))


_DISPATCH = {
    "synth": _cmd_synth,
    "returns": _cmd_returns,
    "spectrum": _cmd_spectrum,
    "fit": _cmd_fit,
    "ml-fit": _cmd_ml_fit,
    "roll": _cmd_roll,
    "xcorr": _cmd_xcorr,
    "variogram": _cmd_variogram,
    "bench-estimators": _cmd_bench,
}


def run(argv=None):
    """Parse argv, dispatch, and return the process exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        config = _make_config(args)
        _DISPATCH[config.subcommand](config, args)
        return 0
    except UsageError as exc:
        print(f"scalespec: error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, np.linalg.LinAlgError) as exc:
        print(f"scalespec: error: {exc}", file=sys.stderr)
        return 1


def main(argv=None):
    sys.exit(run(argv))
