"""Run orchestration and deterministic file emission.

`qbm run --config <path> [--out <dir>]` writes one CSV per requested
product, a text report, and a gnuplot script for the plottable products.
`qbm report --config <path>` prints the report to stdout.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.  All
diagnostics go to stderr.  Output is deterministic: fixed product order,
fixed float formatting (17 significant digits, scientific), Unix
newlines.  The environment variable QBM_THREADS (0 = auto) fans the
per-time-point work out to a thread pool; results are assembled in grid
order, so the worker count never changes the bytes written.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from .config import PRODUCTS, RunConfig, parse_config
from .errors import ConfigError, InvalidValue, MissingProduct, QbmError
from .evolution import oscillator_population, survival_probability
from .langevin import (
    coefficient_series,
    estimate_gamma,
    golden_rule_rate,
    mean_position,
    recurrence_time,
)
from .model import build_bath, thermal_occupations
from .series import TimeGrid
from .spectrum import Spectrum, solve_spectrum

_PLOTTABLE = ("spectrum", "population", "survival", "position", "coefficients")

# report fit window and equilibrium averaging window
_FIT_WINDOW = (1.0, 20.0)
_PLATEAU_WINDOW = (100.0, 300.0)


def _fmt(x: float) -> str:
    return f"{x:.16e}"


def _worker_count() -> int:
    raw = os.environ.get("QBM_THREADS", "").strip()
    if not raw:
        return 1
    try:
        workers = int(raw)
    except ValueError:
        raise InvalidValue(f"QBM_THREADS must be an integer, got {raw!r}")
    if workers < 0:
        raise InvalidValue(f"QBM_THREADS must be >= 0, got {workers}")
    # 0 = auto: the vectorized single pass already saturates one core and
    # keeps the memory footprint flat, so auto means one worker.
    return workers if workers > 0 else 1


_BLOCK = 256


def _over_grid(fn, ts: np.ndarray) -> np.ndarray:
    """Evaluate fn over the grid in fixed 256-point blocks, reassembled in
    grid order.  fn maps a time array to an array whose last axis is time.
    The block partition is independent of the worker count (floating-point
    reductions depend on array length, so a worker-dependent split would
    change the last ulp of the output); QBM_THREADS only decides how many
    blocks run concurrently."""
    if ts.size <= _BLOCK:
        return fn(ts)
    blocks = np.split(ts, np.arange(_BLOCK, ts.size, _BLOCK))
    workers = _worker_count()
    if workers <= 1:
        parts = [fn(b) for b in blocks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(fn, blocks))
    return np.concatenate(parts, axis=-1)


def _resolve_grid(config: RunConfig, spec: Spectrum) -> TimeGrid:
    if config.grid_preset == "default":
        return config.grid
    # recurrence preset: coarse step (tau_Omega/8), long horizon (1.2 t_r)
    step = spec.tau_omega / 8.0
    horizon = 1.2 * recurrence_time(spec)
    n_steps = max(2, int(math.ceil(horizon / step)) + 1)
    return TimeGrid(t_start=0.0, t_step=step, n_steps=n_steps)


def _write_text(path: Path, text: str) -> Path:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    return path


def _spectrum_csv(spec: Spectrum) -> str:
    lines = ["nu,alpha,weight"]
    for nu, (a, w) in enumerate(zip(spec.alphas, spec.weights)):
        lines.append(f"{nu},{_fmt(a)},{_fmt(w)}")
    return "\n".join(lines) + "\n"


def _two_column_csv(header: str, ts: np.ndarray, values: np.ndarray) -> str:
    lines = [header]
    for t, v in zip(ts, values):
        lines.append(f"{_fmt(t)},{_fmt(v)}")
    return "\n".join(lines) + "\n"


def _coefficients_csv(ts: np.ndarray, omega2, gamma, ok) -> str:
    # flagged samples keep the row (rectangular series) but carry empty
    # value fields and denominator_ok = 0
    lines = ["t,omega2,gamma,denominator_ok"]
    for t, o, g, k in zip(ts, omega2, gamma, ok):
        if k:
            lines.append(f"{_fmt(t)},{_fmt(o)},{_fmt(g)},1")
        else:
            lines.append(f"{_fmt(t)},,,0")
    return "\n".join(lines) + "\n"


def _report_text(config: RunConfig, spec: Spectrum, grid: TimeGrid) -> str:
    bath = spec.bath
    sum_w = float(np.sum(spec.weights))
    sum_aw = float(spec.alphas @ spec.weights)
    sum_a2w = float(spec.alphas**2 @ spec.weights)
    m2 = spec.omega0**2 + float(np.sum(bath.couplings**2))

    try:
        est = estimate_gamma(spec, _FIT_WINDOW)
        gamma_fit, gamma_rms = est.gamma, est.rms_residual
    except QbmError:
        gamma_fit, gamma_rms = math.nan, math.nan

    ts = grid.times()
    lo, hi = _PLATEAU_WINDOW
    window = ts[(ts >= lo) & (ts <= hi)]
    if window.size:
        occ = thermal_occupations(bath, config.model.beta, config.n_omega0)
        plateau = float(np.mean(oscillator_population(spec, occ, window)))
    else:
        plateau = math.nan

    t_r = recurrence_time(spec)
    lines = [
        f"eigenvalues = {spec.n_levels}",
        f"sum_w_residual = {_fmt(abs(sum_w - 1.0))}",
        f"sum_alpha_w_residual = {_fmt(abs(sum_aw - spec.omega0))}",
        f"sum_alpha2_w_residual_rel = {_fmt(abs(sum_a2w - m2) / m2)}",
        f"gamma_fit = {_fmt(gamma_fit)}",
        f"gamma_fit_rms_residual = {_fmt(gamma_rms)}",
        f"gamma_golden_rule = {_fmt(golden_rule_rate(bath, spec.omega0))}",
        f"t_recurrence = {_fmt(t_r)}",
        f"tau_oscillator = {_fmt(spec.tau_omega)}",
        f"recurrence_over_period = {_fmt(t_r / spec.tau_omega)}",
        f"plateau_mean = {_fmt(plateau)}",
        f"plateau_window = [{_fmt(lo)}, {_fmt(hi)}]",
    ]
    return "\n".join(lines) + "\n"


def emit_plot_script(products, out_dir) -> Path:
    """Write a self-contained gnuplot script with one panel per plottable
    product, titled after the corresponding figure captions.  The CSVs
    must already exist in out_dir."""
    out = Path(out_dir)
    wanted = [p for p in _PLOTTABLE if p in products]
    if not wanted:
        raise MissingProduct("no plottable product requested")
    for p in wanted:
        if not (out / f"{p}.csv").exists():
            raise MissingProduct(f"{p}.csv not found in {out}")

    panels = {
        "spectrum": (
            "Eigenvalue weights",
            "α_ν",
            "w_ν",
            "plot 'spectrum.csv' using 2:3 skip 1 with impulses notitle",
        ),
        "population": (
            "Population of the Brownian oscillator vs. t",
            "t",
            "⟨N_Ω⟩",
            "plot 'population.csv' using 1:2 skip 1 with lines notitle",
        ),
        "survival": (
            "Survival probability vs. t",
            "t",
            "P_ΩΩ(t)",
            "plot 'survival.csv' using 1:2 skip 1 with lines notitle",
        ),
        "position": (
            "Mean position of the Brownian oscillator vs. t",
            "t",
            "X(t)",
            "plot 'position.csv' using 1:2 skip 1 with lines notitle",
        ),
        "coefficients": (
            "Damping factor of the Langevin equation vs. t",
            "t",
            "Γ(t)",
            "plot 'coefficients.csv' using 1:3 skip 1 with lines notitle",
        ),
    }
    lines = [
        "# generated by qbm; run with: gnuplot plot.gp",
        "set datafile separator ','",
        "set encoding utf8",
        f"set terminal pngcairo size 960,{320 * len(wanted)}",
        "set output 'qbm_plots.png'",
        f"set multiplot layout {len(wanted)},1",
    ]
    for p in wanted:
        title, xlab, ylab, plot_cmd = panels[p]
        lines += [
            f"set title '{title}'",
            f"set xlabel '{xlab}'",
            f"set ylabel '{ylab}'",
            plot_cmd,
        ]
    lines += ["unset multiplot"]
    return _write_text(out / "plot.gp", "\n".join(lines) + "\n")


def run(config: RunConfig, out_dir=None) -> list[Path]:
    """Execute a run: diagonalize, evaluate the requested products over the
    grid, and write them to out_dir.  Returns the written paths."""
    _worker_count()  # validate QBM_THREADS up front
    out = Path(out_dir) if out_dir is not None else Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    bath = build_bath(config.model)
    spec = solve_spectrum(bath, config.model.omega0)
    grid = _resolve_grid(config, spec)
    ts = grid.times()

    written: list[Path] = []
    for product in PRODUCTS:  # fixed evaluation order for determinism
        if product not in config.outputs:
            continue
        if product == "spectrum":
            written.append(_write_text(out / "spectrum.csv", _spectrum_csv(spec)))
        elif product == "population":
            occ = thermal_occupations(bath, config.model.beta, config.n_omega0)
            values = _over_grid(lambda a: oscillator_population(spec, occ, a), ts)
            written.append(
                _write_text(
                    out / "population.csv", _two_column_csv("t,n_omega", ts, values)
                )
            )
        elif product == "survival":
            values = _over_grid(lambda a: survival_probability(spec, a), ts)
            written.append(
                _write_text(
                    out / "survival.csv", _two_column_csv("t,p_surv", ts, values)
                )
            )
        elif product == "position":
            inp = config.langevin_input
            values = _over_grid(lambda a: mean_position(spec, inp, a), ts)
            written.append(
                _write_text(out / "position.csv", _two_column_csv("t,x", ts, values))
            )
        elif product == "coefficients":

            def coeff_stack(a: np.ndarray) -> np.ndarray:
                omega2, gamma, ok = coefficient_series(spec, a)
                return np.vstack([omega2, gamma, ok.astype(float)])

            stacked = _over_grid(coeff_stack, ts)
            written.append(
                _write_text(
                    out / "coefficients.csv",
                    _coefficients_csv(
                        ts, stacked[0], stacked[1], stacked[2].astype(bool)
                    ),
                )
            )
        else:  # report
            written.append(
                _write_text(out / "report.txt", _report_text(config, spec, grid))
            )

    if any(p in config.outputs for p in _PLOTTABLE):
        written.append(emit_plot_script(config.outputs, out))
    return written


def build_report(config: RunConfig) -> str:
    """Report text for a config without writing any files."""
    bath = build_bath(config.model)
    spec = solve_spectrum(bath, config.model.omega0)
    grid = _resolve_grid(config, spec)
    return _report_text(config, spec, grid)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="qbm",
        description="Exactly soluble quantum Brownian motion of a harmonic "
        "oscillator in a discretized bath.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="compute products and write CSVs")
    p_run.add_argument("--config", type=Path, default=None, help="config file")
    p_run.add_argument("--out", type=Path, default=None, help="output directory")
    p_report = sub.add_parser("report", help="print the summary report")
    p_report.add_argument("--config", type=Path, default=None, help="config file")
    args = parser.parse_args(argv)

    try:
        if args.config is not None:
            try:
                text = Path(args.config).read_text(encoding="utf-8")
            except OSError as exc:
                print(f"ConfigError: cannot read {args.config}: {exc}", file=sys.stderr)
                return 2
        else:
            text = ""
        config = parse_config(text)
        if args.command == "run":
            for path in run(config, out_dir=args.out):
                print(path)
        else:
            sys.stdout.write(build_report(config))
        return 0
    except ConfigError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except QbmError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
