"""Command-line interface.

Exit codes: 0 success, 1 validation error, 2 simulation error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import asdict
from pathlib import Path

from dbsim.blanking import MODES, ConvergencePolicy, analytic_nb_avg, estimate_nb_avg
from dbsim.core import ConfigError, DetectorConfig, SimulationError, derive_counts
from dbsim.output import emit_csv, emit_svg, format_table1, table1_csv_text
from dbsim.registration import point_stream_index, simulate_point
from dbsim.sensitivity import MANUFACTURER_N_G, PUBLISHED_NB_AVG
from dbsim.streams import SeedSpec, dump_timeline, generate_timeline
from dbsim.sweep import (
    DEFAULT_SEED,
    DEFAULT_TRIALS,
    SEED_ENV,
    _parse_ds,
    _seed,
    derive_ds,
    parse_config,
    reproduce_table1,
    run_sweep,
)

log = logging.getLogger("dbsim")

EXIT_OK, EXIT_VALIDATION, EXIT_SIMULATION, EXIT_IO = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse would exit with 2
        self.print_usage(sys.stderr)
        self.exit(EXIT_VALIDATION, f"{self.prog}: error: {message}\n")


def _resolve_seed(flag: int | None) -> int:
    if flag is not None:
        return flag
    if os.environ.get(SEED_ENV):
        return _seed(SEED_ENV, os.environ[SEED_ENV])
    return DEFAULT_SEED


def _seed_arg(text: str) -> int:
    try:
        return _seed("--seed", text)
    except ConfigError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _ds_arg(text: str) -> float | str:
    try:
        return _parse_ds("--ds", text)
    except ConfigError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _add_operating_point(p: argparse.ArgumentParser, n_t: float | None, n_tr: float | None) -> None:
    p.add_argument("--n-t", type=float, default=n_t, required=n_t is None, help="light-pulse rate (Hz)")
    p.add_argument("--n-tr", type=float, default=n_tr, required=n_tr is None, help="gating rate (Hz)")
    p.add_argument("--mu", type=float, default=0.1, help="mean photons per pulse (default 0.1)")
    p.add_argument("--b-l", type=int, default=6, help="gates blanked per registration (default 6)")
    p.add_argument("--window", type=float, default=1.0, help="observation window in s (default 1)")


def _add_common(p: argparse.ArgumentParser, trials_help: str, trials_default: int | None) -> None:
    p.add_argument("--seed", type=_seed_arg, default=None, help=f"master seed (default ${SEED_ENV} or {DEFAULT_SEED})")
    p.add_argument("--trials", type=int, default=trials_default, help=trials_help)
    p.add_argument("--out", type=Path, default=None, help="output file")


def _add_blanking(p: argparse.ArgumentParser) -> None:
    p.add_argument("--mode", choices=MODES, default="pulses", help="count occupied bins or photons")
    p.add_argument("--batch-size", type=int, default=10_000)
    p.add_argument("--target-se", type=float, default=1e-3, help="stop once std error falls below this")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="dbsim", description="Blanking-aware detection sensitivity and efficiency simulator.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("nb-avg", help="estimate the mean number of pulses blanked per registration")
    _add_operating_point(p, 250e3, 500e3)
    _add_common(p, "maximum number of batches (default 100)", 100)
    _add_blanking(p)

    p = sub.add_parser("derive-ds", help="derive detection sensitivity from a measured count rate")
    _add_operating_point(p, 250e3, 500e3)
    _add_common(p, "maximum number of batches (default 100)", 100)
    _add_blanking(p)
    p.add_argument("--n-g", type=float, default=MANUFACTURER_N_G, help=f"registered pulses/s (default {MANUFACTURER_N_G:g})")
    p.add_argument("--nb-override", type=float, default=None, help="use this nb_avg instead of simulating")

    p = sub.add_parser("point", help="simulate one operating point")
    _add_operating_point(p, None, None)
    _add_common(p, f"Monte Carlo trials (default {DEFAULT_TRIALS})", DEFAULT_TRIALS)
    p.add_argument("--ds", type=_ds_arg, default="paper", help="number, 'paper' (0.216) or 'simulated'")
    p.add_argument("--n-g", type=float, default=MANUFACTURER_N_G)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--svg", type=Path, default=None)
    p.add_argument("--dump-timeline", type=Path, default=None, help="write trial 0's occupied bins as index,count")

    p = sub.add_parser("sweep", help="simulate a grid or list of operating points")
    p.add_argument("--config", type=Path, default=None, help="JSON configuration file")
    p.add_argument("--n-t", type=float, nargs="+", default=None, help="pulse rates (Hz)")
    p.add_argument("--n-tr", type=float, nargs="+", default=None, help="gating rates (Hz)")
    p.add_argument("--mu", type=float, default=None)
    p.add_argument("--b-l", type=int, default=None)
    p.add_argument("--window", type=float, default=None)
    p.add_argument("--ds", type=_ds_arg, default=None, help="number, 'paper' (0.216) or 'simulated'")
    p.add_argument("--n-g", type=float, default=None)
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--svg", type=Path, default=None, help="SVG path (default: CSV path with .svg suffix)")
    _add_common(p, f"Monte Carlo trials per point (default {DEFAULT_TRIALS})", None)

    p = sub.add_parser("table1", help="reproduce the published N_p / DE table")
    _add_common(p, f"Monte Carlo trials per row (default {DEFAULT_TRIALS})", DEFAULT_TRIALS)
    p.add_argument("--ds", type=_ds_arg, default="paper")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--svg", type=Path, default=None)
    return parser


def _config(args) -> DetectorConfig:
    return DetectorConfig(n_t=args.n_t, n_tr=args.n_tr, mu=args.mu, b_l=args.b_l, window_s=args.window)


def _policy(args) -> ConvergencePolicy:
    if args.trials is None or args.trials < 1:
        raise ConfigError("--trials must be a positive integer")
    return ConvergencePolicy(args.batch_size, args.target_se, args.trials * args.batch_size)


def _write_json(path: Path, payload: dict) -> None:
    with open(path, "w", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def cmd_nb_avg(args) -> None:
    config = _config(args)
    derived = derive_counts(config)
    est = estimate_nb_avg(config, SeedSpec(_resolve_seed(args.seed)), _policy(args), args.mode)
    analytic = analytic_nb_avg(derived.n_dist, derived.n_slot, derived.pulse_blank_span, args.mode)
    print(f"bins={derived.n_slot} photons={derived.n_dist} span={derived.pulse_blank_span} mode={est.mode}")
    print(f"nb_avg     = {est.nb_avg:.5f} +/- {est.std_error:.5f} ({est.samples} samples)")
    print(f"analytic   = {analytic:.5f}  (deviation {(est.nb_avg - analytic) / est.std_error:+.2f} sigma)")
    print(f"published  = {PUBLISHED_NB_AVG}")
    if args.out:
        _write_json(args.out, {**asdict(est), "analytic": analytic, "published": PUBLISHED_NB_AVG})


def cmd_derive_ds(args) -> None:
    config = _config(args)
    policy = None if args.nb_override is not None else _policy(args)
    report = derive_ds(args.n_g, config, args.nb_override, SeedSpec(_resolve_seed(args.seed)), policy, args.mode)
    print("\n".join(report.lines()))
    if args.out:
        payload = {"n_g": report.n_g, "n_0": report.n_0, "nb_avg": report.nb_avg, **asdict(report.result)}
        if report.estimate is not None:
            payload["nb_std_error"] = report.estimate.std_error
            payload["samples"] = report.estimate.samples
        if report.published is not None:
            payload["ds_with_published_nb_avg"] = report.published.ds
        _write_json(args.out, payload)


def _ds_value(ds: float | str, n_g: float, seed: int) -> float:
    if ds == "simulated":
        return derive_ds(n_g, seed=SeedSpec(seed)).result.ds
    return float(ds)


def cmd_point(args) -> None:
    config = _config(args)
    seed = _resolve_seed(args.seed)
    if args.trials < 1:
        raise ConfigError("--trials must be a positive integer")
    ds = _ds_value(args.ds, args.n_g, seed)
    stream = SeedSpec(seed, point_stream_index(config))
    point = simulate_point(config, ds, args.trials, stream, threads=args.threads)
    print(f"n_p = {point.n_p_mean:.1f} +/- {point.n_p_std_error:.1f}  DE = {point.de:.4f}  (DS = {ds:.4f})")
    if args.dump_timeline:
        d = derive_counts(config)
        dump_timeline(generate_timeline(d.n_bin, d.n_dist, stream.child(0)), args.dump_timeline)
    if args.out:
        emit_csv([point], args.out)
    if args.svg:
        emit_svg([point], args.svg)


def cmd_sweep(args) -> None:
    overrides = {
        "n_t_values": args.n_t, "n_tr_values": args.n_tr, "mu": args.mu, "b_l": args.b_l,
        "window_s": args.window, "ds": args.ds, "n_g": args.n_g, "trials": args.trials,
        "seed": args.seed, "threads": args.threads,
        "out": str(args.out) if args.out else None, "svg": str(args.svg) if args.svg else None,
    }
    if (args.n_t is None) != (args.n_tr is None):
        raise ConfigError("--n-t and --n-tr must be given together")
    spec = parse_config(args.config, overrides)
    points = run_sweep(spec)
    for p in points:
        print(f"n_t={p.config.n_t:>12.0f} n_tr={p.config.n_tr:>10.0f}  n_p={p.n_p_mean:>10.1f}  DE={p.de:.4f}")
    if spec.out:
        emit_csv(points, spec.out)
        emit_svg(points, spec.svg or spec.out.with_suffix(".svg"))
    elif spec.svg:
        emit_svg(points, spec.svg)


def cmd_table1(args) -> None:
    if args.trials < 1:
        raise ConfigError("--trials must be a positive integer")
    rows = reproduce_table1(args.trials, _resolve_seed(args.seed), args.threads, args.ds)
    print(format_table1(rows))
    if args.out:
        with open(args.out, "w", newline="\n") as fh:
            fh.write(table1_csv_text(rows))
    if args.svg:
        emit_svg([r.point for r in rows], args.svg)


COMMANDS = {
    "nb-avg": cmd_nb_avg,
    "derive-ds": cmd_derive_ds,
    "point": cmd_point,
    "sweep": cmd_sweep,
    "table1": cmd_table1,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except SimulationError as exc:
        print(f"simulation error: {exc}", file=sys.stderr)
        return EXIT_SIMULATION
    except Exception as exc:
        log.debug("unexpected failure", exc_info=True)
        print(f"simulation error: {exc}", file=sys.stderr)
        return EXIT_SIMULATION
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
