"""Sweep configuration, execution and the reference-table reproduction.

Configuration files are flat JSON objects.  Keys (all optional)::

    n_t_values   list of pulse rates in Hz     } crossed with each other,
    n_tr_values  list of gate rates in Hz      } unless "pairs" is given
    pairs        list of [n_t, n_tr] pairs     (default: the seven Table 1 pairs)
    mu           mean photons per pulse        (0.1)
    b_l          blanked gates per registration (6)
    window_s     observation window in s       (1.0)
    ds           number, "paper" or "simulated" ("paper" = 0.216)
    n_g          registered pulses/s used by ds="simulated" (5033)
    trials       trials per point              (20)
    seed         master seed, 64-bit unsigned  ($DBSIM_SEED, else 20100101)
    threads      worker threads                (1)
    out          CSV output path
    svg          SVG output path

Precedence, lowest first: built-in defaults, ``$DBSIM_SEED``, file, flags.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Any, Mapping

import numpy as np

from dbsim.blanking import BlankingEstimate, ConvergencePolicy, estimate_nb_avg
from dbsim.core import ConfigError, DetectorConfig, SimulationError, derive_counts
from dbsim.registration import EfficiencyPoint, point_stream_index, summarize_point, trial_np
from dbsim.sensitivity import (
    MANUFACTURER_N_G,
    PUBLISHED_DS,
    PUBLISHED_NB_AVG,
    SensitivityInputs,
    SensitivityResult,
    compute_ds,
)
from dbsim.streams import MASK64, SeedSpec

SEED_ENV = "DBSIM_SEED"
DEFAULT_SEED = 20100101
DEFAULT_TRIALS = 20

#: Operating point of the manufacturer's N_G measurement.
REFERENCE_CONFIG = DetectorConfig(n_t=250e3, n_tr=500e3, mu=0.1, b_l=6)

_KEYS = (
    "n_t_values", "n_tr_values", "pairs", "mu", "b_l", "window_s",
    "ds", "n_g", "trials", "seed", "threads", "out", "svg",
)


@dataclass(frozen=True)
class Table1Row:
    n_t: int
    n_tr: int
    n_0: int
    n_bin: int
    n_dist: int
    n_p: int
    de: float


def load_table1() -> list[Table1Row]:
    text = resources.files("dbsim").joinpath("data/table1_published.csv").read_text()
    rows = csv.DictReader(line for line in io.StringIO(text) if not line.startswith("#"))
    return [
        Table1Row(*(int(r[k]) for k in ("n_t", "n_tr", "n_0", "n_bin", "n_dist", "n_p")), float(r["de"]))
        for r in rows
    ]


TABLE1_PAIRS = tuple((float(r.n_t), float(r.n_tr)) for r in load_table1())


@dataclass(frozen=True)
class SweepSpec:
    pairs: tuple[tuple[float, float], ...] = TABLE1_PAIRS
    mu: float = 0.1
    b_l: int = 6
    window_s: float = 1.0
    ds: float | str = PUBLISHED_DS
    n_g: float = MANUFACTURER_N_G
    trials: int = DEFAULT_TRIALS
    master_seed: int = DEFAULT_SEED
    threads: int = 1
    out: Path | None = None
    svg: Path | None = None

    def configs(self) -> list[DetectorConfig]:
        """Operating points, sorted by gate rate then pulse rate."""
        out = []
        for n_t, n_tr in sorted(set(self.pairs), key=lambda p: (p[1], p[0])):
            try:
                cfg = DetectorConfig(n_t=n_t, n_tr=n_tr, mu=self.mu, b_l=self.b_l, window_s=self.window_s)
                derive_counts(cfg)
            except ConfigError as exc:
                raise ConfigError(f"pair (n_t={n_t:g}, n_tr={n_tr:g}): {exc}") from exc
            out.append(cfg)
        return out


def _number(path: str, value: Any, *, positive: bool = True, integer: bool = False) -> float | int:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{path}: expected a number, got {value!r}")
    if not math.isfinite(value):
        raise ConfigError(f"{path}: must be finite, got {value!r}")
    if integer:
        if float(value) != int(value):
            raise ConfigError(f"{path}: expected an integer, got {value!r}")
        value = int(value)
    if positive and value <= 0:
        raise ConfigError(f"{path}: must be positive, got {value!r}")
    return value


def _rate_list(path: str, value: Any) -> list[float]:
    if not isinstance(value, list) or not value:
        raise ConfigError(f"{path}: expected a non-empty list of rates")
    return [float(_number(f"{path}[{i}]", v)) for i, v in enumerate(value)]


def _parse_ds(path: str, value: Any) -> float | str:
    if isinstance(value, str):
        if value in ("paper", "simulated"):
            return PUBLISHED_DS if value == "paper" else value
        try:
            value = float(value)
        except ValueError:
            raise ConfigError(f"{path}: expected a number, 'paper' or 'simulated', got {value!r}") from None
    value = _number(path, value, positive=False)
    if not 0 <= value <= 1:
        raise ConfigError(f"{path}: must lie in [0, 1], got {value!r}")
    return float(value)


def _seed(path: str, value: Any) -> int:
    if isinstance(value, str):
        try:
            value = int(value, 0)
        except ValueError:
            raise ConfigError(f"{path}: expected an integer, got {value!r}") from None
    value = _number(path, value, positive=False, integer=True)
    if not 0 <= value <= MASK64:
        raise ConfigError(f"{path}: must be a 64-bit unsigned integer, got {value!r}")
    return value


def _apply(spec: SweepSpec, values: Mapping[str, Any], origin: str) -> SweepSpec:
    unknown = sorted(set(values) - set(_KEYS))
    if unknown:
        raise ConfigError(f"{origin}: unknown key(s): {', '.join(unknown)}")
    changes: dict[str, Any] = {}
    for key, value in values.items():
        path = f"{origin}.{key}"
        if key == "pairs":
            if not isinstance(value, list) or not value:
                raise ConfigError(f"{path}: expected a non-empty list of [n_t, n_tr] pairs")
            pairs = []
            for i, pair in enumerate(value):
                if not isinstance(pair, (list, tuple)) or len(pair) != 2:
                    raise ConfigError(f"{path}[{i}]: expected [n_t, n_tr]")
                pairs.append((float(_number(f"{path}[{i}][0]", pair[0])), float(_number(f"{path}[{i}][1]", pair[1]))))
            changes["pairs"] = tuple(pairs)
        elif key in ("n_t_values", "n_tr_values"):
            changes[key] = _rate_list(path, value)
        elif key in ("mu", "window_s", "n_g"):
            changes[key] = float(_number(path, value, positive=key != "n_g"))
            if key == "n_g" and changes[key] < 0:
                raise ConfigError(f"{path}: must be non-negative, got {value!r}")
        elif key == "b_l":
            changes[key] = _number(path, value, positive=False, integer=True)
            if changes[key] < 0:
                raise ConfigError(f"{path}: must be non-negative, got {value!r}")
        elif key in ("trials", "threads"):
            changes[key] = _number(path, value, integer=True)
        elif key == "ds":
            changes[key] = _parse_ds(path, value)
        elif key == "seed":
            changes["master_seed"] = _seed(path, value)
        elif key in ("out", "svg"):
            if not isinstance(value, (str, Path)) or not str(value):
                raise ConfigError(f"{path}: expected a path string")
            changes[key] = Path(value)

    n_t_values = changes.pop("n_t_values", None)
    n_tr_values = changes.pop("n_tr_values", None)
    if (n_t_values is None) != (n_tr_values is None):
        raise ConfigError(f"{origin}: n_t_values and n_tr_values must be given together")
    if n_t_values is not None:
        if "pairs" in changes:
            raise ConfigError(f"{origin}: give either pairs or n_t_values/n_tr_values, not both")
        changes["pairs"] = tuple((t, r) for r in n_tr_values for t in n_t_values)
    return replace(spec, **changes)


def parse_config(
    path: Path | str | None = None,
    overrides: Mapping[str, Any] | None = None,
    environ: Mapping[str, str] | None = None,
) -> SweepSpec:
    """Build a validated :class:`SweepSpec`.

    ``overrides`` holds command-line values under the file's key names;
    ``None`` values are ignored.
    """
    environ = os.environ if environ is None else environ
    spec = SweepSpec()
    if environ.get(SEED_ENV):
        spec = replace(spec, master_seed=_seed(SEED_ENV, environ[SEED_ENV]))
    if path is not None:
        try:
            data = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: top level must be an object")
        spec = _apply(spec, data, str(path))
    if overrides:
        spec = _apply(spec, {k: v for k, v in overrides.items() if v is not None}, "flag")
    spec.configs()  # validate every pair up front
    return spec


@dataclass(frozen=True)
class DsReport:
    n_g: float
    n_0: int
    nb_avg: float
    result: SensitivityResult
    estimate: BlankingEstimate | None = None
    published: SensitivityResult | None = field(default=None)

    def lines(self) -> list[str]:
        out = [f"n_g     = {self.n_g:g} per window", f"n_0     = {self.n_0}"]
        if self.estimate is not None:
            e = self.estimate
            out.append(f"nb_avg  = {e.nb_avg:.4f} +/- {e.std_error:.4f} ({e.samples} samples, {e.mode} mode)")
        else:
            out.append(f"nb_avg  = {self.nb_avg:g} (given)")
        out += [
            f"n_b     = {self.result.n_b:.1f}",
            f"n_a     = {self.result.n_a:.1f}",
            f"DS      = {self.result.ds:.4f} ({self.result.ds:.3f})",
        ]
        if self.published is not None:
            out.append(
                f"with published nb_avg = {PUBLISHED_NB_AVG}: DS = {self.published.ds:.4f}"
                f" (published {PUBLISHED_DS})"
            )
        return out


def derive_ds(
    n_g: float = MANUFACTURER_N_G,
    config: DetectorConfig = REFERENCE_CONFIG,
    nb_override: float | None = None,
    seed: SeedSpec | None = None,
    policy: ConvergencePolicy | None = None,
    mode: str = "pulses",
) -> DsReport:
    """DS from a measured registration count and an estimated (or given) nb_avg."""
    n_0 = derive_counts(config).n_0
    estimate = None
    if nb_override is None:
        estimate = estimate_nb_avg(config, seed or SeedSpec(DEFAULT_SEED), policy, mode)
        nb_avg = estimate.nb_avg
    else:
        nb_avg = nb_override
    result = compute_ds(SensitivityInputs(n_g, n_0, nb_avg))
    published = None
    if estimate is not None and n_g * PUBLISHED_NB_AVG < n_0:
        published = compute_ds(SensitivityInputs(n_g, n_0, PUBLISHED_NB_AVG))
    return DsReport(n_g, n_0, nb_avg, result, estimate, published)


def resolve_ds(spec: SweepSpec) -> float:
    if spec.ds != "simulated":
        return float(spec.ds)
    return derive_ds(spec.n_g, seed=SeedSpec(spec.master_seed)).result.ds


def run_sweep(spec: SweepSpec) -> list[EfficiencyPoint]:
    """One :class:`EfficiencyPoint` per operating point, sorted by (n_tr, n_t).

    Work is split into (point, trial) units.  Each unit has a fixed stream and
    writes into a fixed slot, so the output does not depend on ``threads``.
    """
    configs = spec.configs()
    ds = resolve_ds(spec)
    seeds = [SeedSpec(spec.master_seed, point_stream_index(c)) for c in configs]
    derived = [derive_counts(c) for c in configs]
    units = [(i, t) for i in range(len(configs)) for t in range(spec.trials)]
    results = np.zeros((len(configs), spec.trials), dtype=np.int64)

    def run(unit: tuple[int, int]) -> None:
        i, t = unit
        d = derived[i]
        try:
            results[i, t] = trial_np(d.n_bin, d.n_dist, configs[i].b_l, seeds[i].child(t))
        except Exception as exc:
            c = configs[i]
            raise SimulationError(f"point (n_t={c.n_t:g}, n_tr={c.n_tr:g}) trial {t}: {exc}") from exc

    if spec.threads > 1:
        with ThreadPoolExecutor(max_workers=spec.threads) as pool:
            for _ in pool.map(run, units):
                pass
    else:
        for unit in units:
            run(unit)
    return [summarize_point(c, results[i], ds, spec.master_seed) for i, c in enumerate(configs)]


@dataclass(frozen=True)
class Table1Comparison:
    point: EfficiencyPoint
    published: Table1Row

    @property
    def n_p_rel_dev(self) -> float:
        return (self.point.n_p_mean - self.published.n_p) / self.published.n_p

    @property
    def de_abs_dev(self) -> float:
        return self.point.de - self.published.de


def reproduce_table1(
    trials: int = DEFAULT_TRIALS,
    master_seed: int = DEFAULT_SEED,
    threads: int = 1,
    ds: float | str = PUBLISHED_DS,
) -> list[Table1Comparison]:
    """Run the seven published configurations and pair each with its published row."""
    spec = SweepSpec(pairs=TABLE1_PAIRS, trials=trials, master_seed=master_seed, threads=threads, ds=ds)
    points = run_sweep(spec)
    published = {(float(r.n_t), float(r.n_tr)): r for r in load_table1()}
    return [Table1Comparison(p, published[(float(p.config.n_t), float(p.config.n_tr))]) for p in points]
