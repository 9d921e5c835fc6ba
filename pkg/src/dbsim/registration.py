"""Maximum number of registrable pulses under digital blanking.

Photons are spread over gate bins; a registration in bin ``i`` blanks bins
``i+1 .. i+span``.  ``n_p`` is the largest set of occupied bins in which
chosen bins are more than ``span`` apart.  The earliest-first greedy scan
finds it in one pass; :func:`brute_force_np` and :func:`renewal_np_rate`
are independent checks.
"""

from __future__ import annotations

import hashlib
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations

import numba
import numpy as np

from dbsim.core import ConfigError, DetectorConfig, SimulationError, derive_counts
from dbsim.sensitivity import compute_de
from dbsim.streams import OccupancyTimeline, SeedSpec, _timeline_from, occupied_indices

BRUTE_FORCE_MAX_BINS = 24


@dataclass(frozen=True, eq=False)
class RegistrationResult:
    n_p: int
    registered: np.ndarray | None = None


@dataclass(frozen=True)
class EfficiencyPoint:
    """One row of a DE sweep: mean ``n_p`` over trials and the resulting DE."""

    config: DetectorConfig
    n_p_mean: float
    n_p_std_error: float
    de: float
    trials: int
    ds: float
    seed: int = field(default=0)

    def __post_init__(self) -> None:
        if not 0 <= self.de <= 1:
            raise SimulationError(f"DE out of range: {self.de}")
        if self.de > self.ds * (1 + 1e-12):
            raise SimulationError(f"DE {self.de} exceeds DS {self.ds}")


@numba.njit(nogil=True, cache=True)
def _greedy_scan(occupied, span):  # pragma: no cover - compiled
    chosen = np.empty(occupied.size, dtype=np.int64)
    n = 0
    next_free = np.int64(-1)
    for i in occupied:
        if i >= next_free:
            chosen[n] = i
            n += 1
            next_free = i + span + 1
    return chosen[:n]


def greedy_np(timeline: OccupancyTimeline, blank_span: int) -> RegistrationResult:
    """Left-to-right scan taking every occupied bin that is not blanked."""
    if blank_span < 0:
        raise ConfigError(f"blank_span must be non-negative, got {blank_span}")
    occupied = occupied_indices(timeline).astype(np.int64)
    chosen = _greedy_scan(occupied, np.int64(blank_span))
    return RegistrationResult(int(chosen.size), chosen)


def brute_force_np(timeline: OccupancyTimeline, blank_span: int) -> int:
    """Exhaustive maximum over subsets of occupied bins (small instances only)."""
    if timeline.n_bin > BRUTE_FORCE_MAX_BINS:
        raise ConfigError(f"instance too large for brute force: {timeline.n_bin} > {BRUTE_FORCE_MAX_BINS} bins")
    occupied = [i for i, c in enumerate(timeline.counts.tolist()) if c > 0]
    for k in range(len(occupied), 0, -1):
        for subset in combinations(occupied, k):
            if all(b - a > blank_span for a, b in zip(subset, subset[1:])):
                return k
    return 0


def renewal_np_rate(p: float, blank_span: int) -> float:
    """Registrations per bin for i.i.d. occupancy probability ``p``.

    A cycle is ``blank_span`` blanked bins plus a geometric wait of mean
    ``1/p`` for the next occupied bin.
    """
    if not 0 < p <= 1:
        raise ConfigError(f"p must lie in (0, 1], got {p}")
    return p / (1 + p * blank_span)


def occupancy_probability(n_dist: int, n_bin: int) -> float:
    """Probability that a bin receives at least one of ``n_dist`` photons."""
    if n_bin == 1:
        return 1.0 if n_dist else 0.0
    return -math.expm1(n_dist * math.log1p(-1.0 / n_bin))


def point_stream_index(config: DetectorConfig) -> int:
    """Stable stream index derived from the operating point itself.

    Tying the stream to the configuration (not to its position in a sweep)
    makes a point reproduce identically whether run alone or inside any sweep.
    """
    text = f"{float(config.n_t)!r}|{float(config.n_tr)!r}|{float(config.mu)!r}|{config.b_l}|{float(config.window_s)!r}"
    digest = hashlib.blake2b(text.encode(), digest_size=8).digest()
    return int.from_bytes(digest, "little") >> 1


def trial_np(n_bin: int, n_dist: int, span: int, seed: SeedSpec) -> int:
    """``n_p`` for one random timeline drawn from ``seed``."""
    timeline = _timeline_from(seed.bit_generator(), n_bin, n_dist)
    occupied = np.flatnonzero(timeline.counts).astype(np.int64)
    return int(_greedy_scan(occupied, np.int64(span)).size)


def summarize_point(
    config: DetectorConfig, n_p_values: np.ndarray, ds: float, master_seed: int = 0
) -> EfficiencyPoint:
    """Reduce per-trial ``n_p`` values (in trial order) to an :class:`EfficiencyPoint`."""
    derived = derive_counts(config)
    trials = len(n_p_values)
    values = np.asarray(n_p_values, dtype=np.float64)
    mean = float(values.mean())
    std_error = float(values.std(ddof=1) / math.sqrt(trials)) if trials > 1 else math.nan
    de = compute_de(mean, ds, derived.n_0) if derived.n_0 > 0 else 0.0
    return EfficiencyPoint(config, mean, std_error, de, trials, ds, master_seed)


def simulate_point(
    config: DetectorConfig,
    ds: float,
    trials: int,
    seed: SeedSpec,
    threads: int = 1,
) -> EfficiencyPoint:
    """Mean ``n_p`` and DE at one operating point.

    Trial ``t`` uses stream ``seed.child(t)``; the blank span is ``b_l`` gate
    bins.  Results do not depend on ``threads``.
    """
    if trials < 1:
        raise ConfigError(f"trials must be at least 1, got {trials}")
    derived = derive_counts(config)

    def run(t: int) -> int:
        return trial_np(derived.n_bin, derived.n_dist, config.b_l, seed.child(t))

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            values = list(pool.map(run, range(trials)))
    else:
        values = [run(t) for t in range(trials)]
    return summarize_point(config, np.array(values), ds, seed.master_seed)
