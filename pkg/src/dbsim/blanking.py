"""Monte Carlo estimate of the mean number of pulses lost to blanking.

After a registration in pulse slot ``c`` the next ``span`` slots are blanked.
The estimator picks registered slots uniformly among occupied slots of a
random timeline and counts what falls into ``c+1 .. c+span``.  Windows that
run past the last slot are truncated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from dbsim.core import ConfigError, DetectorConfig, SimulationError, derive_counts
from dbsim.streams import OccupancyTimeline, SeedSpec, _timeline_from, bounded_integers

MODES = ("pulses", "photons")


@dataclass(frozen=True)
class BlankingEstimate:
    nb_avg: float
    std_error: float
    samples: int
    mode: str


@dataclass(frozen=True)
class ConvergencePolicy:
    """Batches of ``batch_size`` samples until ``std_error <= target_std_error``
    or ``max_samples`` have been drawn."""

    batch_size: int = 10_000
    target_std_error: float = 1e-3
    max_samples: int = 1_000_000

    def __post_init__(self) -> None:
        if self.batch_size < 1 or self.max_samples < 1 or not self.target_std_error > 0:
            raise ConfigError("convergence policy values must all be positive")


def _check_mode(mode: str) -> None:
    if mode not in MODES:
        raise ConfigError(f"mode must be one of {MODES}, got {mode!r}")


def sample_blanked_count(timeline: OccupancyTimeline, chosen: int, span: int, mode: str = "pulses") -> int:
    """What lands in the ``span`` bins after the registered bin ``chosen``.

    ``"pulses"`` counts occupied bins, ``"photons"`` sums photon counts.
    """
    _check_mode(mode)
    if span < 0:
        raise ConfigError(f"span must be non-negative, got {span}")
    counts = timeline.counts
    if not 0 <= chosen < counts.size or counts[chosen] < 1:
        raise ConfigError(f"bin {chosen} is not occupied")
    window = counts[chosen + 1 : chosen + 1 + span]
    if mode == "pulses":
        return int(np.count_nonzero(window))
    return int(window.sum())


def _batch_counts(counts: np.ndarray, chosen: np.ndarray, span: int, mode: str) -> np.ndarray:
    # vectorised sample_blanked_count via prefix sums
    per_bin = (counts > 0) if mode == "pulses" else counts
    csum = np.concatenate(([0], np.cumsum(per_bin, dtype=np.int64)))
    end = np.minimum(chosen + span + 1, counts.size)
    return csum[end] - csum[chosen + 1]


def analytic_nb_avg(n_dist: int, n_bin: int, span: int, mode: str = "pulses") -> float:
    """Closed-form expectation, ignoring edge truncation.

    Each of the other ``n_dist - 1`` photons lands in a given bin with
    probability ``1/n_bin``: photons mode gives ``span*(n_dist-1)/n_bin``,
    pulses mode ``span*(1-(1-1/n_bin)**(n_dist-1))``.
    """
    _check_mode(mode)
    if n_dist < 1 or n_bin < 1:
        raise ConfigError("n_dist and n_bin must be at least 1")
    others = n_dist - 1
    if mode == "photons":
        return span * others / n_bin
    # -expm1(k*log1p(-1/n)) keeps precision when 1/n is tiny
    if n_bin == 1:
        return float(span) if others else 0.0
    return -span * math.expm1(others * math.log1p(-1.0 / n_bin))


def estimate_nb_avg(
    config: DetectorConfig,
    seed: SeedSpec,
    policy: ConvergencePolicy | None = None,
    mode: str = "pulses",
) -> BlankingEstimate:
    """Estimate the mean blanked count per registration.

    Batch ``b`` draws a fresh timeline of ``n_dist`` photons over ``n_slot``
    bins from stream ``seed.child(b)``, then ``batch_size`` registered bins
    uniformly (with replacement) among its occupied bins.  Tallies are integer
    sums, so the result does not depend on how batches are scheduled.
    """
    _check_mode(mode)
    policy = policy or ConvergencePolicy()
    derived = derive_counts(config)
    span = derived.pulse_blank_span
    if derived.n_dist < 1:
        raise SimulationError("empty timeline: no photons placed for this configuration")

    total = 0
    total_sq = 0
    samples = 0
    std_error = math.inf
    batch = 0
    while samples < policy.max_samples:
        size = min(policy.batch_size, policy.max_samples - samples)
        bitgen = seed.child(batch).bit_generator()
        timeline = _timeline_from(bitgen, derived.n_slot, derived.n_dist)
        occupied = np.flatnonzero(timeline.counts)
        chosen = occupied[bounded_integers(bitgen, occupied.size, size)]
        values = _batch_counts(timeline.counts, chosen, span, mode)
        total += int(values.sum())
        total_sq += int((values * values).sum())
        samples += size
        batch += 1
        std_error = _std_error(total, total_sq, samples)
        if std_error <= policy.target_std_error:
            break

    return BlankingEstimate(total / samples, std_error, samples, mode)


def _std_error(total: int, total_sq: int, n: int) -> float:
    if n < 2:
        return math.inf
    # exact integer arithmetic for the sum of squared deviations
    ss = total_sq * n - total * total
    return math.sqrt(ss / (n * (n - 1)) / n)
