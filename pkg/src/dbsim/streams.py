"""Seeded generation of photon-occupancy timelines.

Random numbers come from Philox-4x64-10 (counter-based, 128-bit key,
256-bit counter) through ``numpy.random.Philox.random_raw``, which returns
the raw 64-bit words of the algorithm and is therefore identical on every
platform and numpy release.  Integers in ``[0, n)`` are obtained from a raw
word ``x`` as ``floor(x * n / 2**64)`` (multiply-high).  The bias of this map
is below ``n / 2**64``, i.e. < 3e-13 for the bin counts used here.

Stream keys are derived with :func:`sub_seed`; a :class:`SeedSpec` names
one stream and :meth:`SeedSpec.child` derives nested streams (one per batch
or per trial).
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from dbsim.core import ConfigError

MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MAX_BINS = 1 << 32


def sub_seed(master_seed: int, stream_index: int) -> int:
    """Mix a master seed and a stream index into a 64-bit key.

    This is SplitMix64 evaluated at position ``stream_index + 1`` of the
    sequence started at ``master_seed``: the state
    ``master_seed + (stream_index + 1) * 0x9E3779B97F4A7C15 (mod 2**64)`` is
    passed through the SplitMix64 finalizer.  Both steps are bijections on
    64-bit words, so the result is injective in ``stream_index`` for indices
    below ``2**64`` and injective in ``master_seed`` for a fixed index.
    The mapping is part of the reproducibility contract and must not change.
    """
    z = (master_seed + (stream_index + 1) * _GOLDEN) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


@dataclass(frozen=True)
class SeedSpec:
    master_seed: int
    stream_index: int = 0

    def __post_init__(self) -> None:
        if not 0 <= self.master_seed <= MASK64:
            raise ConfigError(f"master_seed must be a 64-bit unsigned integer, got {self.master_seed!r}")
        if self.stream_index < 0:
            raise ConfigError(f"stream_index must be non-negative, got {self.stream_index!r}")

    @property
    def key(self) -> int:
        return sub_seed(self.master_seed, self.stream_index)

    def child(self, index: int) -> SeedSpec:
        """Independent sub-stream ``index`` of this stream."""
        return SeedSpec(self.key, index)

    def bit_generator(self) -> np.random.Philox:
        return np.random.Philox(key=np.array([self.key, 0], dtype=np.uint64), counter=0)


def bounded_integers(bitgen: np.random.Philox, n: int, size: int) -> np.ndarray:
    """``size`` integers uniform on ``[0, n)`` from raw Philox words."""
    if not 1 <= n < _MAX_BINS:
        raise ConfigError(f"range must be in [1, 2**32), got {n}")
    x = bitgen.random_raw(size)
    n64 = np.uint64(n)
    shift = np.uint64(32)
    hi = x >> shift
    lo = x & np.uint64(0xFFFFFFFF)
    # floor(x * n / 2**64) without 128-bit arithmetic; no term overflows for n < 2**32
    return ((hi * n64 + ((lo * n64) >> shift)) >> shift).astype(np.int64)


@dataclass(frozen=True, eq=False)
class OccupancyTimeline:
    """Photon counts per time-bin; ``counts[i]`` photons landed in bin ``i``."""

    counts: np.ndarray
    n_photons: int

    def __post_init__(self) -> None:
        if self.counts.ndim != 1 or self.counts.size < 1:
            raise ConfigError("counts must be a non-empty 1-D array")
        if int(self.counts.sum()) != self.n_photons:
            raise ConfigError("sum(counts) must equal n_photons")

    @property
    def n_bin(self) -> int:
        return self.counts.size

    @classmethod
    def from_counts(cls, counts) -> OccupancyTimeline:
        arr = np.asarray(counts, dtype=np.int32)
        if (arr < 0).any():
            raise ConfigError("photon counts must be non-negative")
        return cls(arr, int(arr.sum()))


def generate_timeline(n_bin: int, n_photons: int, seed: SeedSpec) -> OccupancyTimeline:
    """Place ``n_photons`` photons independently and uniformly into ``n_bin`` bins.

    Placement is with replacement, so a bin may hold several photons.
    """
    if n_bin < 1:
        raise ConfigError(f"n_bin must be at least 1, got {n_bin}")
    if n_photons < 0:
        raise ConfigError(f"n_photons must be non-negative, got {n_photons}")
    return _timeline_from(seed.bit_generator(), n_bin, n_photons)


def _timeline_from(bitgen: np.random.Philox, n_bin: int, n_photons: int) -> OccupancyTimeline:
    bins = bounded_integers(bitgen, n_bin, n_photons)
    counts = np.bincount(bins, minlength=n_bin).astype(np.int32)
    return OccupancyTimeline(counts, n_photons)


def occupied_indices(timeline: OccupancyTimeline) -> np.ndarray:
    """Ascending indices of bins holding at least one photon.

    A multi-photon bin is a single light pulse and appears once.
    """
    return np.flatnonzero(timeline.counts)


def dump_timeline(timeline: OccupancyTimeline, path: Path | str) -> None:
    """Write ``index,count`` for every occupied bin, ascending."""
    idx = occupied_indices(timeline)
    lines = [f"{i},{c}\n" for i, c in zip(idx.tolist(), timeline.counts[idx].tolist())]
    with open(path, "w", newline="\n") as fh:
        fh.writelines(lines)
