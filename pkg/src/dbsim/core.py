"""Operating-point parameters and the deterministic arithmetic around them.

Rates are in events per second and the observation window in seconds, so
``rate * window_s`` is a count of time-bins.  Two bin conventions coexist:

* pulse slots, one per incoming light pulse (used when estimating the mean
  number of blanked pulses), and
* gate bins, one per detector gate (used when counting registrable pulses).

:func:`pulse_blank_span` converts a blanking depth given in gate bins into
pulse slots.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction


class ConfigError(ValueError):
    """An operating point or input value violates its validity constraints."""


class SimulationError(RuntimeError):
    """A simulation could not produce a result for a valid configuration."""


def _whole(value: float, name: str) -> int:
    n = round(value)
    if n < 1 or not math.isclose(value, n, rel_tol=1e-12, abs_tol=1e-9):
        raise ConfigError(f"{name} must be a positive whole number of bins, got {value!r}")
    return n


@dataclass(frozen=True)
class DetectorConfig:
    """One operating point of a gated detector fed by an attenuated laser.

    Attributes:
        n_t: Light-pulse arrival rate (1/s).
        n_tr: Detector gating (trigger) rate (1/s).
        mu: Mean photon number per light pulse.
        b_l: Number of gates blanked after each registration.
        window_s: Observation window (s).
    """

    n_t: float
    n_tr: float
    mu: float
    b_l: int
    window_s: float = 1.0

    def __post_init__(self) -> None:
        for name in ("n_t", "n_tr", "mu", "window_s"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ConfigError(f"{name} must be a number, got {value!r}")
            if not math.isfinite(value) or value <= 0:
                raise ConfigError(f"{name} must be positive, got {value!r}")
        if isinstance(self.b_l, bool) or not isinstance(self.b_l, int) or self.b_l < 0:
            raise ConfigError(f"b_l must be a non-negative integer, got {self.b_l!r}")
        _whole(self.n_t * self.window_s, "n_t * window_s")
        _whole(self.n_tr * self.window_s, "n_tr * window_s")


@dataclass(frozen=True)
class DerivedCounts:
    """Simulation sizes implied by a :class:`DetectorConfig`.

    ``n_bin`` counts gate bins (registration simulation); ``n_slot`` counts
    the bins a photon can land in for the blanking estimate, i.e. pulse slots
    when pulses are slower than gates and gate bins otherwise.
    """

    n_0: int
    n_bin: int
    n_dist: int
    pulse_blank_span: int
    n_slot: int


def pulse_blank_span(b_l: int, n_t: float, n_tr: float) -> int:
    """Number of pulse slots lost after a registration.

    With ``n_t <= n_tr`` the ``b_l`` blanked gates cover
    ``ceil(b_l * n_t / n_tr)`` pulse slots (a slot counts as lost if any of
    its gates is blanked).  With faster pulses than gates the bins are gate
    bins and the span is ``b_l`` itself.
    """
    if b_l < 0:
        raise ConfigError(f"b_l must be non-negative, got {b_l!r}")
    if n_t <= 0 or n_tr <= 0:
        raise ConfigError("rates must be positive")
    if n_t > n_tr:
        return b_l
    # exact rational arithmetic so that e.g. 6 * 250e3 / 500e3 is exactly 3
    return math.ceil(Fraction(b_l) * Fraction(n_t) / Fraction(n_tr))


def derive_counts(config: DetectorConfig) -> DerivedCounts:
    """Photon and bin counts for one observation window.

    The expected photon number saturates at the gating rate:
    ``n_0 = min(n_t, n_tr) * mu * window_s``, rounded to the nearest integer.
    """
    n_bin = _whole(config.n_tr * config.window_s, "n_tr * window_s")
    n_pulse = _whole(config.n_t * config.window_s, "n_t * window_s")
    n_0 = round(min(config.n_t, config.n_tr) * config.mu * config.window_s)
    return DerivedCounts(
        n_0=n_0,
        n_bin=n_bin,
        n_dist=n_0,
        pulse_blank_span=pulse_blank_span(config.b_l, config.n_t, config.n_tr),
        n_slot=min(n_pulse, n_bin),
    )
