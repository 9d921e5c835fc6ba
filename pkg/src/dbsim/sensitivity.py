"""Detection sensitivity and detection efficiency.

Detection efficiency (DE) is registrations divided by all incident light
pulses.  Detection sensitivity (DS) is registrations divided by the pulses
that arrive while the detector is open, i.e. not blanked.  With ``n_g``
registered pulses, ``n_b`` blanked pulses and ``n_a`` open-gate pulses that
went undetected, the incident total is ``n_0 = n_a + n_b + n_g`` and

    DS = n_g / (n_0 - n_b),   n_b = n_g * nb_avg,

where ``nb_avg`` is the mean number of pulses blanked per registration.
"""

from __future__ import annotations

from dataclasses import dataclass

from dbsim.core import ConfigError

#: Registered pulses per second at 250 kHz pulses, 500 kHz gating, mu=0.1,
#: B_L=6: manufacturer-supplied measurement, overridable.
MANUFACTURER_N_G = 5033.0
#: Published mean blanked-pulse count for that operating point.
PUBLISHED_NB_AVG = 0.333
#: Published detection sensitivity.
PUBLISHED_DS = 0.216


class NonPhysicalError(ConfigError):
    """Inputs that would give a non-positive open-gate count or DS > 1."""


@dataclass(frozen=True)
class SensitivityInputs:
    n_g: float
    n_0: float
    nb_avg: float

    def __post_init__(self) -> None:
        if self.n_g < 0 or self.n_0 <= 0 or self.nb_avg < 0:
            raise NonPhysicalError(f"non-physical inputs: {self}")
        if self.n_g * self.nb_avg >= self.n_0:
            raise NonPhysicalError(f"non-physical inputs: blanked pulses exceed incident pulses ({self})")


@dataclass(frozen=True)
class SensitivityResult:
    ds: float
    n_b: float
    n_a: float


def compute_ds(inputs: SensitivityInputs) -> SensitivityResult:
    n_b = inputs.n_g * inputs.nb_avg
    open_gate = inputs.n_0 - n_b
    if open_gate <= 0:
        raise NonPhysicalError(f"non-physical inputs: open-gate pulse count {open_gate} <= 0")
    ds = inputs.n_g / open_gate
    if ds > 1:
        raise NonPhysicalError(f"non-physical inputs: DS = {ds} > 1")
    return SensitivityResult(ds=ds, n_b=n_b, n_a=inputs.n_0 - inputs.n_g - n_b)


def compute_de(n_p: float, ds: float, n_0: float) -> float:
    """DE = n_p * DS / n_0, with ``n_p`` the maximum registrable pulse count."""
    if n_0 <= 0:
        raise ConfigError(f"n_0 must be positive, got {n_0}")
    if n_p < 0:
        raise ConfigError(f"n_p must be non-negative, got {n_p}")
    if not 0 <= ds <= 1:
        raise ConfigError(f"ds must lie in [0, 1], got {ds}")
    # ratio first: n_p <= n_0 then guarantees DE <= DS under rounding
    return ds * (n_p / n_0)
