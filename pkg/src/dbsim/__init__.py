"""Monte Carlo model of a gated single-photon detector with digital blanking.

Estimates how many light pulses are lost to blanking, derives the
detector's open-gate detection sensitivity (DS) from a measured count rate,
and predicts detection efficiency (DE) at arbitrary operating points.
"""

from dbsim.blanking import (
    BlankingEstimate,
    ConvergencePolicy,
    analytic_nb_avg,
    estimate_nb_avg,
    sample_blanked_count,
)
from dbsim.core import (
    ConfigError,
    DerivedCounts,
    DetectorConfig,
    SimulationError,
    derive_counts,
    pulse_blank_span,
)
from dbsim.registration import (
    EfficiencyPoint,
    RegistrationResult,
    brute_force_np,
    greedy_np,
    renewal_np_rate,
    simulate_point,
)
from dbsim.sensitivity import (
    NonPhysicalError,
    SensitivityInputs,
    SensitivityResult,
    compute_de,
    compute_ds,
)
from dbsim.streams import OccupancyTimeline, SeedSpec, generate_timeline, occupied_indices, sub_seed

__all__ = [
    "BlankingEstimate", "ConvergencePolicy", "analytic_nb_avg", "estimate_nb_avg", "sample_blanked_count",
    "ConfigError", "DerivedCounts", "DetectorConfig", "SimulationError", "derive_counts", "pulse_blank_span",
    "EfficiencyPoint", "RegistrationResult", "brute_force_np", "greedy_np", "renewal_np_rate", "simulate_point",
    "NonPhysicalError", "SensitivityInputs", "SensitivityResult", "compute_de", "compute_ds",
    "OccupancyTimeline", "SeedSpec", "generate_timeline", "occupied_indices", "sub_seed",
]
