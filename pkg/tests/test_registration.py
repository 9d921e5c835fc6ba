import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dbsim.core import ConfigError, DetectorConfig, SimulationError, derive_counts
from dbsim.registration import (
    EfficiencyPoint,
    brute_force_np,
    greedy_np,
    occupancy_probability,
    point_stream_index,
    renewal_np_rate,
    simulate_point,
)
from dbsim.streams import OccupancyTimeline, SeedSpec, generate_timeline, occupied_indices


def tl(counts):
    return OccupancyTimeline.from_counts(counts)


def test_greedy_worked_example():
    timeline = tl([1, 0, 0, 1, 1, 0, 0, 0, 1])
    r = greedy_np(timeline, 2)
    assert r.n_p == 3
    assert r.registered.tolist() == [0, 3, 8]
    assert brute_force_np(timeline, 2) == 3


def test_greedy_span_zero_takes_every_occupied_bin():
    timeline = generate_timeline(1000, 400, SeedSpec(2))
    assert greedy_np(timeline, 0).n_p == occupied_indices(timeline).size


def test_single_occupied_bin():
    assert greedy_np(tl([0, 0, 3, 0]), 10).n_p == 1


def test_brute_force_small_cases():
    assert brute_force_np(tl([0] * 8), 2) == 0
    assert brute_force_np(tl([1] * 7), 3) == 2


def test_brute_force_size_cap():
    with pytest.raises(ConfigError, match="too large"):
        brute_force_np(tl([1] * 25), 1)


def test_greedy_negative_span_rejected():
    with pytest.raises(ConfigError):
        greedy_np(tl([1]), -1)


@settings(max_examples=300)
@given(st.lists(st.integers(0, 2), min_size=1, max_size=16), st.integers(0, 4))
def test_greedy_matches_brute_force(counts, span):
    timeline = tl(counts)
    r = greedy_np(timeline, span)
    assert r.n_p == brute_force_np(timeline, span)
    assert np.all(np.diff(r.registered) > span)
    assert r.n_p <= occupied_indices(timeline).size


@given(st.lists(st.integers(0, 2), min_size=1, max_size=200), st.integers(0, 10))
def test_np_non_increasing_in_span(counts, span):
    timeline = tl(counts)
    assert greedy_np(timeline, span + 1).n_p <= greedy_np(timeline, span).n_p


def test_renewal_examples():
    rate = renewal_np_rate(0.0125, 6)
    assert rate == pytest.approx(0.0125 / 1.075, rel=1e-15)
    assert rate == pytest.approx(0.011628, abs=5e-7)
    assert rate * 5e6 == pytest.approx(58.1e3, abs=100)
    assert renewal_np_rate(1.0, 6) == pytest.approx(1 / 7)
    assert renewal_np_rate(1e-12, 6) == pytest.approx(1e-12, rel=1e-9)
    with pytest.raises(ConfigError):
        renewal_np_rate(0.0, 6)


def test_renewal_matches_bernoulli_timeline():
    # i.i.d. occupancy is the renewal model's exact setting
    rng = np.random.Generator(np.random.Philox(3))
    occupied = (rng.random(2_000_000) < 0.05).astype(np.int32)
    r = greedy_np(tl(occupied), 6)
    expected = renewal_np_rate(0.05, 6) * occupied.size
    assert r.n_p == pytest.approx(expected, rel=0.01)


def test_simulate_point_table1_row_slow():
    cfg = DetectorConfig(2.5e6, 5e6, 0.1, 6)
    pt = simulate_point(cfg, 0.216, 5, SeedSpec(1, point_stream_index(cfg)))
    assert pt.n_p_mean == pytest.approx(183e3, rel=0.05)
    assert pt.de == pytest.approx(0.158, abs=0.008)
    assert pt.trials == 5


def test_simulate_point_table1_row_fast():
    cfg = DetectorConfig(100e6, 2.5e6, 0.1, 6)
    pt = simulate_point(cfg, 0.216, 5, SeedSpec(1, point_stream_index(cfg)))
    assert pt.n_p_mean == pytest.approx(153e3, rel=0.05)
    assert pt.de == pytest.approx(0.132, abs=0.008)


def test_simulate_point_no_photons():
    cfg = DetectorConfig(1000.0, 1000.0, 0.0001, 6)
    assert derive_counts(cfg).n_dist == 0
    pt = simulate_point(cfg, 0.216, 3, SeedSpec(1))
    assert pt.n_p_mean == 0 and pt.de == 0


def test_simulate_point_deterministic_and_thread_independent():
    cfg = DetectorConfig(1.25e6, 2.5e6, 0.1, 6)
    a = simulate_point(cfg, 0.2, 6, SeedSpec(42, 9))
    b = simulate_point(cfg, 0.2, 6, SeedSpec(42, 9), threads=3)
    assert a == b


def test_simulate_point_matches_renewal_small():
    cfg = DetectorConfig(50e3, 100e3, 0.2, 6)
    d = derive_counts(cfg)
    pt = simulate_point(cfg, 0.2, 20, SeedSpec(6))
    expected = renewal_np_rate(occupancy_probability(d.n_dist, d.n_bin), 6) * d.n_bin
    assert abs(pt.n_p_mean - expected) / expected < 0.01


def test_single_trial_std_error_nan():
    pt = simulate_point(DetectorConfig(50e3, 100e3, 0.1, 6), 0.2, 1, SeedSpec(6))
    assert math.isnan(pt.n_p_std_error)


def test_efficiency_point_guards():
    cfg = DetectorConfig(1e3, 1e3, 0.1, 6)
    with pytest.raises(SimulationError):
        EfficiencyPoint(cfg, 10.0, 1.0, 0.3, 5, 0.2)
    with pytest.raises(SimulationError):
        EfficiencyPoint(cfg, 10.0, 1.0, -0.1, 5, 0.2)


def test_point_stream_index_stable_and_type_insensitive():
    a = point_stream_index(DetectorConfig(2500000, 5000000, 0.1, 6))
    b = point_stream_index(DetectorConfig(2.5e6, 5e6, 0.1, 6))
    c = point_stream_index(DetectorConfig(2.5e6, 5e6, 0.1, 7))
    assert a == b != c
    assert 0 <= a < 2**63
