import json

import pytest

from dbsim.core import ConfigError
from dbsim.sensitivity import PUBLISHED_DS
from dbsim.sweep import (
    REFERENCE_CONFIG,
    SEED_ENV,
    TABLE1_PAIRS,
    SweepSpec,
    derive_ds,
    load_table1,
    parse_config,
    reproduce_table1,
    resolve_ds,
    run_sweep,
)


def write(tmp_path, data):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(data))
    return path


def test_defaults():
    spec = parse_config(environ={})
    assert spec.mu == 0.1 and spec.b_l == 6 and spec.ds == 0.216 and spec.trials == 20
    assert spec.pairs == TABLE1_PAIRS


def test_published_table_golden():
    rows = load_table1()
    assert len(rows) == 7
    assert rows[0].n_p == 296_000 and rows[0].de == 0.128
    assert rows[-1].n_t == 625_000 and rows[-1].n_tr == 2_500_000 and rows[-1].de == 0.180


def test_flag_overrides_file(tmp_path):
    path = write(tmp_path, {"ds": 0.3, "trials": 3})
    assert parse_config(path, environ={}).ds == 0.3
    spec = parse_config(path, {"ds": 0.2143}, environ={})
    assert spec.ds == 0.2143 and spec.trials == 3


def test_ds_keywords(tmp_path):
    assert parse_config(write(tmp_path, {"ds": "paper"}), environ={}).ds == PUBLISHED_DS
    assert parse_config(write(tmp_path, {"ds": "simulated"}), environ={}).ds == "simulated"
    with pytest.raises(ConfigError, match="ds"):
        parse_config(write(tmp_path, {"ds": "best"}), environ={})
    with pytest.raises(ConfigError, match="ds"):
        parse_config(write(tmp_path, {"ds": 1.5}), environ={})


@pytest.mark.parametrize(
    "data, fragment",
    [
        ({"n_t_values": [1e6, -2e6], "n_tr_values": [5e6]}, r"n_t_values\[1\]"),
        ({"mu": -0.1}, r"\.mu"),
        ({"trials": 0}, r"\.trials"),
        ({"b_l": 2.5}, r"\.b_l"),
        ({"pairs": [[1e6]]}, r"pairs\[0\]"),
        ({"colour": "red"}, "unknown key"),
        ({"n_t_values": [1e6]}, "together"),
        ({"seed": -3}, r"\.seed"),
        ({"pairs": [[10.5, 1e3]]}, "n_t=10.5"),
    ],
)
def test_schema_errors_name_field(tmp_path, data, fragment):
    with pytest.raises(ConfigError, match=fragment):
        parse_config(write(tmp_path, data), environ={})


def test_invalid_json(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{nope")
    with pytest.raises(ConfigError, match="invalid JSON"):
        parse_config(path, environ={})


def test_grid_is_crossed(tmp_path):
    spec = parse_config(write(tmp_path, {"n_t_values": [1e5, 2e5], "n_tr_values": [4e5, 8e5]}), environ={})
    assert len(spec.configs()) == 4


def test_seed_precedence(tmp_path):
    env = {SEED_ENV: "77"}
    assert parse_config(environ=env).master_seed == 77
    path = write(tmp_path, {"seed": 5})
    assert parse_config(path, environ=env).master_seed == 5
    assert parse_config(path, {"seed": 9}, environ=env).master_seed == 9


def test_configs_sorted_by_gate_then_pulse_rate():
    spec = SweepSpec()
    keys = [(c.n_tr, c.n_t) for c in spec.configs()]
    assert keys == sorted(keys)


def test_single_pair_sweep():
    spec = SweepSpec(pairs=((50e3, 100e3),), trials=3, master_seed=1)
    assert len(run_sweep(spec)) == 1


def test_sweep_row_equals_standalone_point():
    spec = SweepSpec(pairs=((50e3, 100e3), (25e3, 100e3)), trials=4, master_seed=3)
    solo = SweepSpec(pairs=((50e3, 100e3),), trials=4, master_seed=3)
    by_nt = {p.config.n_t: p for p in run_sweep(spec)}
    assert by_nt[50e3] == run_sweep(solo)[0]


def test_derive_ds_with_published_nb_avg():
    report = derive_ds(5033, REFERENCE_CONFIG, nb_override=0.333)
    assert round(report.result.ds, 3) == 0.216
    assert report.estimate is None


def test_derive_ds_simulated():
    report = derive_ds(5033, REFERENCE_CONFIG)
    # analytic pulses-mode nb_avg 0.28548 gives DS 0.21360; stderr 1e-3 moves DS by < 1e-4
    assert report.result.ds == pytest.approx(0.2136, abs=3e-4)
    assert round(report.result.ds, 3) == 0.214
    assert report.published.ds == pytest.approx(0.2158, abs=5e-5)
    assert any("DS" in line for line in report.lines())


def test_derive_ds_zero_registrations():
    assert derive_ds(0, REFERENCE_CONFIG, nb_override=0.3).result.ds == 0


def test_resolve_ds_simulated():
    assert resolve_ds(SweepSpec(ds="simulated")) == pytest.approx(0.2136, abs=3e-4)
    assert resolve_ds(SweepSpec(ds=0.25)) == 0.25


def test_reproduce_table1_shape():
    rows = reproduce_table1(trials=2, master_seed=5)
    assert len(rows) == 7
    for row in rows:
        assert row.point.config.n_t == row.published.n_t
        assert row.point.config.n_tr == row.published.n_tr
