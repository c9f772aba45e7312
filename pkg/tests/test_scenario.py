"""Config parsing, validation, the standard scenario set, and outputs."""

import os

import pytest

from debhsim.debh import AUDIT_HEADER
from debhsim.metrics import CSV_HEADER
from debhsim.scenario import (ConfigError, ScenarioConfig, build_simulation,
                              build_suite, cooperative_fixture,
                              cooperative_scenario, distributed_fixture,
                              load_config, parse_edge_lines, run_scenario,
                              run_suite, single_scenario, sweep_scenario,
                              trust_decay_scenario)


def _write(tmp_path, text):
    path = tmp_path / "scenario.ini"
    path.write_text(text)
    return path


def test_empty_config_keeps_every_default(tmp_path):
    cfg = load_config(_write(tmp_path, ""))
    assert cfg.node_count == 30
    assert cfg.arena == (1000.0, 1000.0)
    assert cfg.range_m == 200.0
    assert cfg.duration_s == 600.0
    assert (cfg.min_speed, cfg.max_speed, cfg.pause_s) == (2.0, 20.0, 15.0)
    assert cfg.mobility is True
    assert (cfg.connections, cfg.packets_per_connection) == (10, 10)
    assert (cfg.rate_pps, cfg.payload_bytes) == (2.0, 512)
    assert cfg.defense == "debh"
    assert cfg.attack_mode == "none"
    assert cfg.seed == 0


def test_full_config_parses_every_section(tmp_path):
    cfg = load_config(_write(tmp_path, """
[scenario]
name = demo
node_count = 16
arena_width = 800
arena_height = 600
range_m = 150
duration_s = 300
defense = none
seed = 9
cache_reply = yes

[mobility]
mobile = no
min_speed = 1
max_speed = 5
pause_s = 2

[attack]
mode = cooperative
groups = 10,14,15
seq_inflation = 50
one_victim = off

[traffic]
connections = 4
packets_per_connection = 6
rate_pps = 1
payload_bytes = 256
flows = 1>4; 2>4@30

[timing]
hop_latency_s = 0.02
reply_timeout_s = 0.08

[topology]
1 2
2 4
2 10
10 14
10 15
14 15
"""))
    assert cfg.name == "demo"
    assert cfg.arena == (800.0, 600.0)
    assert cfg.defense == "none"
    assert cfg.cache_reply is True
    assert cfg.mobility is False
    assert cfg.attack_mode == "cooperative"
    assert cfg.attack_groups == ((10, 14, 15),)
    assert cfg.seq_inflation == 50
    assert cfg.one_victim is False
    assert cfg.flows == ((1, 4, 0.0), (2, 4, 30.0))
    assert cfg.hop_latency == 0.02
    assert cfg.reply_timeout == 0.08
    assert cfg.edges == ((1, 2), (2, 4), (2, 10), (10, 14), (10, 15), (14, 15))


def test_unknown_key_is_rejected_by_name(tmp_path):
    with pytest.raises(ConfigError, match="node_cout"):
        load_config(_write(tmp_path, "[scenario]\nnode_cout = 30\n"))


def test_unparseable_value_names_the_setting(tmp_path):
    with pytest.raises(ConfigError, match="node_count"):
        load_config(_write(tmp_path, "[scenario]\nnode_count = many\n"))


def test_missing_file_is_a_config_error(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "absent.ini")


def test_zero_nodes_rejected(tmp_path):
    with pytest.raises(ConfigError, match="node_count"):
        load_config(_write(tmp_path, "[scenario]\nnode_count = 0\n"))


def test_attack_mode_requires_groups(tmp_path):
    with pytest.raises(ConfigError, match="groups"):
        load_config(_write(tmp_path, "[attack]\nmode = single\n"))


def test_groups_require_an_attack_mode(tmp_path):
    with pytest.raises(ConfigError, match="groups"):
        load_config(_write(tmp_path, "[attack]\ngroups = 3\n"))


def test_flow_endpoints_must_be_honest():
    cfg = single_scenario()
    cfg.flows = ((1, 3, 0.0),)
    with pytest.raises(ConfigError, match="attacker"):
        cfg.validate()


def test_flow_endpoints_must_differ():
    cfg = ScenarioConfig(flows=((1, 1, 0.0),))
    with pytest.raises(ConfigError, match="source equals destination"):
        cfg.validate()


def test_edge_lines_parse_and_reject_garbage():
    assert parse_edge_lines(["1 2", "", "# note", "3 4 # tail"]) == ((1, 2), (3, 4))
    with pytest.raises(ConfigError):
        parse_edge_lines(["1 2 3"])
    with pytest.raises(ConfigError):
        parse_edge_lines(["a b"])


def test_edges_must_name_known_nodes():
    cfg = ScenarioConfig(nodes=(1, 2), edges=((1, 5),))
    with pytest.raises(ConfigError, match="unknown node"):
        cfg.validate()


def test_cooperative_group_must_be_mutually_in_range():
    cfg = ScenarioConfig(
        nodes=(1, 2, 3, 4), edges=((1, 3), (1, 4), (2, 3), (2, 4)),
        attack_mode="cooperative", attack_groups=((3, 4),),
        flows=(), connections=1, mobility=False)
    with pytest.raises(ConfigError, match="not in range"):
        build_simulation(cfg)


def test_single_mode_takes_one_attacker_per_group():
    cfg = ScenarioConfig(attack_mode="single", attack_groups=((3, 4),))
    with pytest.raises(ConfigError, match="single"):
        cfg.validate()


def test_planted_flattens_groups_sorted():
    cfg = distributed_fixture()
    assert cfg.planted() == [10, 12, 14, 16]


def test_suite_covers_the_reported_scenario_set():
    suite = build_suite()
    assert [cfg.name for cfg in suite] == [
        "single", "coop2", "coop3", "coop5", "coop7", "coop9", "distributed"]
    assert [len(cfg.planted()) for cfg in suite] == [1, 2, 3, 5, 7, 9, 4]
    for cfg in suite:
        cfg.validate()


def test_cooperative_scenario_scales_with_k():
    cfg = cooperative_scenario(5)
    assert cfg.planted() == [8, 9, 10, 11, 12]
    assert len(cfg.flows) == 5
    # All attackers sit in one clique behind the shared relay.
    for a in cfg.planted():
        assert (6, a) in cfg.edges


def test_sweep_wiring_is_identical_for_every_k():
    base = sweep_scenario(2)
    for k in (3, 5, 7, 9):
        cfg = sweep_scenario(k)
        assert cfg.edges == base.edges
        assert cfg.node_ids() == base.node_ids()
        assert len(cfg.planted()) == k
    assert sweep_scenario(9).planted() == list(range(26, 35))


def test_fixture_meshes_load_from_package_data():
    coop = cooperative_fixture()
    assert (10, 14) in coop.edges and (10, 15) in coop.edges
    assert coop.planted() == [10, 14, 15]
    dist = distributed_fixture()
    assert dist.attack_groups == ((10, 14), (12, 16))
    coop.validate()
    dist.validate()


def test_trust_decay_scenario_rides_one_line_twice():
    cfg = trust_decay_scenario()
    assert cfg.flows == ((1, 5, 0.0), (1, 5, 60.0))
    cfg.validate()


def test_run_scenario_writes_metrics_and_audit(tmp_path):
    out = tmp_path / "out"
    run_scenario(single_scenario(seed=7), str(out))
    metrics = (out / "metrics.csv").read_text().splitlines()
    audit = (out / "audit.log").read_text().splitlines()
    assert metrics[0] == CSV_HEADER
    assert len(metrics) == 2
    assert audit[0] == AUDIT_HEADER
    assert len(audit) > 1


def test_trace_output_is_optional(tmp_path):
    out = tmp_path / "out"
    cfg = single_scenario(seed=7)
    cfg.trace = True
    run_scenario(cfg, str(out))
    assert (out / "events.trace").exists()


def test_run_suite_orders_rows_by_scenario_then_seed(tmp_path):
    out = tmp_path / "suite"
    rows, summary, sims = run_suite([0, 1], str(out))
    names = [row[0] for row in rows]
    # Scenario blocks in suite order, never interleaved.
    blocks = []
    for name in names:
        if not blocks or blocks[-1] != name:
            blocks.append(name)
    assert blocks == ["single", "coop2", "coop3", "coop5", "coop7", "coop9",
                      "distributed"]
    assert (out / "suite.csv").exists()
    assert (out / "single-s0-metrics.csv").exists()
    assert (out / "distributed-s1-audit.log").exists()
    assert len(sims) == 14


def test_run_suite_needs_at_least_one_seed():
    with pytest.raises(ConfigError):
        run_suite([])
