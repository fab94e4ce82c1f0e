"""Scenario validation, execution, determinism, and golden-log regression."""

from pathlib import Path

import pytest

from coopattest.errors import ConfigInvalid, ScriptActionFailed
from coopattest.harness import (
    EventLog,
    ScenarioConfig,
    bundled_scenario_names,
    bundled_scenario_path,
    run_scenario,
    validate_config,
)

GOLDEN_DIR = Path(__file__).parent / "goldens"


def minimal_config(**overrides):
    raw = {
        "seed": b"harness-test",
        "tick_limit": 20,
        "cooperatives": [{
            "name": "coop1", "legal_rep": "notary1",
            "members": [{
                "member_id": "alice", "legal_identity": "alice-legal-0001",
                "personal_data": {"date-of-birth": -9000, "residence": "NL"},
                "handle": "@alice",
            }],
        }],
        "notaries": [{"name": "notary1", "jurisdiction": "US", "compatible": ["US"]}],
        "exchanges": [
            {"name": "E1", "jurisdiction": "US", "threshold": 1000},
            {"name": "E2", "jurisdiction": "US", "threshold": 1000},
        ],
        "providers": [],
        "script": [
            {"at": 1, "action": "issue", "coop": "coop1", "member": "alice",
             "queries": ["age-over-18", "residence-country"], "mode": "absent",
             "ttl": 15, "label": "a1"},
            {"at": 2, "action": "register", "exchange": "E1", "account": "acct-a",
             "attestation": "a1"},
        ],
    }
    raw.update(overrides)
    return ScenarioConfig.from_map(raw)


class TestValidateConfig:
    @pytest.mark.parametrize("name", bundled_scenario_names())
    def test_bundled_fixtures_clean(self, name):
        config = ScenarioConfig.load(bundled_scenario_path(name))
        assert validate_config(config) == []

    def test_minimal_clean(self):
        assert validate_config(minimal_config()) == []

    def test_unknown_member_named_with_path(self):
        config = minimal_config()
        config.script[0]["member"] = "bob"
        problems = validate_config(config)
        assert len(problems) == 1
        assert problems[0].startswith("script[0].member")

    def test_decreasing_ticks(self):
        config = minimal_config()
        config.script[1]["at"] = 0
        problems = validate_config(config)
        assert any("non-decreasing" in p for p in problems)

    def test_tick_beyond_limit(self):
        config = minimal_config(tick_limit=1)
        problems = validate_config(config)
        assert any("exceeds tick_limit" in p for p in problems)

    def test_empty_seed(self):
        config = minimal_config(seed=b"")
        assert any(p.startswith("seed") for p in validate_config(config))

    def test_unknown_action(self):
        config = minimal_config()
        config.script[0]["action"] = "teleport"
        assert any("unknown action" in p for p in validate_config(config))

    def test_label_used_before_issue(self):
        config = minimal_config()
        config.script[1]["attestation"] = "ghost"
        assert any("not issued earlier" in p for p in validate_config(config))

    def test_duplicate_label(self):
        config = minimal_config()
        config.script[0]["label"] = "a1"
        dup = dict(config.script[0])
        object.__setattr__(config, "script", config.script + (dup,))
        problems = validate_config(config)
        assert any("duplicate label" in p for p in problems)

    def test_handle_mode_without_handle(self):
        config = minimal_config()
        config.cooperatives[0]["members"][0].pop("handle")
        config.script[0]["mode"] = "handle"
        assert any("has no handle" in p for p in validate_config(config))

    def test_unknown_legal_rep(self):
        config = minimal_config()
        config.cooperatives[0]["legal_rep"] = "nobody"
        assert any("unknown notary" in p for p in validate_config(config))

    def test_follower_names_checked(self):
        config = minimal_config(providers=[
            {"name": "P1", "jurisdiction": "US", "followers": {"@alice": ["P9"]}},
        ])
        assert any("unknown provider 'P9'" in p for p in validate_config(config))


class TestRunScenario:
    def test_invalid_config_raises(self):
        config = minimal_config(seed=b"")
        with pytest.raises(ConfigInvalid) as excinfo:
            run_scenario(config)
        assert excinfo.value.problems

    def test_runtime_failure_carries_tick_and_action(self):
        config = minimal_config()
        dup = dict(config.script[1])
        dup["at"] = 3
        object.__setattr__(config, "script", config.script + (dup,))
        assert validate_config(config) == []  # statically fine, fails at runtime
        with pytest.raises(ScriptActionFailed) as excinfo:
            run_scenario(config)
        assert excinfo.value.tick == 3
        assert excinfo.value.action["action"] == "register"

    @pytest.mark.parametrize("name", bundled_scenario_names())
    def test_replay_is_byte_identical(self, name):
        config = ScenarioConfig.load(bundled_scenario_path(name))
        assert run_scenario(config).to_bytes() == run_scenario(config).to_bytes()

    @pytest.mark.parametrize("name", bundled_scenario_names())
    def test_matches_committed_golden(self, name):
        config = ScenarioConfig.load(bundled_scenario_path(name))
        golden = (GOLDEN_DIR / f"{name}.log").read_bytes()
        assert run_scenario(config).to_bytes() == golden

    @pytest.mark.parametrize("name", bundled_scenario_names())
    def test_chains_verify_at_end(self, name):
        config = ScenarioConfig.load(bundled_scenario_path(name))
        log = run_scenario(config)
        assert all(e.payload["ok"] for e in log.of_kind("chain-verified"))

    @pytest.mark.parametrize("name", bundled_scenario_names())
    def test_message_log_completeness(self, name):
        """Every cross-actor message appears exactly once as a send and once
        as a deliver, pairwise matched."""
        from coopattest.canonical import canonical_serialize

        config = ScenarioConfig.load(bundled_scenario_path(name))
        log = run_scenario(config)
        sends = [(e.payload["to"], e.payload["channel"],
                  canonical_serialize(e.payload["body"])) for e in log.of_kind("send")]
        delivers = [(e.actor, e.payload["channel"],
                     canonical_serialize(e.payload["body"])) for e in log.of_kind("deliver")]
        assert len(sends) == len(delivers)
        assert sorted(sends) == sorted(delivers)

    def test_basic_scenario_ends_with_accepted_decision(self):
        config = ScenarioConfig.load(bundled_scenario_path("travel_rule_basic"))
        log = run_scenario(config)
        assert log.events[-1].kind == "transfer-decision"
        assert log.events[-1].payload["outcome"] == "accepted"

    def test_bot_flood_counts(self):
        config = ScenarioConfig.load(bundled_scenario_path("dsn_bot_flood"))
        log = run_scenario(config)
        drops = [e for e in log.of_kind("filter-decision")
                 if e.payload["outcome"] == "drop"]
        assert len(drops) == 100
        assert all(e.payload["reason"] == "no-ledger-match" for e in drops)

    def test_port_scenario_reads_nothing_remote_while_filtering(self):
        config = ScenarioConfig.load(bundled_scenario_path("dsn_port"))
        log = run_scenario(config)
        port_events = [i for i, e in enumerate(log.events) if e.kind == "ported"]
        assert port_events, "scenario must exercise porting"
        after_port = log.events[port_events[-1] + 1:]
        p3_reads = [e for e in after_port
                    if e.kind == "ledger-read" and e.actor == "P3"
                    and e.payload["ledger"] == "P1"]
        assert p3_reads == []


class TestEventLog:
    def test_bytes_roundtrip(self):
        config = minimal_config()
        log = run_scenario(config)
        assert EventLog.from_bytes(log.to_bytes()).events == log.events

    def test_write_and_load(self, tmp_path):
        log = run_scenario(minimal_config())
        path = tmp_path / "run.log"
        log.write(path)
        assert EventLog.load(path).events == log.events
