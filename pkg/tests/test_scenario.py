from __future__ import annotations

from pathlib import Path

import pytest
import yaml

from grfswarm.model import SwarmConfig
from grfswarm.scenario import (
    ScenarioError,
    apply_override,
    build_config,
    config_mapping,
    load_mapping,
    load_scenario,
    parse_override,
)

SCENARIO_DIR = Path(__file__).resolve().parent.parent / "scenarios"


def minimal_mapping() -> dict:
    return {
        "partition": {"sizes": [3, 3]},
        "arena": {"width": 3.0, "height": 3.0},
    }


def test_bundled_presets_all_load():
    paths = sorted(SCENARIO_DIR.glob("*.yaml"))
    assert len(paths) >= 4
    for p in paths:
        cfg = load_scenario(p)
        assert isinstance(cfg, SwarmConfig)
        assert cfg.n_robots > 0


def test_bundled_presets_round_trip():
    # serializing the resolved config and rebuilding it is the identity
    for p in sorted(SCENARIO_DIR.glob("*.yaml")):
        cfg = load_scenario(p)
        again = build_config(config_mapping(cfg))
        assert again == cfg


def test_unknown_key_reports_dotted_path():
    m = minimal_mapping()
    m["potential"] = {"masss": 3.0}
    with pytest.raises(ScenarioError, match="potential.masss"):
        build_config(m)


def test_unknown_top_key_rejected():
    m = minimal_mapping()
    m["wheels"] = 4
    with pytest.raises(ScenarioError, match="wheels"):
        build_config(m)


def test_partition_spellings_equivalent():
    a = build_config({"partition": {"sizes": [4, 4, 4]},
                      "arena": {"width": 4.0, "height": 4.0}})
    b = build_config({"partition": {"groups": 3, "robots_per_group": 4},
                      "arena": {"width": 4.0, "height": 4.0}})
    assert a.partition == b.partition


def test_partition_both_spellings_rejected():
    with pytest.raises(ScenarioError):
        build_config({"partition": {"sizes": [2], "groups": 1,
                                    "robots_per_group": 2},
                      "arena": {"width": 4.0, "height": 4.0}})


def test_partition_missing_rejected():
    with pytest.raises(ScenarioError):
        build_config({"arena": {"width": 4.0, "height": 4.0}})


def test_invalid_field_value_becomes_scenario_error():
    m = minimal_mapping()
    m["v_max"] = -1.0
    with pytest.raises(ScenarioError):
        build_config(m)


def test_parse_override_yaml_typed():
    keys, value = parse_override("potential.mass=7.5")
    assert keys == ["potential", "mass"]
    assert value == 7.5
    keys, value = parse_override("controller=gd")
    assert value == "gd"
    _, value = parse_override("sampler.proposal_covariance=[[0.01,0],[0,0.01]]")
    assert value == [[0.01, 0], [0, 0.01]]


def test_parse_override_requires_equals():
    with pytest.raises(ScenarioError):
        parse_override("potential.mass")


def test_apply_override_creates_nested_blocks():
    m = minimal_mapping()
    apply_override(m, ["sampler", "iterations"], 50)
    assert m["sampler"]["iterations"] == 50


def test_apply_override_refuses_to_cross_scalars():
    m = minimal_mapping()
    m["v_max"] = 1.0
    with pytest.raises(ScenarioError):
        apply_override(m, ["v_max", "inner"], 3)


def test_load_mapping_applies_overrides(tmp_path):
    f = tmp_path / "s.yaml"
    f.write_text(yaml.safe_dump(minimal_mapping()))
    m = load_mapping(f, overrides=["potential.mass=9.5", "rng_seed=3"])
    assert m["potential"]["mass"] == 9.5
    assert m["rng_seed"] == 3
    cfg = build_config(m)
    assert cfg.potential.mass == 9.5
    assert cfg.rng_seed == 3


def test_load_scenario_rejects_non_mapping_yaml(tmp_path):
    f = tmp_path / "bad.yaml"
    f.write_text("- just\n- a\n- list\n")
    with pytest.raises(ScenarioError):
        load_scenario(f)


def test_load_scenario_rejects_unparseable_yaml(tmp_path):
    f = tmp_path / "worse.yaml"
    f.write_text("a: [unclosed\n")
    with pytest.raises(ScenarioError):
        load_scenario(f)


def test_config_mapping_is_fully_resolved():
    cfg = build_config(minimal_mapping())
    m = config_mapping(cfg)
    assert m["sampler"]["burn_in"] == cfg.sampler.burn_in
    assert m["sampler"]["proposal_covariance"] is not None
    assert m["potential"]["charges"] == [1.0, 1.0]
