from __future__ import annotations

import json
from pathlib import Path

import pytest
import yaml

from grfswarm.cli import _parse_seeds, main
from grfswarm.harness import load_run
from grfswarm.scenario import ScenarioError


@pytest.fixture()
def tiny_scenario(tmp_path) -> Path:
    mapping = {
        "partition": {"sizes": [2, 2]},
        "arena": {"width": 3.0, "height": 3.0},
        "potential": {"mass": 5.0},
        "sampler": {"iterations": 15},
        "max_ticks": 6,
    }
    p = tmp_path / "tiny.yaml"
    p.write_text(yaml.safe_dump(mapping))
    return p


def test_parse_seeds_forms():
    assert _parse_seeds("0,1,5") == [0, 1, 5]
    assert _parse_seeds("0:4") == [0, 1, 2, 3]
    with pytest.raises(ScenarioError):
        _parse_seeds("4:4")


def test_run_twice_writes_identical_metric_bytes(tiny_scenario, tmp_path):
    outs = [tmp_path / "a", tmp_path / "b"]
    for out in outs:
        code = main(["run", "--scenario", str(tiny_scenario), "--seed", "3",
                     "--out-dir", str(out)])
        assert code == 0
    first = (outs[0] / "metrics.jsonl").read_bytes()
    second = (outs[1] / "metrics.jsonl").read_bytes()
    assert first == second
    assert len(first) > 0


def test_run_states_flag_writes_state_stream(tiny_scenario, tmp_path):
    out = tmp_path / "s"
    code = main(["run", "--scenario", str(tiny_scenario), "--seed", "3",
                 "--stride", "2", "--states", "--out-dir", str(out)])
    assert code == 0
    lines = (out / "states.jsonl").read_text().splitlines()
    rec = load_run(out)
    assert len(lines) == len(rec.samples)
    for line, sample in zip(lines, rec.samples):
        snap = json.loads(line)
        assert snap["tick"] == sample.tick
        assert len(snap["positions"]) == 4
        assert all(len(p) == 2 for p in snap["positions"])
        assert len(snap["velocities"]) == 4
        assert snap["types"] == [0, 0, 1, 1]


def test_run_without_states_flag_writes_no_state_stream(tiny_scenario, tmp_path):
    out = tmp_path / "n"
    code = main(["run", "--scenario", str(tiny_scenario), "--out-dir", str(out)])
    assert code == 0
    assert not (out / "states.jsonl").exists()


def test_run_record_tags_requested_controller(tiny_scenario, tmp_path):
    out = tmp_path / "gd"
    code = main(["run", "--scenario", str(tiny_scenario), "--controller", "gd",
                 "--out-dir", str(out)])
    assert code == 0
    rec = load_run(out)
    assert rec.controller == "gd"
    assert rec.scenario["controller"] == "gd"


def test_run_applies_set_overrides(tiny_scenario, tmp_path):
    out = tmp_path / "o"
    code = main(["run", "--scenario", str(tiny_scenario),
                 "--set", "potential.mass=2.5", "--set", "max_ticks=2",
                 "--out-dir", str(out)])
    assert code == 0
    rec = load_run(out)
    assert rec.scenario["potential"]["mass"] == 2.5
    assert rec.samples[-1].tick == 2


def test_missing_scenario_exits_2_without_output(tmp_path, capsys):
    out = tmp_path / "never"
    code = main(["run", "--scenario", str(tmp_path / "absent.yaml"),
                 "--out-dir", str(out)])
    assert code == 2
    assert not out.exists()
    assert "error:" in capsys.readouterr().err


def test_bad_override_exits_2(tiny_scenario, tmp_path, capsys):
    code = main(["run", "--scenario", str(tiny_scenario),
                 "--set", "potential.masss=1", "--out-dir", str(tmp_path / "x")])
    assert code == 2
    assert "potential.masss" in capsys.readouterr().err


def test_validate_prints_resolved_mapping(tiny_scenario, capsys):
    code = main(["validate", "--scenario", str(tiny_scenario),
                 "--set", "rng_seed=7"])
    assert code == 0
    resolved = yaml.safe_load(capsys.readouterr().out)
    assert resolved["rng_seed"] == 7
    assert resolved["sampler"]["burn_in"] is not None
    assert resolved["sampler"]["proposal_covariance"] is not None


def test_batch_writes_csvs_and_prints_aggregate(tiny_scenario, tmp_path, capsys):
    out = tmp_path / "batch"
    code = main(["batch", "--scenario", str(tiny_scenario), "--seeds", "0:2",
                 "--sweep", "controller=grf,gd", "--workers", "1",
                 "--no-streams", "--out-dir", str(out)])
    assert code == 0
    runs = (out / "runs.csv").read_text().strip().split("\n")
    assert len(runs) == 1 + 4  # 2 controllers x 2 seeds
    agg = (out / "aggregate.csv").read_text()
    assert capsys.readouterr().out == agg
    assert not (out / "runs").exists()


def test_batch_invalid_base_runs_nothing(tiny_scenario, tmp_path, capsys):
    out = tmp_path / "batch"
    code = main(["batch", "--scenario", str(tiny_scenario), "--seeds", "0",
                 "--set", "v_max=-2", "--workers", "1",
                 "--out-dir", str(out)])
    assert code == 2
    assert not out.exists()


def test_shape_requires_attractors(tiny_scenario, tmp_path, capsys):
    code = main(["shape", "--scenario", str(tiny_scenario),
                 "--out-dir", str(tmp_path / "s")])
    assert code == 2
    assert "attractor" in capsys.readouterr().err


def test_shape_runs_with_attractors(tiny_scenario, tmp_path):
    out = tmp_path / "s"
    code = main(["shape", "--scenario", str(tiny_scenario),
                 "--set", "attractors=[{position: [1.0, 1.0], target_type: 0}]",
                 "--out-dir", str(out)])
    assert code == 0
    rec = load_run(out)
    assert rec.samples[0].attractor_distances is not None


def test_shape_preset_has_attractors(tmp_path):
    preset = Path(__file__).resolve().parent.parent / "scenarios" / "shape_desk.yaml"
    out = tmp_path / "shape"
    code = main(["shape", "--scenario", str(preset), "--set", "max_ticks=2",
                 "--set", "sampler.iterations=10", "--out-dir", str(out)])
    assert code == 0
    rec = load_run(out)
    head = json.loads((out / "record.json").read_text())
    assert head["schema_version"] == 1
    assert rec.samples[-1].attractor_distances[0] is not None
