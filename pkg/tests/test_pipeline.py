import hashlib
import json

import jsonschema
import pytest

import main
from src.commonroad.reader import read_scenario
from src.monitoring.run_report import RunStats, summary_lines, write_report
from src.optimization.caching import map_cache
from src.pipeline.batch import NoInputs, collect_inputs, run_batch
from src.pipeline.converter import EXIT_FAILURE, EXIT_OK, EXIT_USAGE, ConversionResult, convert_file
from src.settings import ConverterSettings

from conftest import CORPUS, ROOT


@pytest.fixture(scope="module")
def report_schema():
    return json.loads((ROOT / "docs" / "report_schema.json").read_text(encoding="utf-8"))


# ---------------------------------------------------------------- single file

def test_convert_overtake(corpus_dir, tmp_path):
    out = tmp_path / "out"
    result = convert_file(corpus_dir / "SimpleOvertake.xosc", out)

    assert result.success and result.exit_code == EXIT_OK
    assert result.termination_reason == "all_complete"
    assert result.error is None
    xml = out / "SimpleOvertake.xml"
    assert result.outputs == {"commonroad": str(xml)}
    assert result.output_sha256["commonroad"] == hashlib.sha256(xml.read_bytes()).hexdigest()

    scenario = read_scenario(xml)
    assert scenario.metadata.benchmark_id == "ZAM_SimpleOvertake-1_1_T-1"
    assert [o.obstacle_id for o in scenario.dynamic_obstacles] == [4]
    assert scenario.planning_problem.problem_id == 5


def test_outputs_default_next_to_input(corpus_dir):
    result = convert_file(corpus_dir / "LaneKeep.xosc")
    assert result.success
    assert (corpus_dir / "LaneKeep.xml").is_file()


def test_optional_outputs(corpus_dir, tmp_path):
    settings = ConverterSettings(render=True, trace_csv=True)
    result = convert_file(corpus_dir / "pedestrian_collision.xosc", tmp_path, settings)
    assert result.success
    assert set(result.outputs) == {"commonroad", "svg", "trace_csv"}
    assert (tmp_path / "pedestrian_collision.svg").is_file()
    assert (tmp_path / "pedestrian_collision.trace.csv").is_file()


def test_parameter_override_reaches_the_output(corpus_dir, tmp_path):
    settings = ConverterSettings(parameters={"SpeedA": "30"})
    result = convert_file(corpus_dir / "SimpleOvertake.xosc", tmp_path, settings)
    assert result.success
    problem = read_scenario(tmp_path / "SimpleOvertake.xml").planning_problem
    assert problem.initial_state.velocity == pytest.approx(30.0)


def test_time_limit_without_stop_trigger(corpus_dir, tmp_path):
    result = convert_file(corpus_dir / "NoStopTrigger.xosc", tmp_path)
    assert result.success
    assert result.termination_reason == "t_max"
    assert result.scenario_duration == pytest.approx(60.0)
    assert result.warnings >= 1
    scenario = read_scenario(tmp_path / "NoStopTrigger.xml")
    assert scenario.planning_problem.goal.time_step.end == 600


def test_missing_road_network_is_a_usage_error(corpus_dir, tmp_path):
    (corpus_dir / "straight_road.xodr").unlink()
    result = convert_file(corpus_dir / "SimpleOvertake.xosc", tmp_path)
    assert not result.success
    assert result.exit_code == EXIT_USAGE
    assert result.error_code == "road_network_not_found"
    assert not (tmp_path / "SimpleOvertake.xml").exists()


def test_missing_input_is_a_usage_error(tmp_path):
    result = convert_file(tmp_path / "nope.xosc", tmp_path)
    assert (result.exit_code, result.error_code) == (EXIT_USAGE, "io_error")


def test_validation_errors_fail_the_conversion(osc, corpus_dir, tmp_path):
    events = [osc.event("Go", osc.speed_action(20.0), osc.trigger("StartTrigger", osc.time_condition(1.0)))]
    text = osc.scenario([osc.vehicle("Ego")], [osc.init_private("Ego", osc.lane_position(-1, 5.0), speed=10.0)],
                        stories=osc.story("Ghost", events), stop_trigger=osc.stop_after(5),
                        road="straight_road.xodr")
    path = corpus_dir / "bad_actor.xosc"
    path.write_text(text, encoding="utf-8")

    result = convert_file(path, tmp_path)
    assert (result.exit_code, result.error_code) == (EXIT_FAILURE, "validation_failed")
    assert "Ghost" in result.error


def test_malformed_input_reports_line(corpus_dir, tmp_path):
    path = corpus_dir / "broken.xosc"
    path.write_text("<OpenSCENARIO>\n  <FileHeader>\n</OpenSCENARIO>\n", encoding="utf-8")
    result = convert_file(path, tmp_path)
    assert (result.exit_code, result.error_code) == (EXIT_FAILURE, "malformed_xml")
    assert result.error.startswith(f"{path}:")


def test_shared_map_is_cached(corpus_dir, tmp_path):
    convert_file(corpus_dir / "SimpleOvertake.xosc", tmp_path)
    convert_file(corpus_dir / "LaneKeep.xosc", tmp_path)
    assert len(map_cache) == 1
    assert map_cache.hits == 1


# ---------------------------------------------------------------- inputs

def test_collect_inputs_skips_catalogs(corpus_dir):
    assert [p.name for p in collect_inputs([corpus_dir])] == sorted(CORPUS)


def test_collect_inputs_from_manifest(corpus_dir):
    manifest = corpus_dir / "selection.txt"
    manifest.write_text("# regression set\nSimpleOvertake.xosc\n\nLaneKeep.xosc  # catalog based\n")
    assert collect_inputs([manifest]) == sorted([corpus_dir / "LaneKeep.xosc", corpus_dir / "SimpleOvertake.xosc"])


def test_collect_inputs_needs_something(tmp_path):
    with pytest.raises(NoInputs):
        collect_inputs([tmp_path])
    with pytest.raises(NoInputs):
        collect_inputs([tmp_path / "missing"])


# ---------------------------------------------------------------- batch

def test_run_stats_exit_code():
    stats = RunStats()
    assert (stats.exit_code, stats.success_rate, stats.avg_conversion_time) == (0, 0.0, None)
    stats.add(ConversionResult("a.xosc", True, EXIT_OK, 1.0, 10.0))
    stats.add(ConversionResult("b.xosc", False, EXIT_USAGE, error="b.xosc: missing"))
    stats.add(ConversionResult("c.xosc", False, EXIT_FAILURE, error="c.xosc: broken"))
    assert stats.exit_code == EXIT_USAGE
    assert stats.success_rate == pytest.approx(1 / 3)
    assert stats.avg_scenario_duration == 10.0
    assert [line for line in summary_lines(stats) if line.startswith("FAILED")] == [
        "FAILED b.xosc: b.xosc: missing", "FAILED c.xosc: c.xosc: broken"]


@pytest.mark.corpus
def test_corpus_batch(corpus_dir, tmp_path, report_schema):
    stats = run_batch([corpus_dir], tmp_path / "out", jobs=1)
    assert stats.total == len(CORPUS)
    assert stats.success_rate == 1.0
    assert stats.exit_code == EXIT_OK
    assert sorted(p.name for p in (tmp_path / "out").glob("*.xml")) == sorted(
        name.replace(".xosc", ".xml") for name in CORPUS)

    report = tmp_path / "reports" / "run.json"
    write_report(stats, report)
    data = json.loads(report.read_text(encoding="utf-8"))
    jsonschema.validate(data, report_schema)
    assert data["summary"]["succeeded"] == len(CORPUS)
    assert [f["input_path"] for f in data["files"]] == sorted(f["input_path"] for f in data["files"])


@pytest.mark.corpus
def test_batch_survives_a_broken_file(corpus_dir, tmp_path, report_schema):
    (corpus_dir / "LaneKeep.xosc").write_text("<OpenSCENARIO>", encoding="utf-8")
    stats = run_batch([corpus_dir], tmp_path, jobs=1)
    assert (len(stats.successes), stats.total) == (len(CORPUS) - 1, len(CORPUS))
    assert stats.exit_code == EXIT_FAILURE
    (failed,) = [r for r in stats.files if not r.success]
    assert failed.input_path.endswith("LaneKeep.xosc")
    jsonschema.validate(json.loads(stats.to_json()), report_schema)


@pytest.mark.corpus
def test_parallel_batch_matches_sequential(corpus_dir, tmp_path):
    sequential = run_batch([corpus_dir], tmp_path / "seq", jobs=1)
    parallel = run_batch([corpus_dir], tmp_path / "par", jobs=3)
    assert parallel.success_rate == 1.0
    assert parallel.outputs_digest() == sequential.outputs_digest()
    for name in CORPUS:
        stem = name.replace(".xosc", ".xml")
        assert (tmp_path / "seq" / stem).read_bytes() == (tmp_path / "par" / stem).read_bytes()


# ---------------------------------------------------------------- cli

def test_cli_convert(corpus_dir, tmp_path):
    code = main.main(["convert", str(corpus_dir / "SimpleOvertake.xosc"), "--output-dir", str(tmp_path),
                      "--render", "--dt-cr", "0.2"])
    assert code == EXIT_OK
    assert (tmp_path / "SimpleOvertake.svg").is_file()
    assert read_scenario(tmp_path / "SimpleOvertake.xml").metadata.dt == 0.2


def test_cli_param_and_ego(corpus_dir, tmp_path):
    code = main.main(["convert", str(corpus_dir / "SimpleOvertake.xosc"), "--output-dir", str(tmp_path),
                      "--param", "SpeedB=10", "--ego", "B"])
    assert code == EXIT_OK
    problem = read_scenario(tmp_path / "SimpleOvertake.xml").planning_problem
    assert problem.initial_state.velocity == pytest.approx(10.0)


@pytest.mark.parametrize("argv", [
    ["convert", "does/not/exist.xosc"],
    ["convert", "scenarios/SimpleOvertake.xosc", "--param", "SpeedA"],
    ["batch", "scenarios", "--jobs", "0"],
    ["convert"],
    ["explode"],
])
def test_cli_usage_errors(argv):
    assert main.main(argv) == EXIT_USAGE


def test_cli_batch_of_empty_directory(tmp_path):
    assert main.main(["batch", str(tmp_path)]) == EXIT_USAGE


def test_cli_missing_road_network(corpus_dir, tmp_path):
    (corpus_dir / "curved_road.xodr").unlink()
    assert main.main(["convert", str(corpus_dir / "CurvedRoad.xosc"), "--output-dir", str(tmp_path)]) == EXIT_USAGE


@pytest.mark.corpus
def test_cli_batch_report(corpus_dir, tmp_path, report_schema):
    report = tmp_path / "report.json"
    code = main.main(["batch", str(corpus_dir), "--output-dir", str(tmp_path / "out"),
                      "--report", str(report), "--jobs", "1"])
    assert code == EXIT_OK
    jsonschema.validate(json.loads(report.read_text(encoding="utf-8")), report_schema)
