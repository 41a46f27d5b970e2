"""Tests for the command line, exit statuses and written artifacts."""

import pytest

from morsepi.cli import build_parser, exit_status, main
from morsepi.exceptions import (
    PatchDiscError,
    RegularityError,
    ScenarioError,
    TransversalityError,
    ValidationError,
)
from morsepi.relations.oracle_compare import INJECTIVE, SURJECTIVE, WELL_DEFINED, Verdict
from morsepi.report import EXIT_OK, EXIT_REGULARITY, EXIT_USAGE, EXIT_VERDICT, PipelineReport, OracleWalk


def failing_verdict() -> Verdict:
    return Verdict(
        passed=False,
        checks={WELL_DEFINED: True, SURJECTIVE: True, INJECTIVE: False},
        failing=INJECTIVE,
        partial=False,
        group="generic, abelianization Z + Z",
        details={"abelianization": "Z + Z vs Z"},
    )


def test_parser_defaults(tmp_path):
    """Test flag parsing."""
    args = build_parser().parse_args(["pi1", "--scenario", str(tmp_path / "a.scn"), "--max-rel-len", "3"])

    assert args.subcommand == "pi1"
    assert args.max_rel_len == 3
    assert args.map == "identity"
    assert args.no_type2 is False


def test_missing_scenario_exits_1(tmp_path):
    """Test that a missing scenario file is a usage error."""
    assert main(["pi1", "--scenario", str(tmp_path / "absent.scn")]) == EXIT_USAGE


@pytest.mark.parametrize(
    "argv",
    [
        ["bogus", "--scenario", "x.scn"],
        ["pi1"],
        ["critical", "--scenario", "x.scn", "--grid", "0"],
        ["critical", "--scenario", "x.scn", "--seed", "-1"],
        ["push", "--scenario", "x.scn", "--map", "warp"],
    ],
)
def test_bad_arguments_exit_1(argv):
    """Test that argument errors exit with status 1."""
    with pytest.raises(SystemExit) as excinfo:
        main(argv)
    assert excinfo.value.code == EXIT_USAGE


@pytest.mark.parametrize(
    ("error", "status"),
    [
        (ScenarioError("bad key", field="speed"), EXIT_USAGE),
        (ValidationError("bad value"), EXIT_USAGE),
        (RegularityError("margin", pair="star|c0", margin=0.0), EXIT_REGULARITY),
        (TransversalityError("corner", tau=0.5), EXIT_REGULARITY),
        (PatchDiscError("disc"), EXIT_REGULARITY),
    ],
)
def test_exit_status_mapping(error, status):
    """Test the error family to exit status table."""
    assert exit_status(error) == status


def test_regularity_failure_exits_2(mocker, circle_file):
    """Test that a regularity failure is reported with its diagnostic."""
    mocker.patch(
        "morsepi.cli.create_pipeline",
        side_effect=RegularityError("Transversality margin below 0.001", pair="star|c0", margin=1e-5),
    )

    assert main(["walk", "--scenario", str(circle_file)]) == EXIT_REGULARITY


def test_verdict_failure_exits_3(mocker, circle_file, tmp_path):
    """Test that a failed oracle verdict exits with status 3 after writing the report."""
    report = PipelineReport(scenario="circle", subcommand="pi1", verdict=failing_verdict())
    pipeline = mocker.Mock()
    pipeline.run = mocker.AsyncMock(return_value=report)
    pipeline.settings.output_dir = tmp_path / "out"
    create = mocker.patch("morsepi.cli.create_pipeline", return_value=pipeline)

    status = main(["pi1", "--scenario", str(circle_file), "--no-type2", "--seed", "4"])

    assert status == EXIT_VERDICT
    create.assert_called_once_with(circle_file, 4, None, None, None)
    pipeline.run.assert_awaited_once_with("pi1", include_type2=False)
    assert "failing: injective" in (tmp_path / "out" / "report.txt").read_text()


def test_push_passes_map_name(mocker, circle_file, tmp_path):
    """Test that push forwards the chosen map."""
    pipeline = mocker.Mock()
    pipeline.run = mocker.AsyncMock(return_value=PipelineReport(scenario="circle", subcommand="push"))
    pipeline.settings.output_dir = tmp_path
    mocker.patch("morsepi.cli.create_pipeline", return_value=pipeline)

    assert main(["push", "--scenario", str(circle_file), "--map", "double-cover"]) == EXIT_OK
    pipeline.run.assert_awaited_once_with("push", map_name="double-cover")


def test_report_exit_status_and_artifacts(mocker, tmp_path):
    """Test report sections, exit statuses and the files written."""
    transcript = mocker.Mock()
    transcript.dump.return_value = "corner 0\n"
    good = OracleWalk("oracle_1", transcript, theta=(1,), loop_class=(1,), theta_class=(1,))
    bad = OracleWalk("oracle_2", transcript, theta=(2,), loop_class=(1,), theta_class=(-1,))

    report = PipelineReport(scenario="circle", subcommand="walk", walks=[good], timings={"walk": 0.5})
    assert report.exit_status == EXIT_OK
    written = report.write(tmp_path)

    assert (tmp_path / "report.txt").read_text().startswith("# morsepi walk report for circle")
    assert (tmp_path / "walks" / "oracle_1.txt").read_text() == "corner 0\ntheta: g1\n"
    assert (tmp_path / "timing.txt").read_text() == "walk: 0.500s\n"
    assert "0.500" not in (tmp_path / "report.txt").read_text()
    assert tmp_path / "timing.txt" in written

    mismatch = PipelineReport(scenario="circle", subcommand="walk", walks=[good, bad])
    assert mismatch.exit_status == EXIT_VERDICT
    assert "MISMATCH" in mismatch.text()


def test_critical_run_end_to_end(circle_file, tmp_path):
    """Test the critical subcommand on the stabilized circle."""
    out = tmp_path / "artifacts"
    status = main(["critical", "--scenario", str(circle_file), "--out", str(out), "--grid", "16"])

    assert status == EXIT_OK
    report = (out / "report.txt").read_text()
    assert "c0: index 0" in report
    assert "c1: index 1" in report
    assert "alternating count 0, euler characteristic 0: holds" in report
    assert (out / "timing.txt").exists()
