"""Tests for scenario parsing, settings overrides and the component factory."""

import numpy as np
import pytest

from morsepi.config import Settings
from morsepi.exceptions import ScenarioError
from morsepi.factory import apply_overrides, create_data
from morsepi.flowfield.scenario import load_scenario, parse_scenario

from tests.conftest import CIRCLE_TEXT


def test_parse_circle():
    """Test parsing of scalar keys with comments and defaults."""
    scenario = parse_scenario(CIRCLE_TEXT, name="circle")

    assert scenario.name == "circle"
    assert scenario.manifold == "circle"
    assert scenario.base_point == [1.2]
    assert scenario.f_terms == "cos(theta)"
    assert scenario.seed == 7
    assert scenario.nplus == 1 and scenario.nminus == 1
    assert scenario.aux_offset == pytest.approx(0.02)
    assert scenario.grid is None
    assert scenario.perturbations == []


def test_parse_perturbations():
    """Test vector and twist perturbation lines."""
    text = CIRCLE_TEXT + (
        "perturbation 1: 0.5, 0.1, 0.0 ; 0.4 ; 0.0, 1.0, 0.0\n"
        "twist 0: 1.5708, 0, 0 ; 0.9 ; 3.5  # fold\n"
    )
    scenario = parse_scenario(text)
    vector, twist = scenario.perturbations

    assert vector.kind == "vector" and vector.index == 1
    assert vector.center == [0.5, 0.1, 0.0]
    assert vector.vector == [0.0, 1.0, 0.0]
    assert twist.kind == "twist" and twist.rate == pytest.approx(3.5)
    assert twist.radius == pytest.approx(0.9)


@pytest.mark.parametrize(
    ("text", "field", "line"),
    [
        ("manifold = circle\nf_terms = cos(theta)\nspeed = 3\n", "speed", 3),
        ("manifold = circle\nmanifold = torus\nf_terms = cos(theta)\n", "manifold", 2),
        ("manifold = circle\nf_terms = cos(theta)\nbase_point = a, b\n", "base_point", 3),
        ("manifold = circle\nf_terms = cos(theta)\ntwist 0: 1, 0, 0 ; 0.5\n", "twist", 3),
        ("manifold = circle\nf_terms = cos(theta)\nperturbation x: 1, 0, 0 ; 0.5 ; 1, 0, 0\n", "perturbation", 3),
    ],
)
def test_parse_errors_name_the_line(text, field, line):
    """Test that parse errors carry the offending key and line."""
    with pytest.raises(ScenarioError) as excinfo:
        parse_scenario(text)

    assert excinfo.value.field == field
    assert excinfo.value.line == line
    assert excinfo.value.error_code == "SCENARIO_ERROR"


def test_missing_required_keys():
    """Test that manifold and f_terms are required."""
    with pytest.raises(ScenarioError):
        parse_scenario("manifold = circle\n")


def test_out_of_range_values():
    """Test pydantic validation of scenario values."""
    with pytest.raises(ScenarioError) as excinfo:
        parse_scenario(CIRCLE_TEXT + "aux_offset = 0.3\n")
    assert excinfo.value.field == "aux_offset"

    with pytest.raises(ScenarioError):
        parse_scenario(CIRCLE_TEXT + "nplus = -1\n")


def test_load_missing_file(tmp_path):
    """Test that an unreadable scenario raises ScenarioError."""
    with pytest.raises(ScenarioError) as excinfo:
        load_scenario(tmp_path / "absent.scn")
    assert "absent.scn" in excinfo.value.details["path"]


def test_bundled_scenarios_parse(scenario_dir):
    """Test that every bundled scenario parses."""
    names = sorted(p.stem for p in scenario_dir.glob("*.scn"))
    assert names == ["circle_folded", "circle_product", "sphere", "torus"]
    for path in scenario_dir.glob("*.scn"):
        scenario = load_scenario(path)
        assert scenario.name == path.stem

    folded = load_scenario(scenario_dir / "circle_folded.scn")
    assert [p.kind for p in folded.perturbations] == ["twist"]


def test_overrides_prefer_command_line(tmp_path):
    """Test that flags beat scenario values, which beat settings."""
    scenario = parse_scenario(CIRCLE_TEXT + "grid = 24\nmax_rel_len = 3\n")
    settings = Settings(grid=48)

    from_scenario = apply_overrides(settings, scenario)
    assert from_scenario.grid == 24
    assert from_scenario.seed == 7
    assert from_scenario.relations.max_relator_length == 3

    from_flags = apply_overrides(settings, scenario, seed=1, grid=32, max_rel_len=2, output_dir=tmp_path)
    assert from_flags.grid == 32
    assert from_flags.seed == 1
    assert from_flags.relations.max_relator_length == 2
    assert from_flags.output_dir == tmp_path
    assert settings.grid == 48


def test_settings_reject_nonpositive_tolerances():
    """Test that configuration validators reject bad values."""
    from pydantic import ValidationError as PydanticValidationError

    from morsepi.config.settings import NumericsConfig, WalkConfig

    with pytest.raises(PydanticValidationError):
        NumericsConfig(rtol=0)
    with pytest.raises(PydanticValidationError):
        WalkConfig(regularity_margin=-1.0)


def test_settings_from_environment(monkeypatch):
    """Test nested settings read from prefixed environment variables."""
    monkeypatch.setenv("RELATIONS_MAX_RELATOR_LENGTH", "6")
    monkeypatch.setenv("OBSERVABILITY_LOG_FORMAT", "text")

    settings = Settings()
    assert settings.relations.max_relator_length == 6
    assert settings.observability.log_format == "text"
    assert settings.output_dir.is_absolute()


def test_create_data_for_circle():
    """Test that the stabilized circle passes the support and descent checks."""
    scenario = parse_scenario(CIRCLE_TEXT)
    data = create_data(scenario)

    assert data.model.name == "circle"
    assert data.state_dim == 3
    assert data.base_point == pytest.approx([1.2])
    assert data.value(data.state(np.array([0.0]))) == pytest.approx(1.0)
    assert data.value(data.state(np.array([1.0]), xp=0.5, xm=0.2)) == pytest.approx(np.cos(1.0) + 0.21)


def test_create_data_rejects_small_support():
    """Test that a support radius too small for the base term is refused."""
    scenario = parse_scenario(CIRCLE_TEXT.replace("support_radius = 3.0", "support_radius = 0.5"))
    with pytest.raises(ScenarioError) as excinfo:
        create_data(scenario)
    assert excinfo.value.field == "support_radius"


@pytest.mark.parametrize(
    "extra",
    [
        "nplus = 2\n",
        "perturbation 0: 1.0, 0.0 ; 0.3 ; 0.0, 1.0\n",
        "perturbation 0: 1.0, 2.5, 0.0 ; 0.8 ; 0.0, 1.0, 0.0\n",
    ],
)
def test_create_data_rejects_bad_fibers_and_perturbations(extra):
    """Test higher fibers, wrong perturbation dimensions and supports leaving the compact region."""
    with pytest.raises(ScenarioError):
        create_data(parse_scenario(CIRCLE_TEXT + extra))


def test_unknown_symbols_in_terms():
    """Test that f_terms may only use the model coordinates."""
    scenario = parse_scenario(CIRCLE_TEXT.replace("cos(theta)", "cos(phi)"))
    with pytest.raises(ScenarioError) as excinfo:
        create_data(scenario)
    assert excinfo.value.field == "f_terms"


def test_base_point_dimension_checked():
    """Test that the base point must match the model coordinates."""
    scenario = parse_scenario(CIRCLE_TEXT.replace("base_point = 1.2", "base_point = 1.2, 0.3"))
    with pytest.raises(ScenarioError) as excinfo:
        create_data(scenario)
    assert excinfo.value.field == "base_point"
