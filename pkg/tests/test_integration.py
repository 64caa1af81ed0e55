"""End-to-end runs of the bundled presets through the same path the CLI takes"""

import json
from pathlib import Path

import pytest
from typer.testing import CliRunner

from torusdef.config import load_preset
from torusdef.main import app, run


@pytest.fixture
def runner() -> CliRunner:
    return CliRunner()


@pytest.mark.parametrize(
    "preset, headline",
    [
        ("q2_split_torus", "R^□ ≅ O[Z/2][[x1,x2]]; components: 2"),
        ("q3_split_torus", "R^□ ≅ O[[x1,x2]]; components: 1"),
        ("q2_quadratic_norm_one", "R^□ ≅ O[Z/2][[x1,x2]]; components: 2"),
    ],
)
def test_local_presets(preset: str, headline: str) -> None:
    report = run(load_preset(preset))
    assert report.status == "ok", report.failures
    assert headline in report.headlines


def test_quadratic_norm_one_descriptors() -> None:
    report = run(load_preset("q2_quadratic_norm_one"))
    rendered = {d.name: d.render() for d in report.descriptors}
    assert rendered == {
        "R^□": "O[Z/2][[x1,x2]]",
        "R^ps": "O[Z/2][[x1]]",
        "A^gen": "O[Z/2][[x1]][t1^±1]",
    }
    assert report.relations == ["R^□ ≅ R^ps[[t1]]", "A^gen ≅ R^ps[t1^±1]"]
    assert "r=1, s=1, m=2, μ^Δ=Z/2" in report.headlines


def test_worked_model_oracle_counts() -> None:
    report = run(load_preset("z8_worked"))
    assert report.status == "ok", report.failures
    tallies = {t.modulus: t for t in report.oracle}
    assert tallies[3].units == "Z/2"
    assert (tallies[3].z1, tallies[3].homs, tallies[3].orbits) == (2, 2, 2)
    assert tallies[5].units == "Z/4"
    assert (tallies[5].z1, tallies[5].homs, tallies[5].h1_classes) == (4, 4, 4)
    assert tallies[5].characters == 4


def test_quaternion_model_oracle_agrees() -> None:
    report = run(load_preset("q8_sign"))
    assert report.status == "ok", report.failures
    assert len(report.oracle) == 2
    for tally in report.oracle:
        assert tally.agree
        assert tally.z1 == tally.homs
        assert tally.h1_classes == tally.orbits


def test_components_preset() -> None:
    report = run(load_preset("components_2_4"))
    assert report.components is not None
    assert report.components.count == 8
    assert report.components.is_regular()


def test_report_round_trip_through_cli(tmp_path: Path, runner: CliRunner) -> None:
    out = tmp_path / "local.json"
    result = runner.invoke(app, ["local", "--preset", "q2_quadratic_norm_one", "--out", str(out)])
    assert result.exit_code == 0
    data = json.loads(out.read_text())
    assert data["schema_version"] == "1"
    assert data["inputs"]["p"] == 2
    names = [q["name"] for q in data["quantities"]]
    assert "μ^Δ" in names
    assert data["components"]["mu"] == [2]
