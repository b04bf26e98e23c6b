"""The command-line client: exit codes, JSON artifacts, determinism."""

import json

import pytest
from click.testing import CliRunner

from contactgeo.cli import main


@pytest.fixture()
def runner():
    return CliRunner()


def _write_doc(tmp_path, tasks=None):
    doc = {
        "chart": {"coords": ["x", "y", "z"], "domain": {}},
        "frame": [["1", "0", "-y/2"], ["0", "1", "x/2"]],
        "signature": [1, 1],
        "tasks": tasks or [],
    }
    path = tmp_path / "doc.json"
    path.write_text(json.dumps(doc), encoding="utf-8")
    return str(path)


class TestInvariantsCommand:
    def test_builtin_pass(self, runner):
        out = runner.invoke(main, ["invariants", "--builtin", "heisenberg3-riem"])
        assert out.exit_code == 0
        assert "kappa: 0" in out.output
        assert "[PASS]" in out.output

    def test_structure_document(self, runner, tmp_path):
        path = _write_doc(tmp_path)
        out = runner.invoke(main, ["invariants", "--structure", path])
        assert out.exit_code == 0

    def test_selector_required(self, runner):
        out = runner.invoke(main, ["invariants"])
        assert out.exit_code == 2

    def test_both_selectors_rejected(self, runner, tmp_path):
        path = _write_doc(tmp_path)
        out = runner.invoke(
            main,
            ["invariants", "--structure", path, "--builtin", "heisenberg3-riem"],
        )
        assert out.exit_code == 2

    def test_json_artifact_deterministic(self, runner, tmp_path):
        paths = []
        for k in range(2):
            target = tmp_path / f"report{k}.json"
            out = runner.invoke(
                main,
                [
                    "invariants",
                    "--builtin",
                    "twisted-heisenberg",
                    "--json",
                    str(target),
                ],
            )
            assert out.exit_code == 0
            paths.append(target.read_bytes())
        assert paths[0] == paths[1]
        data = json.loads(paths[0])
        assert data["task"] == "invariants"
        assert "timing_ms" not in data

    def test_timings_flag_keeps_timing(self, runner, tmp_path):
        target = tmp_path / "report.json"
        out = runner.invoke(
            main,
            [
                "invariants",
                "--builtin",
                "heisenberg3-riem",
                "--json",
                str(target),
                "--timings",
            ],
        )
        assert out.exit_code == 0
        assert "timing_ms" in json.loads(target.read_text())


class TestVerdictExitCodes:
    def test_failing_ew_returns_one(self, runner):
        out = runner.invoke(
            main,
            ["ew", "--builtin", "heisenberg3-lor", "--epsilon", "1/2", "--c", "2"],
        )
        assert out.exit_code == 1
        assert "[FAIL]" in out.output

    def test_passing_ew_returns_zero(self, runner):
        out = runner.invoke(
            main,
            ["ew", "--builtin", "heisenberg3-lor", "--epsilon", "1", "--c", "2"],
        )
        assert out.exit_code == 0

    def test_berger_family(self, runner):
        out = runner.invoke(
            main, ["ew", "--builtin", "berger-lorentz", "--epsilon", "1/2"]
        )
        assert out.exit_code == 0


class TestIsometryCommand:
    def test_translation(self, runner):
        out = runner.invoke(
            main,
            [
                "isometry",
                "--builtin",
                "heisenberg5-case1",
                "--translation",
                "1,2,0,0,3",
            ],
        )
        assert out.exit_code == 0

    def test_map_requires_inverse(self, runner):
        out = runner.invoke(
            main,
            ["isometry", "--builtin", "heisenberg3-riem", "--map", "x,y,z"],
        )
        assert out.exit_code == 2

    def test_custom_map(self, runner):
        out = runner.invoke(
            main,
            [
                "isometry",
                "--builtin",
                "heisenberg3-riem",
                "--map",
                "x+y,y,z",
                "--inverse",
                "x-y,y,z",
            ],
        )
        assert out.exit_code == 1


class TestLiftCommand:
    def test_spherical_base(self, runner):
        out = runner.invoke(
            main,
            [
                "lift",
                "--base-coords",
                "x,y",
                "--base-frame",
                "(1+x^2+y^2)/2,0;0,(1+x^2+y^2)/2",
                "--signature",
                "1,1",
                "--theta",
                "-2*y/(1+x^2+y^2),2*x/(1+x^2+y^2)",
            ],
        )
        assert out.exit_code == 0
        assert "base_curvature: 1" in out.output


class TestBatchCommand:
    def test_run_document(self, runner, tmp_path):
        path = _write_doc(
            tmp_path,
            tasks=[{"task": "invariants"}, {"task": "curvature", "c": "2"}],
        )
        out = runner.invoke(main, ["run", "--structure", path])
        assert out.exit_code == 0
        assert "task invariants [PASS]" in out.output
        assert "task curvature [PASS]" in out.output

    def test_document_without_tasks_rejected(self, runner, tmp_path):
        path = _write_doc(tmp_path)
        out = runner.invoke(main, ["run", "--structure", path])
        assert out.exit_code == 2

    def test_malformed_document(self, runner, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{not json", encoding="utf-8")
        out = runner.invoke(main, ["run", "--structure", str(path)])
        assert out.exit_code == 2


class TestSelftestCommand:
    def test_single_criterion(self, runner):
        out = runner.invoke(main, ["selftest", "--criteria", "1"])
        assert out.exit_code == 0
        assert "PASS criterion 1" in out.output

    def test_seed_override_keeps_verdicts(self, runner):
        for seed in ("7", "8", "9"):
            out = runner.invoke(
                main, ["selftest", "--criteria", "6", "--seed", seed]
            )
            assert out.exit_code == 0
            assert "PASS criterion 6" in out.output


class TestBuiltinsCommand:
    def test_listing(self, runner):
        out = runner.invoke(main, ["builtins"])
        assert out.exit_code == 0
        assert "hyperbolic-lift" in out.output
