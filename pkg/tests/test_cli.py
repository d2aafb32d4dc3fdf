from __future__ import annotations

import json

import pytest

from pact import bundled_scenario_path
from pact.cli import main


@pytest.fixture(scope="module")
def scenario_file():
    return str(bundled_scenario_path("table1"))


def run_cli(*argv) -> int:
    return main(list(argv))


class TestExitCodes:
    def test_qos_ok(self, scenario_file, tmp_path, capsys):
        assert run_cli("qos", "-c", scenario_file, "-o", str(tmp_path)) == 0
        out = capsys.readouterr().out
        assert "calibration" in out
        assert (tmp_path / "qos.csv").exists()

    def test_solve_ok(self, scenario_file, tmp_path):
        assert run_cli("solve", "-c", scenario_file, "-o", str(tmp_path)) == 0
        assert (tmp_path / "menu.csv").exists()

    def test_validation_failure_is_one(self, tmp_path, capsys):
        bad = tmp_path / "bad.scenario"
        bad.write_text(json.dumps({"services": [], "types": {}}))
        assert run_cli("qos", "-c", str(bad), "-o", str(tmp_path)) == 1
        assert "error:" in capsys.readouterr().err

    def test_unparsable_scenario_is_one(self, tmp_path):
        bad = tmp_path / "bad.scenario"
        bad.write_text("{oops")
        assert run_cli("solve", "-c", str(bad), "-o", str(tmp_path)) == 1

    def test_usage_error_is_one(self, capsys):
        assert run_cli("solve") == 1
        assert run_cli("frobnicate") == 1

    def test_verify_feasible_is_zero(self, scenario_file, tmp_path):
        run_cli("solve", "-c", scenario_file, "-o", str(tmp_path))
        assert run_cli(
            "verify", "-c", scenario_file, "-m", str(tmp_path / "menu.csv")
        ) == 0

    def test_verify_infeasible_is_two(self, scenario_file, tmp_path, capsys):
        menu = tmp_path / "menu.csv"
        # flat-priced menu where the bottom type cannot afford its item
        menu.write_text("type_index,q,p\n" + "".join(
            f"{i},{0.05 * i:.3f},5.0\n" for i in range(1, 16)
        ))
        assert run_cli("verify", "-c", scenario_file, "-m", str(menu)) == 2
        assert "participation violated" in capsys.readouterr().out

    def test_simulate_ok(self, scenario_file, tmp_path):
        run_cli("solve", "-c", scenario_file, "-o", str(tmp_path))
        code = run_cli(
            "simulate", "-c", scenario_file, "-m", str(tmp_path / "menu.csv"),
            "-n", "5000", "--seed", "11", "-o", str(tmp_path),
        )
        assert code == 0
        assert (tmp_path / "sim.csv").exists()

    def test_simulate_infeasible_is_two(self, scenario_file, tmp_path):
        menu = tmp_path / "menu.csv"
        menu.write_text("type_index,q,p\n" + "".join(
            f"{i},{0.05 * i:.3f},5.0\n" for i in range(1, 16)
        ))
        code = run_cli(
            "simulate", "-c", scenario_file, "-m", str(menu),
            "-n", "100", "--seed", "1", "-o", str(tmp_path),
        )
        assert code == 2

    def test_sweep_ok(self, scenario_file, tmp_path):
        code = run_cli(
            "sweep-liability", "-c", scenario_file,
            "--multipliers", "0,0.5,1,1.5", "-o", str(tmp_path),
        )
        assert code == 0
        lines = (tmp_path / "sweep.csv").read_text().strip().split("\n")
        assert len(lines) == 5

    def test_bad_multipliers_is_one(self, scenario_file, tmp_path):
        code = run_cli(
            "sweep-liability", "-c", scenario_file,
            "--multipliers", "0,banana", "-o", str(tmp_path),
        )
        assert code == 1


class TestDeterminism:
    def test_repeat_runs_are_byte_identical(self, scenario_file, tmp_path):
        one, two = tmp_path / "one", tmp_path / "two"
        for out in (one, two):
            assert run_cli("qos", "-c", scenario_file, "-o", str(out)) == 0
            assert run_cli("solve", "-c", scenario_file, "-o", str(out)) == 0
            assert run_cli(
                "sweep-liability", "-c", scenario_file,
                "--multipliers", "0,1", "-o", str(out),
            ) == 0
            assert run_cli(
                "simulate", "-c", scenario_file, "-m", str(out / "menu.csv"),
                "-n", "20000", "--seed", "77", "-o", str(out),
            ) == 0
        for name in ("qos.csv", "menu.csv", "sweep.csv", "sim.csv"):
            assert (one / name).read_bytes() == (two / name).read_bytes()


class TestModes:
    def test_first_best_mode(self, scenario_file, tmp_path, capsys):
        assert run_cli(
            "solve", "-c", scenario_file, "--mode", "first-best", "-o", str(tmp_path)
        ) == 0
        out = capsys.readouterr().out
        assert "mode=first-best" in out
        assert "mean_user_utility=0" in out

    def test_no_liability_flag_changes_nothing_when_disabled(
        self, scenario_file, tmp_path
    ):
        # the bundled scenario has liability disabled, so the flag is a no-op
        a, b = tmp_path / "a", tmp_path / "b"
        run_cli("solve", "-c", scenario_file, "-o", str(a))
        run_cli("solve", "-c", scenario_file, "--no-liability", "-o", str(b))
        assert (a / "menu.csv").read_bytes() == (b / "menu.csv").read_bytes()

    def test_no_liability_flag_overrides_enabled_scenario(
        self, scenario_file, tmp_path
    ):
        doc = json.loads(open(scenario_file).read())
        doc["liability_enabled"] = True
        enabled = tmp_path / "enabled.scenario"
        enabled.write_text(json.dumps(doc))
        a, b, c = tmp_path / "a", tmp_path / "b", tmp_path / "c"
        run_cli("solve", "-c", str(enabled), "-o", str(a))
        run_cli("solve", "-c", str(enabled), "--no-liability", "-o", str(b))
        run_cli("solve", "-c", scenario_file, "-o", str(c))
        assert (a / "menu.csv").read_bytes() != (b / "menu.csv").read_bytes()
        assert (b / "menu.csv").read_bytes() == (c / "menu.csv").read_bytes()
