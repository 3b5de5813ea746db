"""Command-line contract: CSV schema, exit codes, determinism, presets."""

import json
import math
import subprocess
import sys

import pytest
from click.testing import CliRunner

from mapbound.cli import main
from mapbound.errors import NumericError


@pytest.fixture()
def runner():
    return CliRunner()


def run_ok(runner, args):
    res = runner.invoke(main, args)
    assert res.exit_code == 0, res.output
    return res.output


def parse_csv(text):
    lines = text.strip().split("\n")
    assert lines[0] == "# schema=1"
    header = lines[1].split(",")
    rows = [line.split(",") for line in lines[2:]]
    return header, rows


class TestBoundsCommand:
    def test_reference_segments_row(self, runner):
        out = run_ok(runner, ["bounds", "--preset", "map1", "--w", "1",
                              "--dx", "1", "--sigma", "3", "--js", "12"])
        header, rows = parse_csv(out)
        assert header == ["family", "axis", "value_m2", "sqrt_value_m",
                          "diagnostics"]
        by_family = {r[0]: r for r in rows}
        assert set(by_family) == {"bcrb", "ezzb", "wwb"}
        b = by_family["bcrb"]
        assert b[1] == "x"
        assert float(b[2]) == pytest.approx(0.08257, abs=5e-6)
        assert float(b[3]) == pytest.approx(0.2873, abs=5e-5)
        assert "h_opt=" in by_family["wwb"][4]

    def test_two_axes_for_planar_maps(self, runner):
        out = run_ok(runner, ["bounds", "--preset", "map2", "--sigma", "3"])
        _, rows = parse_csv(out)
        assert len(rows) == 6
        assert [r[1] for r in rows] == ["x", "y"] * 3

    def test_family_selection(self, runner):
        out = run_ok(runner, ["bounds", "--preset", "map1", "--sigma", "3",
                              "--bounds", "ezzb"])
        _, rows = parse_csv(out)
        assert [r[0] for r in rows] == ["ezzb"]

    def test_values_round_trip_at_15_digits(self, runner):
        out = run_ok(runner, ["bounds", "--preset", "map2", "--sigma-x", "1.7",
                              "--sigma-y", "0.4"])
        _, rows = parse_csv(out)
        for row in rows:
            for cell in row[2:4]:
                assert f"{float(cell):.15g}" == cell

    def test_anisotropic_noise_breaks_symmetry(self, runner):
        out = run_ok(runner, ["bounds", "--preset", "map2", "--sigma-x", "1",
                              "--sigma-y", "5"])
        _, rows = parse_csv(out)
        bx, by = (float(r[2]) for r in rows[:2])
        assert bx < by


class TestSimulateCommand:
    def test_row_shape(self, runner):
        out = run_ok(runner, ["simulate", "--preset", "map1", "--sigma", "3",
                              "--estimator", "ml", "--runs", "500",
                              "--seed", "3"])
        header, rows = parse_csv(out)
        assert header[:4] == ["estimator", "model", "n_runs", "seed"]
        assert len(rows) == 1
        row = dict(zip(header, rows[0]))
        assert row["estimator"] == "ml"
        assert row["n_runs"] == "500" and row["seed"] == "3"
        assert float(row["rmse_x_m"]) == pytest.approx(3.0, abs=0.4)
        assert row["rmse_y_m"] == ""  # 1-D support has no second axis

    def test_ranging_on_floor(self, runner):
        out = run_ok(runner, ["simulate", "--preset", "floor", "--model",
                              "ranging", "--estimator", "map", "--sigma", "2",
                              "--runs", "100", "--seed", "5"])
        header, rows = parse_csv(out)
        row = dict(zip(header, rows[0]))
        assert row["model"] == "ranging"
        assert float(row["rmse_total_m"]) > 0.0
        assert math.hypot(float(row["rmse_x_m"]), float(row["rmse_y_m"])) == (
            pytest.approx(float(row["rmse_total_m"]), rel=1e-12)
        )

    def test_explicit_anchor_list(self, runner):
        out = run_ok(runner, ["simulate", "--preset", "map2", "--model",
                              "ranging", "--estimator", "map", "--sigma", "1",
                              "--anchors", "0,0;10,0;10,10;0,10",
                              "--runs", "50", "--seed", "5"])
        _, rows = parse_csv(out)
        assert len(rows) == 1


class TestExitCodes:
    def test_missing_map_file(self, runner):
        res = runner.invoke(main, ["bounds", "--map", "does_not_exist.json",
                                   "--sigma", "3"])
        assert res.exit_code == 2
        assert "map file not found" in res.output

    def test_zero_runs(self, runner):
        res = runner.invoke(main, ["simulate", "--preset", "map1",
                                   "--sigma", "3", "--runs", "0"])
        assert res.exit_code == 2

    def test_nonpositive_sigma(self, runner):
        res = runner.invoke(main, ["bounds", "--preset", "map1",
                                   "--sigma", "-1"])
        assert res.exit_code == 2
        assert "sigma" in res.output

    def test_sigma_required(self, runner):
        res = runner.invoke(main, ["bounds", "--preset", "map1"])
        assert res.exit_code == 2
        assert "sigma" in res.output

    def test_map_and_preset_conflict(self, runner, tmp_path):
        p = tmp_path / "m.json"
        p.write_text('{"unit": "m", "segments": [[0, 1]]}')
        res = runner.invoke(main, ["bounds", "--map", str(p), "--preset",
                                   "map1", "--sigma", "3"])
        assert res.exit_code == 2

    def test_unknown_sweep_param(self, runner):
        res = runner.invoke(main, ["sweep", "--preset", "map1", "--param",
                                   "zeta", "--values", "1,2", "--runs", "5"])
        assert res.exit_code == 2

    def test_numeric_failure_maps_to_3(self, runner, monkeypatch):
        import mapbound.cli as cli_mod

        def boom(*a, **k):
            raise NumericError("quadrature stalled")

        monkeypatch.setattr(cli_mod, "ezzb_1d", boom)
        res = runner.invoke(main, ["bounds", "--preset", "map1",
                                   "--sigma", "3"])
        assert res.exit_code == 3

    def test_malformed_values_spec(self, runner):
        res = runner.invoke(main, ["sweep", "--preset", "map1", "--param",
                                   "dx", "--values", "1:2", "--runs", "5"])
        assert res.exit_code == 2

    def test_corrupt_map_json(self, runner, tmp_path):
        p = tmp_path / "broken.json"
        p.write_text("{broken")
        res = runner.invoke(main, ["bounds", "--map", str(p), "--sigma", "3"])
        assert res.exit_code == 2
        assert "not valid JSON" in res.output

    @pytest.mark.parametrize("val", ["0", "nan", "inf"])
    def test_degenerate_sigma(self, runner, val):
        res = runner.invoke(main, ["bounds", "--preset", "map1",
                                   "--sigma", val])
        assert res.exit_code == 2
        assert "positive and finite" in res.output

    def test_zero_sigma_y(self, runner):
        res = runner.invoke(main, ["bounds", "--preset", "map2",
                                   "--sigma-x", "1", "--sigma-y", "0"])
        assert res.exit_code == 2
        assert "sigma-y" in res.output

    @pytest.mark.parametrize("spec", ["", ",,", "5:1:1"])
    def test_values_with_no_entries(self, runner, spec):
        res = runner.invoke(main, ["sweep", "--preset", "map1", "--param",
                                   "dx", "--values", spec, "--runs", "5"])
        assert res.exit_code == 2
        assert "no values" in res.output


class TestSweepCommand:
    def test_generic_1d_columns(self, runner):
        out = run_ok(runner, ["sweep", "--preset", "map1", "--param", "dx",
                              "--values", "1,5", "--estimators", "mmse,ml",
                              "--runs", "200", "--seed", "6"])
        header, rows = parse_csv(out)
        assert header[:2] == ["param", "value"]
        for name in ("bcrb_m2", "sqrt_ezzb_m", "wwb_h_opt_m",
                     "rmse_mmse_m", "stderr_ml_m"):
            assert name in header
        assert len(rows) == 2
        assert rows[0][0] == "dx" and float(rows[0][1]) == 1.0

    def test_colon_values_inclusive(self, runner):
        out = run_ok(runner, ["sweep", "--preset", "map1", "--param", "dx",
                              "--values", "1:1:3", "--runs", "20",
                              "--seed", "6"])
        _, rows = parse_csv(out)
        assert [float(r[1]) for r in rows] == [1.0, 2.0, 3.0]

    def test_rerun_identical_bytes(self, runner, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        args = ["sweep", "--preset", "map1", "--param", "sigma", "--values",
                "1,3", "--runs", "300", "--seed", "42"]
        run_ok(runner, args + ["-o", str(a)])
        run_ok(runner, args + ["-o", str(b)])
        assert a.read_bytes() == b.read_bytes()

    def test_ranging_sweep_leaves_bound_columns_empty(self, runner):
        out = run_ok(runner, ["sweep", "--preset", "map2", "--param", "sigma",
                              "--values", "1", "--model", "ranging",
                              "--estimators", "map", "--runs", "30",
                              "--seed", "2"])
        header, rows = parse_csv(out)
        row = dict(zip(header, rows[0]))
        assert row["bcrb_x_m2"] == "" and row["sqrt_trace_wwb_m"] == ""
        assert float(row["rmse_map_total_m"]) > 0.0


class TestFigurePresets:
    def test_figure_4_rows_and_columns(self, runner):
        out = run_ok(runner, ["sweep", "--figure", "4", "--runs", "40",
                              "--seed", "2"])
        header, rows = parse_csv(out)
        assert len(rows) == 13
        assert rows[0][0] == "rho"
        for e in ("mmse", "map", "ml"):
            assert f"rmse_{e}_m" in header

    def test_figure_5_covers_dx_grid(self, runner):
        out = run_ok(runner, ["sweep", "--figure", "5", "--runs", "40",
                              "--seed", "2"])
        _, rows = parse_csv(out)
        assert len(rows) == 62
        assert float(rows[-1][1]) == 30.0

    def test_figure_6_is_nested_grid(self, runner):
        out = run_ok(runner, ["sweep", "--figure", "6", "--runs", "20",
                              "--seed", "2"])
        header, rows = parse_csv(out)
        assert header[0] == "w_m"
        assert len(rows) == 18 * 24
        assert len({r[0] for r in rows}) == 18

    def test_figure_7_has_per_axis_bounds(self, runner):
        out = run_ok(runner, ["sweep", "--figure", "7", "--runs", "40",
                              "--seed", "2"])
        header, rows = parse_csv(out)
        assert len(rows) == 30
        for name in ("bcrb_x_m2", "bcrb_y_m2", "ezzb_y_m2",
                     "rmse_mmse_total_m"):
            assert name in header

    def test_figure_8_compares_models(self, runner):
        out = run_ok(runner, ["sweep", "--figure", "8", "--runs", "40",
                              "--seed", "2"])
        header, rows = parse_csv(out)
        assert len(rows) == 6
        assert header[0] == "sigma_m"
        for name in ("rmse_map_gaussian_m", "rmse_map_ranging_m",
                     "rmse_map_ranging_bbox_m", "sqrt_trace_ezzb_m"):
            assert name in header
        assert [float(r[0]) for r in rows] == [1.0, 2.0, 3.0, 4.0, 5.0, 6.0]


class TestPresetsCommand:
    def test_map1_file(self, runner, tmp_path):
        p = tmp_path / "m1.json"
        run_ok(runner, ["presets", "map1", "-o", str(p)])
        doc = json.loads(p.read_text())
        assert doc["unit"] == "m"
        assert doc["segments"] == [[0.0, 1.0], [2.0, 3.0]]

    def test_map2_file_round_trips(self, runner, tmp_path):
        p = tmp_path / "m2.json"
        run_ok(runner, ["presets", "map2", "-o", str(p)])
        doc = json.loads(p.read_text())
        area = sum(r["w"] * r["h"] for r in doc["rects"])
        assert area == pytest.approx(75.0)
        out = run_ok(runner, ["bounds", "--map", str(p), "--sigma", "3"])
        ref = run_ok(runner, ["bounds", "--preset", "map2", "--sigma", "3"])
        assert out == ref

    def test_floor_variants(self, runner, tmp_path):
        full, box = tmp_path / "f.json", tmp_path / "b.json"
        run_ok(runner, ["presets", "floor", "-o", str(full)])
        run_ok(runner, ["presets", "floor", "--bounding-box", "-o", str(box)])
        fdoc, bdoc = json.loads(full.read_text()), json.loads(box.read_text())
        assert len(fdoc["rects"]) == 6
        assert len(bdoc["rects"]) == 1
        assert bdoc["rects"][0]["w"] == 30.0 and bdoc["rects"][0]["h"] == 20.0

    def test_invalid_dimensions(self, runner, tmp_path):
        res = runner.invoke(main, ["presets", "map1", "--w", "0",
                                   "-o", str(tmp_path / "x.json")])
        assert res.exit_code == 2


class TestEntryPoint:
    def test_installed_script(self, tmp_path):
        out = subprocess.run(
            [sys.executable, "-m", "mapbound.cli", "bounds", "--preset",
             "map1", "--sigma", "3"],
            capture_output=True, text=True,
        )
        assert out.returncode == 0
        assert out.stdout.startswith("# schema=1\n")

    def test_plot_script_companion(self, runner, tmp_path):
        csv_p, plot_p = tmp_path / "s.csv", tmp_path / "s.py"
        run_ok(runner, ["sweep", "--preset", "map1", "--param", "sigma",
                        "--values", "1,2", "--runs", "20", "--seed", "1",
                        "-o", str(csv_p), "--plot-script", str(plot_p)])
        body = plot_p.read_text()
        assert "matplotlib" in body and str(csv_p) in body
