import csv
import json

import numpy as np
import pytest

from splinemat import eval_de_boor_many
from splinemat.cli import main, read_curves, read_points
from splinemat.selftest import run_selftest
from splinemat._fixtures import random_clamped_curve


@pytest.fixture()
def curve_file(tmp_path):
    rng = np.random.default_rng(0)
    c = random_clamped_curve(rng, 4, 9, 2)
    path = tmp_path / "curve.json"
    path.write_text(json.dumps({
        "degree": c.degree,
        "knots": c.knots.knots.tolist(),
        "control_points": c.control_points.tolist(),
    }))
    return path, c


def run_cli(args):
    return main([str(a) for a in args])


class TestIO:
    def test_curve_roundtrip(self, curve_file):
        path, c = curve_file
        curves, single = read_curves(str(path))
        assert single
        assert np.array_equal(curves[0].control_points, c.control_points)
        assert np.array_equal(curves[0].knots.knots, c.knots.knots)

    def test_points_json_and_csv(self, tmp_path):
        pts = [[0.1, 0.2], [0.3, 0.4]]
        jpath = tmp_path / "p.json"
        jpath.write_text(json.dumps({"points": pts}))
        assert np.allclose(read_points(str(jpath)), pts)
        cpath = tmp_path / "p.csv"
        cpath.write_text("x,y\n0.1,0.2\n0.3,0.4\n")
        assert np.allclose(read_points(str(cpath)), pts)

    def test_malformed_json_reports_position(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text('{"degree": 3, "knots": [0, 0,,]}')
        code = run_cli(["decompose", bad])
        assert code == 2
        err = capsys.readouterr().err
        assert "line" in err and "column" in err


class TestDecomposeCommand:
    def test_single_curve(self, curve_file, tmp_path):
        path, c = curve_file
        out = tmp_path / "segs.json"
        assert run_cli(["decompose", path, "--out", out]) == 0
        doc = json.loads(out.read_text())
        assert len(doc["segments"]) == len(c.span_indices())
        seg = doc["segments"][0]
        assert seg["degree"] == 4
        assert len(seg["control_points"]) == 5

    def test_batch_preserves_order(self, tmp_path):
        rng = np.random.default_rng(1)
        curves = [random_clamped_curve(rng, 3, n, 2) for n in (5, 7, 9)]
        path = tmp_path / "batch.json"
        path.write_text(json.dumps([{
            "degree": c.degree,
            "knots": c.knots.knots.tolist(),
            "control_points": c.control_points.tolist(),
        } for c in curves]))
        out = tmp_path / "out.json"
        assert run_cli(["decompose", path, "--out", out]) == 0
        doc = json.loads(out.read_text())
        assert [len(item["segments"]) for item in doc] == \
            [len(c.span_indices()) for c in curves]

    def test_usage_error_exit_code(self):
        assert run_cli(["decompose"]) == 1

    def test_missing_file_exit_code(self, capsys):
        assert run_cli(["decompose", "/nonexistent/curve.json"]) == 2


class TestApproximateCommand:
    def test_cubics_written(self, curve_file, tmp_path):
        path, _ = curve_file
        out = tmp_path / "cubics.json"
        assert run_cli(["approximate", path, "--tolerance", "1e-4",
                        "--out", out]) == 0
        doc = json.loads(out.read_text())
        assert doc["cubics"]
        for cub in doc["cubics"]:
            assert len(cub["control_points"]) == 4
            assert cub["measured_error"] <= 1e-4


class TestProjectCommand:
    def test_records_in_input_order(self, curve_file, tmp_path):
        path, c = curve_file
        pts = tmp_path / "pts.json"
        rng = np.random.default_rng(2)
        pts.write_text(json.dumps({"points": rng.uniform(0, 1, (20, 2)).tolist()}))
        out = tmp_path / "res.jsonl"
        assert run_cli(["project", path, pts, "--out", out]) == 0
        recs = [json.loads(line) for line in out.read_text().splitlines()]
        assert [r["query_index"] for r in recs] == list(range(20))
        assert all(set(r) >= {"t_star", "foot", "distance"} for r in recs)

    def test_worker_count_output_identical(self, curve_file, tmp_path):
        path, _ = curve_file
        pts = tmp_path / "pts.json"
        rng = np.random.default_rng(3)
        pts.write_text(json.dumps({"points": rng.uniform(0, 1, (50, 2)).tolist()}))
        out1 = tmp_path / "w1.jsonl"
        out8 = tmp_path / "w8.jsonl"
        assert run_cli(["project", path, pts, "--workers", 1, "--out", out1]) == 0
        assert run_cli(["project", path, pts, "--workers", 8, "--out", out8]) == 0
        assert out1.read_bytes() == out8.read_bytes()

    def test_verify_appends_disagreement(self, curve_file, tmp_path):
        path, _ = curve_file
        pts = tmp_path / "pts.json"
        rng = np.random.default_rng(4)
        pts.write_text(json.dumps({"points": rng.uniform(0, 1, (5, 2)).tolist()}))
        out = tmp_path / "res.jsonl"
        assert run_cli(["project", path, pts, "--verify", "--out", out]) == 0
        recs = [json.loads(line) for line in out.read_text().splitlines()]
        assert all("oracle_distance" in r and "disagreement" in r for r in recs)

    def test_dimension_mismatch_input_error(self, curve_file, tmp_path):
        path, _ = curve_file
        pts = tmp_path / "pts.json"
        pts.write_text(json.dumps({"points": [[0.1, 0.2, 0.3]]}))
        assert run_cli(["project", path, pts]) == 2


class TestInvertCommand:
    def test_on_curve_fixture(self, curve_file, tmp_path):
        path, c = curve_file
        rng = np.random.default_rng(5)
        lo, hi = c.domain
        ts = rng.uniform(lo, hi, 10)
        pts = tmp_path / "onc.json"
        pts.write_text(json.dumps({"points": eval_de_boor_many(c, ts).tolist()}))
        out = tmp_path / "inv.jsonl"
        assert run_cli(["invert", path, pts, "--out", out]) == 0
        recs = [json.loads(line) for line in out.read_text().splitlines()]
        for rec, t_true in zip(recs, ts):
            assert abs(rec["t_star"] - t_true) <= 5e-4

    def test_off_curve_point_flagged(self, curve_file, tmp_path):
        path, _ = curve_file
        pts = tmp_path / "off.json"
        pts.write_text(json.dumps({"points": [[9.0, 9.0]]}))
        out = tmp_path / "inv.jsonl"
        assert run_cli(["invert", path, pts, "--out", out]) == 2
        rec = json.loads(out.read_text().splitlines()[0])
        assert rec["error"] == "point not on curve"


class TestBenchCommand:
    def test_rows_per_configuration(self, curve_file, tmp_path):
        path, _ = curve_file
        out = tmp_path / "bench.csv"
        assert run_cli(["bench", path, "--points", 200, "--repeats", 2,
                        "--out", out]) == 0
        rows = list(csv.reader(out.read_text().splitlines()))
        assert rows[0] == ["stage", "total_ms", "avg_us_per_point", "workers", "backend"]
        stages = [r[0] for r in rows[1:]]
        for stage in ("decompose", "approximate", "monotonic+project", "total",
                      "quartic_closed_form", "quartic_newton"):
            assert stages.count(stage) == 2

    def test_seeded_queries_reproducible(self):
        from splinemat._fixtures import random_queries
        a = random_queries(np.random.default_rng(42), 100, 3)
        b = random_queries(np.random.default_rng(42), 100, 3)
        assert np.array_equal(a, b)


class TestSelftest:
    def test_clean_run_passes(self):
        ok, lines = run_selftest()
        assert ok, "\n".join(lines)
        assert len(lines) == 5
        assert all("max_residual" in line for line in lines)

    def test_corrupted_bernstein_table_detected(self):
        def corrupt(B):
            B = np.array(B)
            B[0, 0] += 1e-3
            return B

        ok, lines = run_selftest(corrupt_bernstein=corrupt)
        assert not ok
        assert any(line.startswith("FAIL bernstein_inverse") for line in lines)

    def test_cli_exit_code(self, capsys):
        assert run_cli(["selftest"]) == 0
