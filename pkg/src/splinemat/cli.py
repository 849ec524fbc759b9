"""Command-line front end.

Commands: decompose | approximate | project | invert | bench | selftest.
Exit codes: 0 success, 1 usage error, 2 input error, 3 verification failure.

Curve files are JSON: a single {"degree", "knots", "control_points"} object,
a bare list of them, or {"curves": [...]}.  Point files are JSON
({"points": [[...], ...]} or a bare list) or CSV with one point per row.
Projection results are written as JSON lines in query order.
"""

import argparse
import csv
import io
import json
import os
import subprocess
import sys
import time

import numpy as np

from . import __version__
from ._accel import backend_name
from ._fixtures import random_queries
from ._kernels import _newton_quartic_block, _quartic_block
from .core import BSplineCurve, GeometryError, validate_curve
from .decompose import decompose_to_bezier
from .oracle import oracle_project_batch
from .project import prepare_curve, project_prepared
from .reduce_approx import approximate_error_controlled
from .selftest import run_selftest

USAGE_ERROR, INPUT_ERROR, VERIFY_ERROR = 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error: {message}\n")
        raise SystemExit(USAGE_ERROR)


class InputError(Exception):
    pass


def _load_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror or exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc


def _curve_from_dict(obj, path, index=None):
    where = f"{path}" if index is None else f"{path} (curve {index})"
    try:
        curve = BSplineCurve(int(obj["degree"]), obj["knots"], obj["control_points"])
        return validate_curve(curve)
    except KeyError as exc:
        raise InputError(f"{where}: missing field {exc}") from exc
    except (GeometryError, TypeError, ValueError) as exc:
        raise InputError(f"{where}: {exc}") from exc


def read_curves(path):
    """Returns (curves, was_single_object)."""
    data = _load_json(path)
    if isinstance(data, dict) and "curves" in data:
        data = data["curves"]
    if isinstance(data, dict):
        return [_curve_from_dict(data, path)], True
    if isinstance(data, list):
        return [_curve_from_dict(obj, path, i) for i, obj in enumerate(data)], False
    raise InputError(f"{path}: expected a curve object or list of curves")


def read_points(path):
    if path.endswith(".csv"):
        rows = []
        try:
            with open(path, newline="") as fh:
                for lineno, row in enumerate(csv.reader(fh), start=1):
                    if not row:
                        continue
                    try:
                        rows.append([float(x) for x in row])
                    except ValueError:
                        if lineno == 1:
                            continue  # header row
                        raise InputError(f"{path}: line {lineno}: not numeric")
        except OSError as exc:
            raise InputError(f"{path}: {exc.strerror or exc}") from exc
        if not rows:
            raise InputError(f"{path}: no points found")
        return np.asarray(rows, dtype=np.float64)
    data = _load_json(path)
    if isinstance(data, dict):
        data = data.get("points")
    if not isinstance(data, list) or not data:
        raise InputError(f"{path}: expected a nonempty point list")
    return np.asarray(data, dtype=np.float64)


def _segment_dict(seg):
    return {
        "degree": seg.degree,
        "control_points": seg.control_points.tolist(),
        "source_interval": list(seg.source_interval),
    }


def _cubic_dict(c):
    return {
        "control_points": c.control_points.tolist(),
        "source_interval": list(c.source_interval),
        "measured_error": c.measured_error,
    }


def _write_text(out, text):
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w") as fh:
            fh.write(text)


def cmd_decompose(args):
    curves, single = read_curves(args.curve_file)
    payloads = [{"segments": [_segment_dict(s) for s in decompose_to_bezier(c)]}
                for c in curves]
    doc = payloads[0] if single else payloads
    _write_text(args.out, json.dumps(doc, indent=2) + "\n")
    return 0


def cmd_approximate(args):
    curves, single = read_curves(args.curve_file)
    payloads = []
    for curve in curves:
        cubics = approximate_error_controlled(decompose_to_bezier(curve), args.tolerance)
        payloads.append({"cubics": [_cubic_dict(c) for c in cubics]})
    doc = payloads[0] if single else payloads
    _write_text(args.out, json.dumps(doc, indent=2) + "\n")
    return 0


def _run_projection(args):
    curves, _ = read_curves(args.curve_file)
    if len(curves) != 1:
        raise InputError("project/invert expect exactly one curve")
    curve = curves[0]
    queries = read_points(args.points_file)
    if queries.ndim != 2 or queries.shape[1] != curve.dimension:
        raise InputError(f"points must be {curve.dimension}D for this curve")
    prep = prepare_curve(curve, args.tolerance)
    t, foot, dist, cand = project_prepared(prep, queries, workers=args.workers)
    return curve, queries, t, foot, dist, cand


def cmd_project(args):
    curve, queries, t, foot, dist, _ = _run_projection(args)
    verify_fail = False
    oracle_d = None
    if args.verify:
        _, oracle_d, res = oracle_project_batch(curve, queries)
        bound = args.tolerance + res + 1e-9
    lines = []
    for i in range(len(queries)):
        rec = {"query_index": i, "t_star": t[i], "foot": foot[i].tolist(),
               "distance": dist[i]}
        if oracle_d is not None:
            rec["oracle_distance"] = oracle_d[i]
            rec["disagreement"] = abs(dist[i] - oracle_d[i])
            if rec["disagreement"] > bound:
                verify_fail = True
        lines.append(json.dumps(rec))
    _write_text(args.out, "\n".join(lines) + "\n")
    return VERIFY_ERROR if verify_fail else 0


def cmd_invert(args):
    curve, queries, t, foot, dist, _ = _run_projection(args)
    failures = 0
    oracle_d = None
    verify_fail = False
    if args.verify:
        _, oracle_d, res = oracle_project_batch(curve, queries)
        bound = args.tolerance + res + 1e-9
    lines = []
    for i in range(len(queries)):
        rec = {"query_index": i, "t_star": t[i], "distance": dist[i]}
        if dist[i] > 10.0 * args.tolerance:
            rec["error"] = "point not on curve"
            failures += 1
        if oracle_d is not None:
            rec["oracle_distance"] = oracle_d[i]
            rec["disagreement"] = abs(dist[i] - oracle_d[i])
            if rec["disagreement"] > bound:
                verify_fail = True
        lines.append(json.dumps(rec))
    _write_text(args.out, "\n".join(lines) + "\n")
    if failures:
        return INPUT_ERROR
    return VERIFY_ERROR if verify_fail else 0


def _bench_rows(curve, n_points, workers, repeats, seed):
    rows = []
    rng = np.random.default_rng(seed)
    queries = random_queries(rng, n_points, curve.dimension)
    backend = backend_name()
    # warm the jit so the first repeat measures the algorithm, not compilation
    warm = prepare_curve(curve, 1e-4)
    project_prepared(warm, queries[: min(8, n_points)], workers=workers)
    for _ in range(repeats):
        t0 = time.perf_counter()
        segments = decompose_to_bezier(curve)
        t1 = time.perf_counter()
        cubics = approximate_error_controlled(segments, 1e-4)
        t2 = time.perf_counter()
        prep = prepare_curve(curve, 1e-4)
        t2b = time.perf_counter()
        project_prepared(prep, queries, workers=workers)
        t3 = time.perf_counter()
        stage_times = {
            "decompose": t1 - t0,
            "approximate": t2 - t1,
            "monotonic+project": t3 - t2b,
        }
        stage_times["total"] = sum(stage_times.values())
        for stage, dt in stage_times.items():
            rows.append([stage, f"{dt * 1e3:.3f}", f"{dt * 1e6 / n_points:.4f}",
                         workers, backend])
        del cubics
    return rows


def _bench_quartic_rows(repeats, seed):
    rng = np.random.default_rng(seed)
    n = 10000
    coeffs = rng.uniform(-1.0, 1.0, (n, 5))
    roots = np.zeros((n, 4))
    counts = np.zeros(n, dtype=np.int64)
    _quartic_block(coeffs[:8], roots[:8], counts[:8])  # warm the jit
    _newton_quartic_block(coeffs[:8], roots[:8], counts[:8])
    rows = []
    ratios = []
    backend = backend_name()
    for _ in range(repeats):
        t0 = time.perf_counter()
        _quartic_block(coeffs, roots, counts)
        t1 = time.perf_counter()
        _newton_quartic_block(coeffs, roots, counts)
        t2 = time.perf_counter()
        rows.append(["quartic_closed_form", f"{(t1 - t0) * 1e3:.3f}",
                     f"{(t1 - t0) * 1e6 / n:.4f}", 1, backend])
        rows.append(["quartic_newton", f"{(t2 - t1) * 1e3:.3f}",
                     f"{(t2 - t1) * 1e6 / n:.4f}", 1, backend])
        ratios.append((t2 - t1) / max(t1 - t0, 1e-12))
    return rows, float(np.mean(ratios))


def cmd_bench(args):
    if args.points < 1:
        raise InputError("--points must be >= 1")
    curves, _ = read_curves(args.curve_file)
    if len(curves) != 1:
        raise InputError("bench expects exactly one curve")
    curve = curves[0]
    rows = _bench_rows(curve, args.points, args.workers, args.repeats, args.seed)
    qrows, ratio = _bench_quartic_rows(args.repeats, args.seed)
    rows += qrows
    if args.compare_backends:
        other = "0" if backend_name() == "numba" else "1"
        env = dict(os.environ, SPLINEMAT_NUMBA=other)
        cmd = [sys.executable, "-m", "splinemat.cli", "bench", args.curve_file,
               "--points", str(args.points), "--workers", str(args.workers),
               "--repeats", str(args.repeats), "--seed", str(args.seed)]
        proc = subprocess.run(cmd, env=env, capture_output=True, text=True)
        if proc.returncode != 0:
            raise InputError(f"backend comparison run failed: {proc.stderr.strip()}")
        for line in proc.stdout.splitlines()[1:]:
            if line.strip():
                rows.append(line.split(","))
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["stage", "total_ms", "avg_us_per_point", "workers", "backend"])
    writer.writerows(rows)
    _write_text(args.out, buf.getvalue())
    sys.stderr.write(f"closed-form vs Newton quartic speed ratio: {ratio:.2f}x\n")
    return 0


def cmd_selftest(args):
    ok, lines = run_selftest()
    print("\n".join(lines))
    print("selftest:", "PASS" if ok else "FAIL")
    return 0 if ok else VERIFY_ERROR


def build_parser():
    parser = _Parser(prog="splinemat",
                     description="Matrix-form B-spline decomposition and batch projection")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    pd = sub.add_parser("decompose", help="B-spline to piecewise Bezier segments")
    pd.add_argument("curve_file")
    pd.add_argument("--out", default=None)
    pd.set_defaults(func=cmd_decompose)

    pa = sub.add_parser("approximate", help="error-controlled cubic approximation")
    pa.add_argument("curve_file")
    pa.add_argument("--tolerance", type=float, default=1e-4)
    pa.add_argument("--out", default=None)
    pa.set_defaults(func=cmd_approximate)

    for name, fn in (("project", cmd_project), ("invert", cmd_invert)):
        pp = sub.add_parser(name, help=f"{name} points against a curve")
        pp.add_argument("curve_file")
        pp.add_argument("points_file")
        pp.add_argument("--tolerance", type=float, default=1e-4)
        pp.add_argument("--workers", type=int, default=os.cpu_count() or 1)
        pp.add_argument("--verify", action="store_true",
                        help="append dense-oracle disagreement per query")
        pp.add_argument("--out", default=None)
        pp.set_defaults(func=fn)

    pb = sub.add_parser("bench", help="stage timings as CSV")
    pb.add_argument("curve_file")
    pb.add_argument("--points", type=int, default=10000)
    pb.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    pb.add_argument("--repeats", type=int, default=3)
    pb.add_argument("--seed", type=int, default=0)
    pb.add_argument("--compare-backends", action="store_true",
                    help="also run the other (numba/numpy) lane in a subprocess")
    pb.add_argument("--out", default=None)
    pb.set_defaults(func=cmd_bench)

    ps = sub.add_parser("selftest", help="built-in invariant suites")
    ps.set_defaults(func=cmd_selftest)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else USAGE_ERROR
    try:
        return args.func(args)
    except InputError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return INPUT_ERROR
    except GeometryError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return INPUT_ERROR


if __name__ == "__main__":
    sys.exit(main())
