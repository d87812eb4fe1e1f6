"""Command-line front end.

    zqh solve|metric|verify|bench|gen [--model FILE | --family F --dim M --seed S]
        [--kappa2 FILE|"1,1,..."] [--out DIR] [--dense-cap N] [--tol-* X] [--json]

Exit codes: 0 all checks pass, 1 a check failed, 2 usage or input error,
3 internal error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, bench
from .core import Orientation, build
from .errors import BadFamilyParam, SchemaError, ValidationError, ZqhError
from .metric import (
    MetricParams,
    metric_banded,
    metric_closed_form,
    metric_from_sum,
    positive_definiteness,
    quasi_hermiticity_residual,
)
from .models import ModelInstance, generate, load, save
from .spectral import eigenvectors_unit_diagonal
from .verify import (
    DEFAULT_TOLS,
    Check,
    InstanceResult,
    Stopwatch,
    _run,
    _skip,
    build_report,
    relative_eigen_residual,
    verify_instance,
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_INTERNAL = 0, 1, 2, 3
REPORT_NAME = "report.json"


class UsageError(Exception):
    pass


def _default_seed() -> int:
    raw = os.environ.get("ZQH_SEED", "0")
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"ZQH_SEED must be an integer, got {raw!r}") from None


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    src = common.add_argument_group("instance selection")
    src.add_argument("--model", help="model file (verify also accepts a directory of model files)")
    src.add_argument("--family", help="generator family: uniform, equidistant, near-degenerate:GAP, zero-odd-coupling")
    src.add_argument("--dim", type=int, help="number of levels M")
    src.add_argument("--seed", type=int, help="generator seed (default: $ZQH_SEED or 0)")
    src.add_argument("--orientation", choices=("zzm", "tzzm"), default="zzm")
    common.add_argument("--kappa2", help='metric parameters: a file or a literal like "1,1,1"')
    common.add_argument("--out", help="output directory")
    common.add_argument("--dense-cap", type=int, default=256, help="largest M for dense O(M^3) work")
    common.add_argument("--tol-eigen", type=float, default=DEFAULT_TOLS["eigen"])
    common.add_argument("--tol-metric", type=float, default=DEFAULT_TOLS["metric"])
    common.add_argument("--tol-qh", type=float, default=DEFAULT_TOLS["qh"])
    common.add_argument("--json", action="store_true", help="print the report as JSON")

    p = argparse.ArgumentParser(prog="zqh", description="Zig-zag matrix quasi-Hermitian toolkit")
    p.add_argument("--version", action="version", version=f"zqh {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("solve", parents=[common], help="closed-form eigensystem")
    sub.add_parser("metric", parents=[common], help="metric decomposition and checks")
    sub.add_parser("verify", parents=[common], help="full invariant suite")
    b = sub.add_parser("bench", parents=[common], help="closed-form versus dense timings")
    b.add_argument("--dims", default=",".join(map(str, bench.DEFAULT_DIMS)))
    b.add_argument("--repetitions", type=int, default=5)
    g = sub.add_parser("gen", parents=[common], help="write generated model files")
    g.add_argument("--count", type=int, default=1, help="number of consecutive seeds")
    return p


def _tols(args) -> dict:
    return {"eigen": args.tol_eigen, "metric": args.tol_metric, "qh": args.tol_qh}


def _generated(args, seed=None) -> ModelInstance:
    if args.family is None or args.dim is None:
        raise UsageError("give --model FILE or both --family and --dim")
    seed = (_default_seed() if args.seed is None else args.seed) if seed is None else seed
    return generate(args.family, args.dim, seed, args.orientation)


def _instances(args, allow_dir=False) -> list[ModelInstance]:
    if args.model is not None:
        path = Path(args.model)
        if path.is_dir():
            if not allow_dir:
                raise UsageError(f"{path} is a directory")
            files = sorted(f for f in path.glob("*.json") if f.name != REPORT_NAME)
            if not files:
                raise UsageError(f"no *.json model files in {path}")
            return [load(f) for f in files]
        return [load(path)]
    return [_generated(args)]


def _kappa2(args, m: ModelInstance) -> MetricParams:
    if args.kappa2 is None:
        return m.metric_params()
    src = args.kappa2
    path = Path(src)
    if path.is_file():
        text = path.read_text()
        try:
            doc = json.loads(text)
        except json.JSONDecodeError:
            values = [float(t) for t in text.replace(",", " ").split()]
        else:
            values = doc.get("kappa2") if isinstance(doc, dict) else doc
            if values is None:
                raise SchemaError("file has no kappa2 field", "kappa2")
    else:
        try:
            values = [float(t) for t in src.split(",") if t.strip()]
        except ValueError:
            raise UsageError(f"cannot parse --kappa2 {src!r}") from None
    values = np.asarray(values, dtype=np.float64)
    if values.size != m.dim:
        raise UsageError(f"--kappa2 has {values.size} entries, model has M = {m.dim}")
    try:
        return MetricParams(values)
    except ZqhError as exc:
        raise ValidationError(str(exc)) from exc


def _out_dir(args) -> Path | None:
    if args.out is None:
        return None
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _triplets(z) -> list[list]:
    """Structural entries ``(row, col, value)`` with 1-based indices."""
    n = z.dim
    diag_entries = [[i + 1, i + 1, float(v)] for i, v in enumerate(z.diag)]
    low = np.arange(n - 1) % 2 == 0
    if z.orientation is Orientation.TZZM:
        low = ~low
    off = [
        [i + 2, i + 1, float(v)] if lo else [i + 1, i + 2, float(v)]
        for i, (v, lo) in enumerate(zip(z.off, low))
    ]
    return sorted(diag_entries + off)


def _write_triplets(path: Path, triplets) -> None:
    with path.open("w") as fh:
        fh.write("row\tcol\tvalue\n")
        for r, c, v in triplets:
            fh.write(f"{r}\t{c}\t{v!r}\n")


def cmd_solve(args) -> dict:
    out = _out_dir(args)
    results = []
    for m in _instances(args):
        res = InstanceResult(m)
        clock = Stopwatch()
        H = m.hamiltonian
        system = {}

        def solve():
            system["s"] = eigenvectors_unit_diagonal(H)
            return relative_eigen_residual(H, system["s"].vectors, H.dim <= args.dense_cap)

        with clock.stage("solve"):
            _run(res.checks, "eigen_residual", args.tol_eigen, solve)
        res.outputs["eigenvalues"] = H.diag.tolist()
        if "s" in system:
            trip = _triplets(system["s"].vectors)
            if out is not None:
                path = out / f"{m.name}.eigvec.tsv"
                _write_triplets(path, trip)
                res.outputs["eigenvector_file"] = str(path)
            else:
                res.outputs["eigenvectors"] = trip
        res.timings = clock.stages
        results.append(res)
    return build_report("solve", args.argv, results)


def _dense_triplets(A: np.ndarray) -> list[list]:
    r, c = np.nonzero(A)
    return [[int(i) + 1, int(j) + 1, float(A[i, j])] for i, j in zip(r, c)]


def cmd_metric(args) -> dict:
    out = _out_dir(args)
    results = []
    for m in _instances(args):
        res = InstanceResult(m)
        clock = Stopwatch()
        H = build(m.a, m.c, Orientation.ZZM)
        p = _kappa2(args, m)
        warnings = p.warnings()
        if warnings:
            res.outputs["warnings"] = warnings
        dense = H.dim <= args.dense_cap
        got = {}

        def closed():
            if dense:
                got["dec"] = metric_closed_form(H, p)
            else:
                got["band"] = metric_banded(H, p)
            return 0.0

        with clock.stage("metric"):
            _run(res.checks, "metric_closed_form", 0.0, closed)
        if "dec" in got:
            dec = got["dec"]
            theta = dec.assembled
            with clock.stage("checks"):
                _run(res.checks, "metric_equivalence", args.tol_metric,
                     lambda: np.linalg.norm(theta - metric_from_sum(H, p)) / np.linalg.norm(theta))
                _run(res.checks, "quasi_hermiticity", args.tol_qh,
                     lambda: quasi_hermiticity_residual(H, theta) / (H.frobenius_norm() * np.linalg.norm(theta)))
                def positivity():
                    positive_definiteness(theta)
                    return 0.0

                _run(res.checks, "positivity_cholesky", 0.0, positivity)
            doc = {
                "dim": H.dim,
                "kappa2": p.kappa2.tolist(),
                "diag": _dense_triplets(dec.diag_part),
                "tridiag": _dense_triplets(dec.tridiag_part),
                "pentadiag": _dense_triplets(dec.pentadiag_part),
                "assembled": _dense_triplets(theta),
            }
        elif "band" in got:
            for name in ("metric_equivalence", "quasi_hermiticity", "positivity_cholesky"):
                _skip(res.checks, name, 0.0, f"M > dense cap {args.dense_cap}")
            band = got["band"]
            doc = {
                "dim": H.dim,
                "kappa2": p.kappa2.tolist(),
                "band": {"diag": band[0].tolist(), "upper1": band[1, :-1].tolist(), "upper2": band[2, :-2].tolist()},
            }
        else:
            doc = None
        if doc is not None:
            if out is not None:
                path = out / f"{m.name}.metric.json"
                path.write_text(json.dumps(doc, indent=1) + "\n")
                res.outputs["metric_file"] = str(path)
            else:
                res.outputs["metric"] = doc
        res.timings = clock.stages
        results.append(res)
    return build_report("metric", args.argv, results)


def cmd_verify(args) -> dict:
    tols = _tols(args)
    results = [verify_instance(m, tols, args.dense_cap) for m in _instances(args, allow_dir=True)]
    return build_report("verify", args.argv, results)


def cmd_bench(args) -> dict:
    try:
        dims = [int(t) for t in args.dims.split(",") if t.strip()]
    except ValueError:
        raise UsageError(f"bad --dims {args.dims!r}") from None
    if not dims or min(dims) < 1:
        raise UsageError("--dims needs positive integers")
    seed = _default_seed() if args.seed is None else args.seed
    t0 = time.perf_counter()
    rows = bench.run_bench(dims, args.repetitions, args.dense_cap, seed)
    checks = []
    g_dense = bench.growth(rows, "dense_inverse", 64, 256)
    g_closed = bench.growth(rows, "closed_form_pipeline", 64, 256)
    if g_dense is not None:
        checks.append(Check("dense_inverse_growth_64_to_256", g_dense, 50.0, ">="))
    if g_closed is not None:
        checks.append(Check("closed_form_growth_64_to_256", g_closed, 8.0, "<="))
    big = [r for r in rows if r["op"] == "closed_form_pipeline" and r["M"] == 100000]
    if big:
        checks.append(Check("closed_form_seconds_at_1e5", big[0]["nanos_median"] / 1e9, 1.0, "<="))
    report = {
        "tool": "zqh",
        "version": __version__,
        "command": "bench",
        "argv": list(args.argv),
        "checks": [c.to_dict() for c in checks],
        "summary": {"checks": len(checks), "failed": sum(not c.passed for c in checks),
                    "passed": all(c.passed for c in checks)},
        "rows": rows,
        "timings": {"total": time.perf_counter() - t0},
    }
    out = _out_dir(args)
    csv_text = bench.rows_to_csv(rows)
    if out is not None:
        (out / "bench.csv").write_text(csv_text)
        report["csv_file"] = str(out / "bench.csv")
    elif not args.json:
        sys.stdout.write(csv_text)
    return report


def cmd_gen(args) -> dict:
    if args.family is None or args.dim is None:
        raise UsageError("gen needs --family and --dim")
    if args.count < 1:
        raise UsageError("--count must be >= 1")
    base = _default_seed() if args.seed is None else args.seed
    models = [_generated(args, base + i) for i in range(args.count)]
    out = _out_dir(args)
    files = []
    for m in models:
        if out is not None:
            files.append(str(save(m, out / f"{m.name}.json")))
    report = {
        "tool": "zqh",
        "version": __version__,
        "command": "gen",
        "argv": list(args.argv),
        "summary": {"passed": True, "instances": len(models)},
    }
    if out is not None:
        report["files"] = files
    else:
        report["models"] = [m.to_dict() for m in models]
    return report


COMMANDS = {
    "solve": cmd_solve,
    "metric": cmd_metric,
    "verify": cmd_verify,
    "bench": cmd_bench,
    "gen": cmd_gen,
}


def _print_text(report: dict) -> None:
    for inst in report.get("instances", []):
        ident = inst["instance"]
        print(f"{ident['name']}  M={ident['dim']}  hash={ident['hash']}")
        for c in inst["checks"]:
            val = "-" if c["value"] is None else f"{c['value']:.3e}"
            extra = c.get("error") or c.get("note") or ""
            print(f"  {c['status']:4}  {c['name']:<30} {val:>10} {c['op']} {c['tol']:.1e}  {extra}")
    for c in report.get("checks", []):
        print(f"  {c['status']:4}  {c['name']:<30} {c['value']:.4g} {c['op']} {c['tol']:g}")
    s = report.get("summary", {})
    if "failed" in s:
        print(f"{'PASS' if s['passed'] else 'FAIL'}: {s['failed']} failed of {s.get('checks', 0)} checks")


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    args.argv = argv
    try:
        report = COMMANDS[args.command](args)
    except (UsageError, SchemaError, ValidationError, BadFamilyParam, OSError) as exc:
        print(f"zqh: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # noqa: BLE001 - reported as internal error
        print(f"zqh: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    out = getattr(args, "out", None)
    if out is not None:
        Path(out).mkdir(parents=True, exist_ok=True)
        Path(out, REPORT_NAME).write_text(json.dumps(report, indent=2) + "\n")
    if args.json:
        print(json.dumps(report, indent=2))
    elif args.command != "bench" or out is not None:
        _print_text(report)
    return EXIT_OK if report["summary"]["passed"] else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
