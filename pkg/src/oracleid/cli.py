"""Command-line harness: class generation, identification runs, verification
suites, and bound sweeps.

Subcommands::

    oracleid gen    --kind hamming1 --n 3 [--seed S] [--output FILE]
    oracleid run    --class-file C.json (--x 010 | --all) [--engine ideal|quantum]
                    [--trials T] [--algorithm final|improved|basic] [--jobs J]
    oracleid verify --suite ordering|sdp|lp|all [--n N] [--m M] [--class-file C]
                    [--tolerance T]
    oracleid bounds --grid "N=4,8;M=4,16" [--output FILE]

Per-trace output is JSON lines (one object per run, then a summary object);
sweeps are CSV.  Every subcommand is deterministic given --seed, which
falls back to the ORACLEID_SEED environment variable, then to 0.  verify
and bounds exit nonzero when any check fails; run exits nonzero only on
hard errors (statistical misidentification by the quantum engine is
reported in the summary, not an error).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from . import bounds as bounds_mod
from . import sdp
from .bitstrings import BitString, ConceptClass, generate_class
from .identify import (
    PromiseViolation,
    run_final,
    run_halving_basic,
    run_halving_improved,
)
from .kernels import BACKEND
from .ordering import hegedus_ordering, verify_ordering

_ALGORITHMS = {
    "basic": run_halving_basic,
    "improved": run_halving_improved,
    "final": run_final,
}


@dataclass(frozen=True)
class ExperimentConfig:
    """Resolved run parameters, echoed verbatim into every report."""

    seed: int
    engine: str
    trials: int
    tolerance: float
    output: str | None
    class_source: str | None
    algorithm: str = "final"
    jobs: int = 1
    kernel_backend: str = BACKEND

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be positive")
        if self.tolerance <= 0:
            raise ValueError("tolerance must be positive")


def _default_seed() -> int:
    raw = os.environ.get("ORACLEID_SEED", "")
    try:
        return int(raw)
    except ValueError:
        return 0


def _emit(text: str, output: str | None) -> None:
    if output:
        with open(output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _json_line(payload: dict) -> str:
    return json.dumps(payload, sort_keys=True, separators=(",", ":"))


# ---------------------------------------------------------------- gen

def cmd_gen(args) -> int:
    cls = generate_class(
        args.kind,
        args.n,
        k=args.k,
        free_bits=args.free_bits,
        size=args.m,
        seed=args.seed,
    )
    _emit(cls.to_json() + "\n", args.output)
    return 0


# ---------------------------------------------------------------- run

def _run_rows(class_json: str, x_text: str, algorithm: str, engine: str,
              trials: int, seed: int) -> list[dict]:
    cls = ConceptClass.from_json(class_json)
    x = BitString.from_str(x_text)
    runner = _ALGORITHMS[algorithm]
    rows = []
    for trial in range(trials):
        trial_seed = np.random.SeedSequence((seed, x.value, trial))
        row: dict = {"trial": trial}
        try:
            trace = runner(cls, x, engine, seed=trial_seed)
            row.update(trace.to_dict())
            row["success"] = trace.identified == x
            row["error"] = None
        except PromiseViolation as exc:
            row.update({"x": x_text, "success": False, "error": str(exc)})
        rows.append(row)
    return rows


def cmd_run(args) -> int:
    cls = ConceptClass.load(args.class_file)
    if args.all:
        xs = [str(m) for m in cls.members]
    elif args.x:
        xs = [args.x]
    else:
        raise SystemExit("run needs --x or --all")

    config = ExperimentConfig(
        seed=args.seed,
        engine=args.engine,
        trials=args.trials,
        tolerance=1e-9,
        output=args.output,
        class_source=args.class_file,
        algorithm=args.algorithm,
        jobs=args.jobs,
    )
    jobs = [(cls.to_json(), x, args.algorithm, args.engine, args.trials, args.seed)
            for x in xs]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_run_rows_star, jobs))
    else:
        results = [_run_rows_star(job) for job in jobs]

    lines = []
    rows = [row for batch in results for row in batch]
    for row in rows:
        lines.append(_json_line(row))
    successes = sum(1 for row in rows if row["success"])
    raw = [row.get("raw_queries", 0) for row in rows if row["error"] is None]
    ideal = [row.get("ideal_cost", 0.0) for row in rows if row["error"] is None]
    summary = {
        "summary": True,
        "config": asdict(config),
        "runs": len(rows),
        "success_rate": successes / len(rows) if rows else 0.0,
        "mean_raw_queries": float(np.mean(raw)) if raw else 0.0,
        "mean_ideal_cost": float(np.mean(ideal)) if ideal else 0.0,
        "errors": sum(1 for row in rows if row["error"] is not None),
    }
    lines.append(_json_line(summary))
    _emit("\n".join(lines) + "\n", args.output)
    return 0


def _run_rows_star(job) -> list[dict]:
    return _run_rows(*job)


# ---------------------------------------------------------------- verify

def _verify_ordering_suite(n: int, tolerance: float, checks: list) -> None:
    base = [BitString(n, v) for v in range(1 << n)]
    worst = 0.0
    worst_order = None
    count = 0
    for mask in range(1, 1 << len(base)):
        subset = [base[i] for i in range(len(base)) if (mask >> i) & 1]
        order = hegedus_ordering(subset)
        ratio = verify_ordering(subset, order)
        if ratio >= worst:
            worst, worst_order = ratio, order
        count += 1
    checks.append({
        "check": f"ordering: every nonempty subset of {{0,1}}^{n} ({count} sets) "
                 f"prunes within the guarantee",
        "passed": worst <= 1.0 + tolerance,
        "detail": f"worst ratio {worst:.6f}",
        "worst_ordering": worst_order.to_dict() if worst_order else None,
    })


def _verify_sdp_suite(
    class_file: str | None, tolerance: float, checks: list, dump: bool = False
) -> None:
    if class_file:
        cls = ConceptClass.load(class_file)
    else:
        cls = generate_class("hamming1", 3)
    pipe = sdp.oracle_id_pipeline(cls)
    target = np.ones((cls.size, cls.size)) - np.eye(cls.size)
    violation = sdp.verify_feasible(target, pipe.solution)
    entry = {
        "check": f"sdp: identification solution feasible for J - I on {cls.size} members",
        "passed": violation <= tolerance,
        "detail": f"max violation {violation:.3e}",
        "matrix": "J - I",
        "max_violation": violation,
        "cost": {str(x): pipe.cost(x) for x in cls.members},
    }
    if dump:
        entry["vectors"] = {
            "u": pipe.solution.u.tolist(),
            "v": pipe.solution.v.tolist(),
        }
    checks.append(entry)
    for k, (sol, tgt) in enumerate(zip(pipe.stage_solutions, pipe.stage_targets), 1):
        v = sdp.verify_feasible(tgt, sol)
        checks.append({
            "check": f"sdp: stage {k} feasible for its refinement target",
            "passed": v <= tolerance,
            "detail": f"max violation {v:.3e}",
            "matrix": f"gram(f_{k-1}) - gram(f_{k})",
            "max_violation": v,
        })
    the8 = sdp.find_first_one_solution(6)
    cube = the8.domain
    ones = np.ones((len(cube), len(cube)))
    table = sdp.first_disagreement_table(
        ConceptClass(6, cube), tuple(range(6)), BitString.zeros(6), 6
    )
    from .bitstrings import gram_of_function

    v8 = sdp.verify_feasible(ones - gram_of_function(table).entries, the8)
    checks.append({
        "check": "sdp: first-disagreement solution feasible on the 6-bit cube",
        "passed": v8 <= tolerance,
        "detail": f"max violation {v8:.3e}",
        "matrix": "J - F (first disagreement, width 6)",
        "max_violation": v8,
    })


def _verify_lp_suite(n: int, m: int, tolerance: float, checks: list) -> None:
    cert = bounds_mod.check_dual_certificate(n, m, tol=tolerance)
    checks.append({
        "check": f"lp: dual certificate feasible at N={n}, m={m}",
        "passed": cert.feasible,
        "detail": f"min slack {cert.min_slack:.6f}",
    })
    primal = bounds_mod.lp_primal_opt(n, m)
    checks.append({
        "check": f"lp: weak duality (primal <= dual) at N={n}, m={m}",
        "passed": primal <= cert.dual_value + tolerance,
        "detail": f"primal {primal:.6f}, dual {cert.dual_value:.6f}",
    })
    if n <= 12:
        brute, _ = bounds_mod.brute_force_cost(1 << m, n)
        checks.append({
            "check": f"lp: exhaustive optimum <= primal at N={n}, M=2^{m}",
            "passed": brute <= primal + tolerance,
            "detail": f"brute {brute:.6f}, primal {primal:.6f}",
        })


def cmd_verify(args) -> int:
    checks: list[dict] = []
    if args.suite in ("ordering", "all"):
        _verify_ordering_suite(min(args.n, 4), args.tolerance, checks)
    if args.suite in ("sdp", "all"):
        _verify_sdp_suite(args.class_file, max(args.tolerance, 1e-9), checks,
                          dump=args.dump)
    if args.suite in ("lp", "all"):
        _verify_lp_suite(args.n if args.suite == "lp" else 8,
                         args.m, args.tolerance, checks)

    all_passed = all(c["passed"] for c in checks)
    for c in checks:
        status = "PASS" if c["passed"] else "FAIL"
        print(f"[{status}] {c['check']} ({c['detail']})")
    report = {
        "suite": args.suite,
        "passed": all_passed,
        "checks": checks,
        "config": {"n": args.n, "m": args.m, "tolerance": args.tolerance,
                   "class_file": args.class_file, "seed": args.seed},
    }
    if args.output:
        _emit(json.dumps(report, indent=2, sort_keys=True) + "\n", args.output)
    return 0 if all_passed else 1


# ---------------------------------------------------------------- bounds

def _parse_grid(text: str) -> tuple[list[int], list[int]]:
    ns: list[int] = []
    ms: list[int] = []
    if text.strip():
        for part in text.split(";"):
            key, _, values = part.partition("=")
            key = key.strip().upper()
            parsed = [int(v) for v in values.split(",") if v.strip()]
            if key == "N":
                ns = parsed
            elif key == "M":
                ms = parsed
            else:
                raise SystemExit(f"unknown grid axis {key!r}")
    return ns, ms


def cmd_bounds(args) -> int:
    ns, ms = _parse_grid(args.grid)
    cells = [(m, n) for n in ns for m in ms if 2 <= m <= (1 << n)]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            reports = list(pool.map(_report_star, cells))
    else:
        reports = [_report_star(cell) for cell in cells]
    lines = [bounds_mod.CSV_HEADER]
    lines += [rep.to_csv_row() for rep in reports]
    _emit("\n".join(lines) + "\n", args.output)
    ok = all(
        rep.brute_force_C <= rep.lp_primal + args.tolerance
        and rep.lp_primal <= rep.lp_dual + args.tolerance
        for rep in reports
    )
    return 0 if ok else 1


def _report_star(cell) -> bounds_mod.BoundReport:
    return bounds_mod.build_report(*cell)


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="oracleid",
        description="identification-problem laboratory (kernel backend: " + BACKEND + ")",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate a concept-class JSON file")
    gen.add_argument("--kind", required=True,
                     choices=["cube", "hamming", "hamming1", "hamming-pair",
                              "prefix", "random"])
    gen.add_argument("--n", type=int, required=True, help="string length")
    gen.add_argument("--k", type=int, default=None, help="Hamming weight")
    gen.add_argument("--free-bits", type=int, default=None)
    gen.add_argument("--m", type=int, default=None, help="random-class size")
    gen.add_argument("--seed", type=int, default=_default_seed())
    gen.add_argument("--output", "-o", default=None)
    gen.set_defaults(func=cmd_gen)

    run = sub.add_parser("run", help="run identification and emit JSON-line traces")
    run.add_argument("--class-file", "--class", dest="class_file", required=True)
    run.add_argument("--x", default=None, help="hidden string (ASCII bits)")
    run.add_argument("--all", action="store_true", help="run every member")
    run.add_argument("--engine", choices=["ideal", "quantum"], default="ideal")
    run.add_argument("--algorithm", choices=sorted(_ALGORITHMS), default="final")
    run.add_argument("--trials", type=int, default=1)
    run.add_argument("--seed", type=int, default=_default_seed())
    run.add_argument("--jobs", type=int, default=1)
    run.add_argument("--output", "-o", default=None)
    run.set_defaults(func=cmd_run)

    verify = sub.add_parser("verify", help="run a verification suite")
    verify.add_argument("--suite", choices=["ordering", "sdp", "lp", "all"],
                        required=True)
    verify.add_argument("--n", type=int, default=4)
    verify.add_argument("--m", type=int, default=3)
    verify.add_argument("--class-file", "--class", dest="class_file", default=None)
    verify.add_argument("--dump", action="store_true",
                        help="include solution vectors in the JSON report")
    verify.add_argument("--tolerance", type=float, default=1e-9)
    verify.add_argument("--seed", type=int, default=_default_seed())
    verify.add_argument("--output", "-o", default=None)
    verify.set_defaults(func=cmd_verify)

    bounds = sub.add_parser("bounds", help="sweep bound formulas over a grid")
    bounds.add_argument("--grid", required=True,
                        help='e.g. "N=4,8;M=4,16" (cells with M > 2^N are skipped)')
    bounds.add_argument("--tolerance", type=float, default=1e-9)
    bounds.add_argument("--jobs", type=int, default=1)
    bounds.add_argument("--seed", type=int, default=_default_seed())
    bounds.add_argument("--output", "-o", default=None)
    bounds.set_defaults(func=cmd_bounds)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
