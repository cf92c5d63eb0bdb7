"""Command-line front end.

Subcommands map one-to-one onto the library layers: `overheads` prints the
exact cost model, `multiply` runs encode/compute/decode in-process,
`simulate` estimates straggler latency, `tradeoff` emits the
budget-vs-latency CSV, and `run` drives the threaded master/worker demo.

Exit codes: 0 success, 1 usage or input error, 2 infeasible configuration
or verification failure.  CSV schemas are fixed; given the same argv and
seed the CSV output is byte-identical (trace timestamps are wall-clock and
necessarily vary).
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from .blockmat import (
    Matrix,
    PartitionScheme,
    matrix_multiply,
    partition_matrix,
    read_matrix,
    write_matrix,
)
from .ffield import PrimeModulus
from .optimizer import Infeasible, SimTemplate, render_tradeoff_csv, tradeoff_curve
from .overheads import compute_overheads
from .runtime import InjectedDelay, JobFailed, JobSpec, render_trace_csv, run_job
from .schemes import (
    FieldTooSmall,
    SchemeKind,
    TaskResult,
    decode_product,
    encode_block,
    evaluation_grid,
    project_point,
)
from .straggler_sim import SimConfig, StragglerModel, estimate_mean_latency

_ALL_KINDS = [SchemeKind.EPC, SchemeKind.BI0, SchemeKind.BI2, SchemeKind.TRI]

OVERHEADS_CSV_HEADER = "scheme,p0,p1,p2,K,R_th,R0,R1,delta,delta_u0,delta_u1,delta_d"


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # our exit-code contract reserves 2 for infeasible/verification failures,
    # so bad flags must exit 1, not argparse's default 2
    def error(self, message):
        raise _UsageError(message)


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def _nonneg_float(text: str) -> float:
    value = float(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {value}")
    return value


def _positive_float(text: str) -> float:
    value = float(text)
    if value <= 0:
        raise argparse.ArgumentTypeError(f"must be > 0, got {value}")
    return value


def _add_partition_flags(sub, scheme_choices) -> None:
    sub.add_argument("--scheme", required=True, choices=scheme_choices)
    sub.add_argument("--p0", required=True, type=_positive_int)
    sub.add_argument("--p1", required=True, type=_positive_int)
    sub.add_argument("--p2", required=True, type=_positive_int)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="coded-matmul",
        description="Coded distributed matrix multiplication toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    kinds = [k.value for k in _ALL_KINDS]

    p_over = sub.add_parser("overheads", help="exact overhead table for a partition")
    _add_partition_flags(p_over, kinds + ["all"])
    p_over.add_argument("--format", choices=["table", "csv", "json"], default="table")
    p_over.set_defaults(func=_cmd_overheads)

    p_mul = sub.add_parser("multiply", help="encode, compute, decode one product")
    _add_partition_flags(p_mul, kinds)
    p_mul.add_argument("--a", required=True, help="left matrix file")
    p_mul.add_argument("--b", required=True, help="right matrix file")
    p_mul.add_argument("--q", type=int, help="override modulus (values reduced mod q)")
    p_mul.add_argument("--out", help="write product here instead of stdout")
    p_mul.add_argument("--verify", action="store_true",
                       help="recompute directly and require exact equality")
    p_mul.set_defaults(func=_cmd_multiply)

    p_sim = sub.add_parser("simulate", help="Monte Carlo straggler latency")
    _add_partition_flags(p_sim, kinds)
    p_sim.add_argument("--workers", required=True, type=_positive_int)
    p_sim.add_argument("--lambda-inv", required=True, type=_positive_float,
                       help="mean 1/lambda of the exponential tail")
    p_sim.add_argument("--t0", required=True, type=_nonneg_float)
    p_sim.add_argument("--trials", type=_positive_int, default=1000)
    p_sim.add_argument("--seed", type=int, default=0)
    p_sim.set_defaults(func=_cmd_simulate)

    p_tr = sub.add_parser("tradeoff", help="budget-constrained search, CSV out")
    p_tr.add_argument("--schemes", required=True,
                      help="comma-separated list (or 'all')")
    p_tr.add_argument("--budgets", required=True,
                      help="comma-separated overhead budgets")
    p_tr.add_argument("--workers", required=True, type=_positive_int)
    p_tr.add_argument("--lambda-inv", required=True, type=_positive_float)
    p_tr.add_argument("--t0", required=True, type=_nonneg_float)
    p_tr.add_argument("--p0-cap", required=True, type=_positive_int)
    p_tr.add_argument("--p2-cap", required=True, type=_positive_int)
    p_tr.add_argument("--trials", type=_positive_int, default=1000)
    p_tr.add_argument("--seed", type=int, default=0)
    p_tr.add_argument("--force-p1-1", action="store_true",
                      help="restrict the search to p1 = 1")
    p_tr.add_argument("--out", help="write CSV here instead of stdout")
    p_tr.set_defaults(func=_cmd_tradeoff)

    p_run = sub.add_parser("run", help="threaded master/worker demo")
    _add_partition_flags(p_run, kinds)
    p_run.add_argument("--workers", required=True, type=_positive_int)
    p_run.add_argument("--a", required=True)
    p_run.add_argument("--b", required=True)
    p_run.add_argument("--inject-t0", type=_nonneg_float, default=0.0,
                       help="injected per-task base delay, ms")
    p_run.add_argument("--inject-lambda-inv", type=_nonneg_float, default=0.0,
                       help="injected exponential tail mean, ms")
    p_run.add_argument("--seed", type=int, default=0)
    p_run.add_argument("--trace", help="write per-task trace CSV here")
    p_run.set_defaults(func=_cmd_run)

    return parser


# -- subcommand bodies -------------------------------------------------------


def _partition(args) -> PartitionScheme:
    return PartitionScheme(args.p0, args.p1, args.p2)


def _parse_kind_list(text: str) -> list[SchemeKind]:
    if text.strip() == "all":
        return list(_ALL_KINDS)
    try:
        return [SchemeKind.parse(tok) for tok in text.split(",") if tok.strip()]
    except ValueError as exc:
        raise _UsageError(str(exc)) from exc


def _overhead_row(kind: SchemeKind, p: PartitionScheme) -> dict:
    rep = compute_overheads(kind, p)
    return {
        "scheme": kind.value,
        "p0": p.p0,
        "p1": p.p1,
        "p2": p.p2,
        "K": p.K,
        "R_th": rep.R_th,
        "R0": rep.R0,
        "R1": rep.R1,
        "delta": float(rep.delta),
        "delta_u0": float(rep.delta_u0),
        "delta_u1": float(rep.delta_u1),
        "delta_d": float(rep.delta_d),
    }


def _render_rows(rows: list[dict], fmt: str) -> str:
    if fmt == "json":
        return json.dumps(rows, indent=2) + "\n"
    header = OVERHEADS_CSV_HEADER.split(",")
    cells = [[str(row[col]) for col in header] for row in rows]
    if fmt == "csv":
        return "\n".join([",".join(header)] + [",".join(c) for c in cells]) + "\n"
    widths = [max(len(h), *(len(c[i]) for c in cells)) if cells else len(h)
              for i, h in enumerate(header)]
    lines = ["  ".join(h.ljust(w) for h, w in zip(header, widths)).rstrip()]
    for c in cells:
        lines.append("  ".join(v.ljust(w) for v, w in zip(c, widths)).rstrip())
    return "\n".join(lines) + "\n"


def _cmd_overheads(args) -> int:
    p = _partition(args)
    kinds = _ALL_KINDS if args.scheme == "all" else [SchemeKind.parse(args.scheme)]
    rows = [_overhead_row(k, p) for k in kinds]
    sys.stdout.write(_render_rows(rows, args.format))
    return 0


def _load_pair(args) -> tuple[Matrix, Matrix]:
    a = read_matrix(args.a)
    b = read_matrix(args.b)
    if getattr(args, "q", None) is not None:
        q = PrimeModulus(args.q)
        a = Matrix(a.rows, a.cols, [v % q.q for v in a.data], q)
        b = Matrix(b.rows, b.cols, [v % q.q for v in b.data], q)
    elif a.modulus.q != b.modulus.q:
        raise _UsageError(
            f"moduli differ ({a.modulus.q} vs {b.modulus.q}); pass --q to override"
        )
    return a, b


def _direct_product(a: Matrix, b: Matrix) -> Matrix:
    return matrix_multiply(a, b)


def _coded_product(kind: SchemeKind, p: PartitionScheme, a: Matrix, b: Matrix) -> Matrix:
    grid = evaluation_grid(kind, p, a.modulus)
    blocks = (partition_matrix(a, p.p0, p.p1), partition_matrix(b, p.p1, p.p2))
    shares: dict[tuple[int, tuple[int, ...]], Matrix] = {}

    def share(input_id: int, point: tuple[int, ...]) -> Matrix:
        key = (input_id, project_point(kind, input_id, point))
        if key not in shares:
            shares[key] = encode_block(kind, p, input_id, blocks[input_id], key[1]).block
        return shares[key]

    results = [
        TaskResult(point, matrix_multiply(share(0, point), share(1, point)))
        for point in grid.tasks
    ]
    return decode_product(kind, p, grid, results)


def _format_matrix(m: Matrix) -> str:
    lines = [f"{m.rows} {m.cols} {m.modulus.q}"]
    for i in range(m.rows):
        lines.append(" ".join(str(v) for v in m.data[i * m.cols : (i + 1) * m.cols]))
    return "\n".join(lines) + "\n"


def _cmd_multiply(args) -> int:
    a, b = _load_pair(args)
    kind = SchemeKind.parse(args.scheme)
    p = _partition(args)
    product = _coded_product(kind, p, a, b)
    if args.verify and product != _direct_product(a, b):
        print("verification failed: decoded product differs from direct product",
              file=sys.stderr)
        return 2
    if args.out:
        write_matrix(product, args.out)
    else:
        sys.stdout.write(_format_matrix(product))
    return 0


def _cmd_simulate(args) -> int:
    kind = SchemeKind.parse(args.scheme)
    p = _partition(args)
    from .schemes import recovery_threshold

    model = StragglerModel(T0=args.t0, lam=1.0 / args.lambda_inv, K=p.K)
    cfg = SimConfig(
        N=args.workers,
        R_th=recovery_threshold(kind, p),
        model=model,
        trials=args.trials,
        seed=args.seed,
    )
    est = estimate_mean_latency(cfg)
    print(f"mean_latency {est.mean!r}")
    print(f"stderr {est.stderr!r}")
    return 0


def _parse_budget_list(text: str) -> list[Fraction]:
    try:
        budgets = [Fraction(tok) for tok in text.split(",") if tok.strip()]
    except (ValueError, ZeroDivisionError) as exc:
        raise _UsageError(f"bad budget list {text!r}: {exc}") from exc
    if not budgets:
        raise _UsageError("empty budget list")
    return budgets


def _cmd_tradeoff(args) -> int:
    kinds = _parse_kind_list(args.schemes)
    if not kinds:
        raise _UsageError("empty scheme list")
    budgets = _parse_budget_list(args.budgets)
    sim = SimTemplate(
        N=args.workers,
        T0=args.t0,
        lam=1.0 / args.lambda_inv,
        trials=args.trials,
        seed=args.seed,
    )
    rows = tradeoff_curve(
        kinds,
        budgets,
        p0_cap=args.p0_cap,
        p2_cap=args.p2_cap,
        sim=sim,
        force_p1_single=args.force_p1_1,
    )
    text = render_tradeoff_csv(rows)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def _cmd_run(args) -> int:
    a = read_matrix(args.a)
    b = read_matrix(args.b)
    kind = SchemeKind.parse(args.scheme)
    p = _partition(args)
    spec = JobSpec(
        kind=kind,
        p=p,
        M0=a,
        M1=b,
        workers=args.workers,
        delay=InjectedDelay(t0_ms=args.inject_t0, lam_inv_ms=args.inject_lambda_inv),
        seed=args.seed,
    )
    product, trace = run_job(spec)
    if args.trace:
        with open(args.trace, "w") as fh:
            fh.write(render_trace_csv(trace))
    ok = product == _direct_product(a, b)
    print(f"scheme {kind.value}")
    print(f"tasks {len(trace.records)}")
    print(f"workers {args.workers}")
    print(f"total_ms {trace.total_ms:.3f}")
    print(f"verified {'true' if ok else 'false'}")
    if not ok:
        print("verification failed: runtime product differs from direct product",
              file=sys.stderr)
        return 2
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except SystemExit as err:  # argparse --help
        return int(err.code or 0)
    try:
        return args.func(args)
    except _UsageError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except (FieldTooSmall, Infeasible) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except JobFailed as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
