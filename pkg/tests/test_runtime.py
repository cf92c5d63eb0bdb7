"""Concurrent master/worker engine tests.

Correctness oracle is always the direct `matrix_multiply` product; the
share-cache accounting oracle is `upload_counts` (number of distinct
per-input projections).  Latency assertions only compare configurations
against each other, never wall-clock absolutes.
"""

from __future__ import annotations

import random
import statistics

import pytest

from coded_matmul.blockmat import Matrix, PartitionScheme, matrix_multiply
from coded_matmul.ffield import DEFAULT_MODULUS, PrimeModulus
from coded_matmul.runtime import (
    InjectedDelay,
    JobFailed,
    JobSpec,
    JobTrace,
    render_trace_csv,
    run_job,
)
from coded_matmul.schemes import SchemeKind, recovery_threshold, upload_counts

FBIG = PrimeModulus(DEFAULT_MODULUS)
ALL_KINDS = list(SchemeKind)


def random_matrix(rows: int, cols: int, field: PrimeModulus, seed: int) -> Matrix:
    rng = random.Random(seed)
    return Matrix(
        rows, cols, [rng.randrange(field.q) for _ in range(rows * cols)], field
    )


def make_spec(kind: SchemeKind, **kw) -> JobSpec:
    defaults = dict(
        kind=kind,
        p=PartitionScheme(2, 2, 2),
        M0=random_matrix(8, 8, FBIG, seed=1),
        M1=random_matrix(8, 8, FBIG, seed=2),
        workers=8,
        seed=7,
    )
    defaults.update(kw)
    return JobSpec(**defaults)


def test_exact_product_all_kinds_no_delay() -> None:
    want = matrix_multiply(random_matrix(8, 8, FBIG, 1), random_matrix(8, 8, FBIG, 2))
    for kind in ALL_KINDS:
        out, trace = run_job(make_spec(kind))
        assert out == want
        assert isinstance(trace, JobTrace)


def test_single_worker_serial() -> None:
    spec = make_spec(SchemeKind.TRI, workers=1)
    out, trace = run_job(spec)
    assert out == matrix_multiply(spec.M0, spec.M1)
    assert set(trace.per_worker_counts) == {0}


def test_trace_completeness() -> None:
    spec = make_spec(SchemeKind.BI0)
    _, trace = run_job(spec)
    rth = recovery_threshold(SchemeKind.BI0, spec.p)
    assert len(trace.records) == rth
    assert sorted(r.task_id for r in trace.records) == list(range(rth))
    assert len({r.point for r in trace.records}) == rth
    assert sum(trace.per_worker_counts.values()) == rth
    for r in trace.records:
        assert r.end_ms >= r.start_ms >= 0.0
    assert trace.total_ms >= max(r.end_ms for r in trace.records) - 1e-6


def test_share_cache_counts_match_upload_counts() -> None:
    for kind in ALL_KINDS:
        spec = make_spec(kind)
        _, trace = run_job(spec)
        assert trace.encode_counts == upload_counts(kind, spec.p)


def test_static_mode_same_output() -> None:
    dyn, _ = run_job(make_spec(SchemeKind.TRI, mode="dynamic"))
    sta, trace = run_job(make_spec(SchemeKind.TRI, mode="static"))
    assert dyn == sta
    assert trace.mode == "static"
    # round-robin pre-assignment: worker w got tasks w, w+8, ...
    for r in trace.records:
        assert r.worker == r.task_id % 8


def test_output_exact_under_injected_delay() -> None:
    spec = make_spec(
        SchemeKind.BI2,
        delay=InjectedDelay(t0_ms=4.0, lam_inv_ms=2.0),
        workers=3,
    )
    out, trace = run_job(spec)
    assert out == matrix_multiply(spec.M0, spec.M1)
    assert trace.encode_counts == upload_counts(SchemeKind.BI2, spec.p)


def test_delay_floor_visible_in_trace() -> None:
    # One task, K = 1: the injected floor of 15 ms must show up in its span.
    spec = make_spec(
        SchemeKind.EPC,
        p=PartitionScheme(1, 1, 1),
        M0=random_matrix(2, 2, FBIG, 3),
        M1=random_matrix(2, 2, FBIG, 4),
        workers=2,
        delay=InjectedDelay(t0_ms=15.0, lam_inv_ms=0.0),
    )
    _, trace = run_job(spec)
    assert len(trace.records) == 1
    span = trace.records[0].end_ms - trace.records[0].start_ms
    assert span >= 14.0


def test_worker_failure_raises_job_failed(monkeypatch) -> None:
    import coded_matmul.runtime as rt

    real = rt.matrix_multiply
    calls = {"n": 0}

    def flaky(a, b):
        calls["n"] += 1
        if calls["n"] == 3:
            raise RuntimeError("worker blew up")
        return real(a, b)

    monkeypatch.setattr(rt, "matrix_multiply", flaky)
    with pytest.raises(JobFailed) as exc_info:
        run_job(make_spec(SchemeKind.TRI, workers=2))
    trace = exc_info.value.trace
    assert isinstance(trace, JobTrace)
    rth = recovery_threshold(SchemeKind.TRI, PartitionScheme(2, 2, 2))
    assert len(trace.records) < rth


def test_dynamic_beats_static_with_skewed_worker() -> None:
    # Quick version of the paired comparison: one worker 10x slower.
    factors = (10.0,) + (1.0,) * 7
    delay = InjectedDelay(t0_ms=8.0, lam_inv_ms=2.0)
    dyn, sta = [], []
    for rep in range(6):
        for mode, sink in (("dynamic", dyn), ("static", sta)):
            spec = make_spec(
                SchemeKind.TRI,
                delay=delay,
                worker_delay_factors=factors,
                seed=100 + rep,
                mode=mode,
            )
            out, trace = run_job(spec)
            sink.append(trace.total_ms)
    assert statistics.mean(dyn) < statistics.mean(sta)


def test_validation() -> None:
    with pytest.raises(ValueError):
        make_spec(SchemeKind.TRI, workers=0)
    with pytest.raises(ValueError):
        make_spec(SchemeKind.TRI, mode="eager")
    with pytest.raises(ValueError):
        make_spec(SchemeKind.TRI, worker_delay_factors=(1.0, 2.0))  # wrong length
    with pytest.raises(ValueError):
        run_job(
            make_spec(
                SchemeKind.TRI,
                M1=random_matrix(8, 8, PrimeModulus(101), seed=5),
            )
        )


def test_trace_csv_shape() -> None:
    _, trace = run_job(make_spec(SchemeKind.BI2, workers=4))
    text = render_trace_csv(trace)
    lines = text.strip().split("\n")
    assert lines[0] == "task_id,x,y,z,worker,start_ms,end_ms"
    assert len(lines) == 1 + recovery_threshold(SchemeKind.BI2, PartitionScheme(2, 2, 2))
    first = lines[1].split(",")
    assert len(first) == 7
    # bi2 points live on (y, z); the x column stays blank
    assert first[1] == ""
    assert first[2] != "" and first[3] != ""
    float(first[5]), float(first[6])


def test_trace_csv_epc_axes() -> None:
    spec = make_spec(SchemeKind.EPC, workers=2)
    _, trace = run_job(spec)
    row = render_trace_csv(trace).strip().split("\n")[1].split(",")
    assert row[1] != "" and row[2] == "" and row[3] == ""
