"""Constrained partition search tests.

The feasibility oracle here re-derives each scheme's overheads from the
closed forms (written out per kind, independent of the overheads module)
and filters the search box directly; the library's feasible set must match
it exactly.  Latency-side checks use analytic anchors and the exactness
that a shared estimate cache gives to cross-budget comparisons.
"""

from __future__ import annotations

import math
from fractions import Fraction

import pytest

from coded_matmul.blockmat import PartitionScheme
from coded_matmul.optimizer import (
    Infeasible,
    SearchSpec,
    SimTemplate,
    feasible_partitions,
    render_tradeoff_csv,
    search_best_partition,
    tradeoff_curve,
)
from coded_matmul.schemes import SchemeKind

ALL_KINDS = list(SchemeKind)

SIM = SimTemplate(N=50, T0=1.0, lam=0.1, trials=400, seed=42)


def closed_form_overheads(kind: SchemeKind, p0: int, p1: int, p2: int):
    """(delta_u0, delta_u1, delta_d) from the per-kind closed forms."""
    if kind is SchemeKind.EPC:
        delta = Fraction(p1 - 1, p0 * p1 * p2)
        u0 = p2 - 1 + p2 * delta
        u1 = p0 - 1 + p0 * delta
    elif kind is SchemeKind.BI0:
        delta = Fraction(p1 - 1, p1 * p2)
        u0 = p2 - 1 + p2 * delta
        u1 = delta
    elif kind is SchemeKind.BI2:
        delta = Fraction(p1 - 1, p0 * p1)
        u0 = delta
        u1 = p0 - 1 + p0 * delta
    else:
        delta = Fraction(p1 - 1, p1)
        u0 = u1 = delta
    delta_d = (p1 - 1) + p1 * delta
    return u0, u1, delta_d


def oracle_feasible(
    kind: SchemeKind, budget: Fraction, p0_cap: int, p2_cap: int, p1_cap: int
) -> set[tuple[int, int, int]]:
    out = set()
    for p0 in range(1, p0_cap + 1):
        for p1 in range(1, p1_cap + 1):
            for p2 in range(1, p2_cap + 1):
                u0, u1, d = closed_form_overheads(kind, p0, p1, p2)
                if u0 <= budget and u1 <= budget and d <= budget:
                    out.add((p0, p1, p2))
    return out


def equal_budget_spec(kind: SchemeKind, budget, caps=(10, 10), sim=SIM, **kw) -> SearchSpec:
    return SearchSpec(
        kind=kind,
        budget_u0=budget,
        budget_u1=budget,
        budget_d=budget,
        p0_cap=caps[0],
        p2_cap=caps[1],
        sim=sim,
        **kw,
    )


def test_zero_budget_epc_only_trivial_scheme() -> None:
    spec = equal_budget_spec(SchemeKind.EPC, 0)
    assert feasible_partitions(spec) == [PartitionScheme(1, 1, 1)]


def test_zero_budget_tri_all_p1_equal_1() -> None:
    spec = equal_budget_spec(SchemeKind.TRI, 0)
    got = feasible_partitions(spec)
    assert len(got) == 100
    assert {(p.p0, p.p1, p.p2) for p in got} == {
        (p0, 1, p2) for p0 in range(1, 11) for p2 in range(1, 11)
    }


def test_unbounded_budgets_full_box() -> None:
    spec = SearchSpec(
        kind=SchemeKind.BI0,
        budget_u0=None,
        budget_u1=None,
        budget_d=None,
        p0_cap=3,
        p2_cap=4,
        sim=SIM,
        p1_cap=2,
    )
    assert len(feasible_partitions(spec)) == 3 * 2 * 4


def test_unbounded_download_budget_needs_explicit_p1_cap() -> None:
    with pytest.raises(ValueError):
        SearchSpec(
            kind=SchemeKind.EPC,
            budget_u0=None,
            budget_u1=None,
            budget_d=None,
            p0_cap=2,
            p2_cap=2,
            sim=SIM,
        )


def test_feasible_set_matches_closed_form_oracle() -> None:
    for kind in ALL_KINDS:
        for budget in (Fraction(0), Fraction(1, 2), Fraction(1), Fraction(3), Fraction(8)):
            spec = equal_budget_spec(kind, budget, caps=(6, 6))
            got = {(p.p0, p.p1, p.p2) for p in feasible_partitions(spec)}
            p1_cap = int(budget) + 1
            assert got == oracle_feasible(kind, budget, 6, 6, p1_cap)


def test_derived_p1_cap_is_reachable() -> None:
    # Budget 2.5 allows p1 = 3 for epc once p0*p2 >= 4 (delta_d = 2 + 2/(p0 p2)).
    spec = equal_budget_spec(SchemeKind.EPC, Fraction(5, 2), caps=(10, 10))
    got = feasible_partitions(spec)
    assert max(p.p1 for p in got) == 3 == math.floor(Fraction(5, 2)) + 1


def test_feasible_sets_nest_with_budget() -> None:
    budgets = [Fraction(0), Fraction(1, 2), Fraction(1), Fraction(2), Fraction(4)]
    for kind in ALL_KINDS:
        sets = []
        for b in budgets:
            spec = equal_budget_spec(kind, b, caps=(5, 5))
            sets.append({(p.p0, p.p1, p.p2) for p in feasible_partitions(spec)})
        for small, large in zip(sets, sets[1:]):
            assert small <= large


def test_lexicographic_enumeration_order() -> None:
    spec = equal_budget_spec(SchemeKind.TRI, 0, caps=(2, 2))
    got = [(p.p0, p.p1, p.p2) for p in feasible_partitions(spec)]
    assert got == [(1, 1, 1), (1, 1, 2), (2, 1, 1), (2, 1, 2)]


def test_search_single_feasible_scheme() -> None:
    res = search_best_partition(equal_budget_spec(SchemeKind.EPC, 0, caps=(4, 4)))
    assert res.best == PartitionScheme(1, 1, 1)
    assert res.feasible_count == 1
    assert res.report.R_th == 1
    assert res.latency.trials == SIM.trials


def test_search_epc_zero_budget_latency_analytic() -> None:
    # K = 1, R_th = 1: first of N shifted exponentials, mean T0 + 1/(N lam).
    sim = SimTemplate(N=50, T0=1.0, lam=0.1, trials=3000, seed=13)
    res = search_best_partition(equal_budget_spec(SchemeKind.EPC, 0, sim=sim))
    expected = sim.T0 + 1.0 / (sim.N * sim.lam)
    assert abs(res.latency.mean - expected) <= 3 * res.latency.stderr


def test_search_prefers_finer_partition_at_equal_ratio() -> None:
    # (4,1,4) has the same R_th/K as (2,1,2) but a smaller per-subtask shift.
    sim = SimTemplate(N=50, T0=1.0, lam=0.1, trials=2000, seed=14)
    spec = SearchSpec(
        kind=SchemeKind.TRI,
        budget_u0=None,
        budget_u1=None,
        budget_d=None,
        p0_cap=4,
        p2_cap=4,
        sim=sim,
        p1_cap=1,
    )
    res = search_best_partition(spec)
    assert res.best == PartitionScheme(4, 1, 4)


def test_search_infeasible_raises() -> None:
    spec = equal_budget_spec(SchemeKind.TRI, Fraction(-1), caps=(3, 3))
    assert feasible_partitions(spec) == []
    with pytest.raises(Infeasible):
        search_best_partition(spec)


def test_search_deterministic_and_cache_shared_across_kinds() -> None:
    # With p1 = 1 all kinds describe the same job, so a shared cache must
    # give them bit-identical latency estimates.
    cache: dict = {}
    results = {}
    for kind in ALL_KINDS:
        spec = SearchSpec(
            kind=kind,
            budget_u0=None,
            budget_u1=None,
            budget_d=None,
            p0_cap=3,
            p2_cap=3,
            sim=SIM,
            p1_cap=1,
        )
        results[kind] = search_best_partition(spec, cache=cache)
    means = {r.latency.mean for r in results.values()}
    bests = {r.best for r in results.values()}
    assert len(means) == 1
    assert len(bests) == 1
    again = search_best_partition(
        SearchSpec(
            kind=SchemeKind.EPC,
            budget_u0=None,
            budget_u1=None,
            budget_d=None,
            p0_cap=3,
            p2_cap=3,
            sim=SIM,
            p1_cap=1,
        )
    )
    assert again.latency == results[SchemeKind.EPC].latency


def test_tradeoff_rows_and_exact_budget_monotonicity() -> None:
    budgets = [Fraction(0), Fraction(1), Fraction(2), Fraction(4)]
    rows = tradeoff_curve(ALL_KINDS, budgets, p0_cap=3, p2_cap=3, sim=SIM)
    assert len(rows) == len(ALL_KINDS) * len(budgets)
    by_kind: dict = {}
    for row in rows:
        assert row.feasible
        by_kind.setdefault(row.kind, []).append(row)
    for kind, kind_rows in by_kind.items():
        assert [r.budget for r in kind_rows] == budgets
        means = [r.mean_latency for r in kind_rows]
        # nested feasible sets + shared cache make this exact, not statistical
        assert all(a >= b for a, b in zip(means, means[1:]))


def test_tradeoff_marks_infeasible_rows() -> None:
    rows = tradeoff_curve(
        [SchemeKind.EPC], [Fraction(-1), Fraction(0)], p0_cap=2, p2_cap=2, sim=SIM
    )
    assert [r.feasible for r in rows] == [False, True]
    assert rows[0].mean_latency is None


def test_tradeoff_force_p1_single() -> None:
    rows = tradeoff_curve(
        [SchemeKind.TRI], [Fraction(4)], p0_cap=3, p2_cap=3, sim=SIM, force_p1_single=True
    )
    assert all(row.p.p1 == 1 for row in rows if row.feasible)


def test_tradeoff_csv_schema_and_stability() -> None:
    budgets = [Fraction(1, 2), Fraction(2)]
    rows = tradeoff_curve([SchemeKind.EPC, SchemeKind.TRI], budgets, p0_cap=2, p2_cap=2, sim=SIM)
    text = render_tradeoff_csv(rows)
    lines = text.strip().split("\n")
    assert lines[0] == (
        "scheme,budget,p0,p1,p2,K,R_th,delta,delta_u0,delta_u1,delta_d,"
        "mean_latency,stderr,feasible"
    )
    assert len(lines) == 1 + 4
    for line in lines[1:]:
        fields = line.split(",")
        assert len(fields) == 14
        assert fields[0] in ("epc", "tri")
        assert fields[13] in ("true", "false")
    # byte-stable re-render
    rows2 = tradeoff_curve([SchemeKind.EPC, SchemeKind.TRI], budgets, p0_cap=2, p2_cap=2, sim=SIM)
    assert render_tradeoff_csv(rows2) == text
