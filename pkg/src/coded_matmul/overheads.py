"""Cost model: computation, upload, and download overheads per scheme.

All four quantities are ratios against a single uncoded server doing the
same job, minus one:

* delta    — extra blockwise products: R_th / K - 1.
* delta_u0 — extra upload of the left factor: R0 / (p0 p1) - 1.
* delta_u1 — extra upload of the right factor: R1 / (p1 p2) - 1.
* delta_d  — extra download of result blocks: R_th / (p0 p2) - 1,
             identically (p1 - 1) + p1 * delta.

The task and share counts {R_th, R0, R1} are the single source of truth;
every overhead is an exact rational derived from them, so closed-form
comparisons in tests are identities, not approximations.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .blockmat import PartitionScheme
from .schemes import SchemeKind, recovery_threshold, upload_counts


@dataclass(frozen=True)
class OverheadReport:
    kind: SchemeKind
    p: PartitionScheme
    R_th: int
    R0: int
    R1: int
    delta: Fraction
    delta_u0: Fraction
    delta_u1: Fraction
    delta_d: Fraction


def compute_overheads(kind: SchemeKind, p: PartitionScheme) -> OverheadReport:
    rth = recovery_threshold(kind, p)
    r0, r1 = upload_counts(kind, p)
    return OverheadReport(
        kind=kind,
        p=p,
        R_th=rth,
        R0=r0,
        R1=r1,
        delta=Fraction(rth, p.K) - 1,
        delta_u0=Fraction(r0, p.p0 * p.p1) - 1,
        delta_u1=Fraction(r1, p.p1 * p.p2) - 1,
        delta_d=Fraction(rth, p.p0 * p.p2) - 1,
    )
