"""The four coding schemes: encoding polynomials, grids, and exact decoding.

Each scheme encodes the blocks of the two factors as coefficients of low
degree polynomials, evaluates them on a deterministic grid (one evaluation
point per worker subtask), and recovers every block of the product as a
coefficient of the pointwise-product polynomial:

* epc packs all three partition dimensions into one variable, so every
  subtask needs a fresh pair of coded shares, but the task count is lowest.
* bi0 splits the left factor's row dimension onto its own variable x; the
  right factor depends on y alone, so one right share serves all x.
* bi2 is the mirror image: the right factor's column dimension gets its own
  variable z, and one left share (a function of y alone) serves all z.
* tri gives both outer dimensions their own variables; each input depends
  on only two of (x, y, z) and shares are reused across the third.

The product polynomial's coefficient at a known monomial equals one block
of the matrix product, and on a full Cartesian grid the coefficients are
recovered exactly by interpolating one axis at a time.  Everything is exact
arithmetic in F_q; decoding equality is bit-for-bit, not approximate.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from enum import Enum

from .blockmat import BlockGrid, Matrix, PartitionScheme, ShapeError, assemble_blocks
from .ffield import PrimeModulus


class FieldTooSmall(ValueError):
    """The modulus cannot supply enough distinct evaluation points."""


class PointArityError(ValueError):
    """An evaluation point has the wrong number of coordinates."""


class SingularSystem(ValueError):
    """Interpolation points are not pairwise distinct."""


class IncompleteResults(ValueError):
    """Task results do not cover the evaluation grid exactly once."""


class SchemeKind(Enum):
    EPC = "epc"
    BI0 = "bi0"
    BI2 = "bi2"
    TRI = "tri"

    @classmethod
    def parse(cls, label: str) -> SchemeKind:
        try:
            return cls(label.strip().lower())
        except ValueError:
            choices = ", ".join(k.value for k in cls)
            raise ValueError(f"unknown scheme {label!r}; expected one of: {choices}")


# Variable names per scheme, in task-point order.  epc evaluates a single
# variable; the bivariate kinds each drop the outer variable that their
# reused input does not depend on.
_AXIS_NAMES = {
    SchemeKind.EPC: ("x",),
    SchemeKind.BI0: ("x", "y"),
    SchemeKind.BI2: ("y", "z"),
    SchemeKind.TRI: ("x", "y", "z"),
}

# Which task-point coordinates each input's polynomial reads.
_INPUT_AXES = {
    SchemeKind.EPC: ((0,), (0,)),
    SchemeKind.BI0: ((0, 1), (1,)),
    SchemeKind.BI2: ((0,), (0, 1)),
    SchemeKind.TRI: ((0, 1), (1, 2)),
}


def axis_names(kind: SchemeKind) -> tuple[str, ...]:
    return _AXIS_NAMES[kind]


def recovery_threshold(kind: SchemeKind, p: PartitionScheme) -> int:
    """Number of completed subtasks that determines the product."""
    p0, p1, p2 = p.p0, p.p1, p.p2
    if kind is SchemeKind.EPC:
        return p0 * p1 * p2 + p1 - 1
    if kind is SchemeKind.BI0:
        return p0 * (p1 * p2 + p1 - 1)
    if kind is SchemeKind.BI2:
        return (p0 * p1 + p1 - 1) * p2
    return p0 * p2 * (2 * p1 - 1)


def _axis_sizes(kind: SchemeKind, p: PartitionScheme) -> tuple[int, ...]:
    p0, p1, p2 = p.p0, p.p1, p.p2
    if kind is SchemeKind.EPC:
        return (recovery_threshold(kind, p),)
    if kind is SchemeKind.BI0:
        return (p0, p1 * p2 + p1 - 1)
    if kind is SchemeKind.BI2:
        return (p0 * p1 + p1 - 1, p2)
    return (p0, 2 * p1 - 1, p2)


def upload_counts(kind: SchemeKind, p: PartitionScheme) -> tuple[int, int]:
    """Distinct coded shares of each input needed to cover the grid.

    An input depending on a subset of the variables has one distinct share
    per point of the sub-grid spanned by those variables.
    """
    sizes = _axis_sizes(kind, p)
    in0, in1 = _INPUT_AXES[kind]
    r0 = r1 = 1
    for a in in0:
        r0 *= sizes[a]
    for a in in1:
        r1 *= sizes[a]
    return r0, r1


def project_point(kind: SchemeKind, input_id: int, point: tuple[int, ...]) -> tuple[int, ...]:
    """Coordinates of a full task point that the given input's share uses."""
    axes = _INPUT_AXES[kind][input_id]
    if len(point) != len(_AXIS_NAMES[kind]):
        raise PointArityError(
            f"{kind.value} task point needs {len(_AXIS_NAMES[kind])} coordinates, "
            f"got {len(point)}"
        )
    return tuple(point[a] for a in axes)


@dataclass(frozen=True)
class EvaluationGrid:
    """Per-axis point sets and the full task list (their Cartesian product)."""

    kind: SchemeKind
    axes: tuple[tuple[int, ...], ...]
    tasks: tuple[tuple[int, ...], ...]
    modulus: PrimeModulus

    @property
    def arity(self) -> int:
        return len(self.axes)


@dataclass(frozen=True)
class CodedShare:
    """One evaluated input polynomial: what the master uploads to a worker."""

    input_id: int
    point: tuple[int, ...]
    block: Matrix


@dataclass(frozen=True)
class TaskResult:
    """One worker's product of its two coded shares at a grid point."""

    point: tuple[int, ...]
    block: Matrix


def evaluation_grid(
    kind: SchemeKind, p: PartitionScheme, field: PrimeModulus
) -> EvaluationGrid:
    """Deterministic grid: axis k uses points 1..size_k, tasks lexicographic."""
    sizes = _axis_sizes(kind, p)
    if max(sizes) >= field.q:
        raise FieldTooSmall(
            f"{kind.value} at {p} needs {max(sizes)} distinct nonzero points "
            f"but q = {field.q}"
        )
    axes = tuple(tuple(range(1, n + 1)) for n in sizes)
    tasks = tuple(itertools.product(*axes))
    return EvaluationGrid(kind, axes, tasks, field)


def _block_exponents(
    kind: SchemeKind, p: PartitionScheme, input_id: int, i: int, j: int
) -> tuple[int, ...]:
    """Monomial exponents attached to block (i, j), over the input's own axes.

    The left factor is indexed (b0, b1), the right factor (b1, b2); the
    middle index runs in reversed order on the right factor so that the
    wanted block products line up on one monomial per output block.
    """
    p1, p2 = p.p1, p.p2
    if kind is SchemeKind.EPC:
        if input_id == 0:
            return (p1 * p2 * i + j,)
        return (p1 * j + (p1 - 1 - i),)
    if kind is SchemeKind.BI0:
        if input_id == 0:
            return (i, p1 - 1 - j)
        return (j * p1 + i,)
    if kind is SchemeKind.BI2:
        if input_id == 0:
            return (p1 * i + j,)
        return (p1 - 1 - i, j)
    if input_id == 0:
        return (i, j)
    return (p1 - 1 - i, j)


def _target_exponent(
    kind: SchemeKind, p: PartitionScheme, n0: int, n2: int
) -> tuple[int, ...]:
    """Monomial of the product polynomial holding product block (n0, n2)."""
    p1 = p.p1
    if kind is SchemeKind.EPC:
        return (p1 * p.p2 * n0 + p1 * n2 + p1 - 1,)
    if kind is SchemeKind.BI0:
        return (n0, p1 - 1 + n2 * p1)
    if kind is SchemeKind.BI2:
        return (p1 * n0 + p1 - 1, n2)
    return (n0, p1 - 1, n2)


def encode_block(
    kind: SchemeKind,
    p: PartitionScheme,
    input_id: int,
    blocks: BlockGrid,
    point: tuple[int, ...],
) -> CodedShare:
    """Evaluate one input's encoding polynomial at a (projected) point.

    The share is the monomial-weighted sum of that input's blocks and is
    linear in the input matrix.
    """
    expected = (p.p0, p.p1) if input_id == 0 else (p.p1, p.p2)
    if (blocks.pr, blocks.pc) != expected:
        raise ShapeError(
            f"input {input_id} must be partitioned {expected[0]}x{expected[1]}, "
            f"got {blocks.pr}x{blocks.pc}"
        )
    arity = len(_INPUT_AXES[kind][input_id])
    if len(point) != arity:
        raise PointArityError(
            f"{kind.value} input {input_id} expects {arity} coordinates, "
            f"got {len(point)}"
        )
    first = blocks.blocks[0][0]
    q = first.modulus.q
    acc = [0] * (first.rows * first.cols)
    for i, row in enumerate(blocks.blocks):
        for j, blk in enumerate(row):
            c = 1
            for x, e in zip(point, _block_exponents(kind, p, input_id, i, j)):
                c = c * pow(x, e, q) % q
            if c == 0:
                continue
            for idx, v in enumerate(blk.data):
                acc[idx] += c * v
    data = [v % q for v in acc]
    return CodedShare(input_id, tuple(point), Matrix(first.rows, first.cols, data, first.modulus))


def _lagrange_basis(points: tuple[int, ...], q: int) -> list[list[int]]:
    """Coefficient rows of the Lagrange basis polynomials for the points.

    Row i holds the ascending coefficients of L_i, the unique polynomial of
    degree n-1 with L_i(points[i]) = 1 and 0 at the other points.  Built by
    forming the master root polynomial once and synthetically dividing out
    (x - points[i]) per point.
    """
    n = len(points)
    pts = [x % q for x in points]
    if len(set(pts)) != n:
        raise SingularSystem("interpolation points must be pairwise distinct")
    master = [1]
    for a in pts:
        nxt = [0] * (len(master) + 1)
        for k, c in enumerate(master):
            nxt[k + 1] = (nxt[k + 1] + c) % q
            nxt[k] = (nxt[k] - a * c) % q
        master = nxt
    basis = []
    for a in pts:
        quot = [0] * n
        carry = master[n]
        for k in range(n - 1, -1, -1):
            quot[k] = carry
            carry = (master[k] + a * carry) % q
        val = 0
        for k in range(n - 1, -1, -1):
            val = (val * a + quot[k]) % q
        w = pow(val, q - 2, q)
        basis.append([c * w % q for c in quot])
    return basis


def interpolate_univariate(
    points, samples: list[Matrix], field: PrimeModulus
) -> list[Matrix]:
    """Recover the matrix-valued coefficients fitting samples at points.

    Returns n coefficient matrices in ascending degree order, computed
    entrywise; evaluation at each point reproduces its sample exactly.
    """
    n = len(points)
    if n == 0 or n != len(samples):
        raise SingularSystem("need equally many points and samples, at least one")
    shape = (samples[0].rows, samples[0].cols)
    for s in samples:
        if (s.rows, s.cols) != shape:
            raise ShapeError("interpolation samples differ in shape")
    q = field.q
    basis = _lagrange_basis(tuple(points), q)
    size = shape[0] * shape[1]
    out = [[0] * size for _ in range(n)]
    for i, sample in enumerate(samples):
        row = basis[i]
        for k in range(n):
            b = row[k]
            if b == 0:
                continue
            target = out[k]
            for e, v in enumerate(sample.data):
                target[e] += b * v
    return [
        Matrix(shape[0], shape[1], [v % q for v in data], samples[0].modulus)
        for data in out
    ]


def _tensor_coefficients(
    axes: tuple[tuple[int, ...], ...],
    lookup: dict[tuple[int, ...], Matrix],
    field: PrimeModulus,
) -> dict[tuple[int, ...], Matrix]:
    """Coefficients of a multivariate polynomial sampled on a full grid.

    Interpolates one axis at a time: leaves of the recursion are grid
    samples, and each level replaces one point coordinate with a coefficient
    index for that axis.
    """

    arity = len(axes)

    def rec(prefix: tuple[int, ...]) -> dict[tuple[int, ...], Matrix]:
        k = len(prefix)
        if k == arity:
            return {(): lookup[prefix]}
        sub = [rec(prefix + (x,)) for x in axes[k]]
        out: dict[tuple[int, ...], Matrix] = {}
        for exp in sub[0]:
            coeffs = interpolate_univariate(axes[k], [s[exp] for s in sub], field)
            for e_k, mat in enumerate(coeffs):
                out[(e_k,) + exp] = mat
        return out

    return rec(())


def decode_product(
    kind: SchemeKind,
    p: PartitionScheme,
    grid: EvaluationGrid,
    results: list[TaskResult],
) -> Matrix:
    """Interpolate task results and assemble the p0 x p2 product blocks.

    Multivariate kinds require results covering the Cartesian grid exactly
    once.  epc only needs any R_th results at pairwise distinct points: a
    single-variable interpolation works on whatever point set was used.
    """
    rth = recovery_threshold(kind, p)
    if not results:
        raise IncompleteResults(f"no results; {rth} required")
    shape = (results[0].block.rows, results[0].block.cols)
    for r in results:
        if (r.block.rows, r.block.cols) != shape:
            raise ShapeError("task result blocks differ in shape")

    if kind is SchemeKind.EPC:
        for r in results:
            if len(r.point) != 1:
                raise PointArityError("epc task points have one coordinate")
        xs = tuple(r.point[0] for r in results)
        if len(results) != rth or len(set(xs)) != rth:
            raise IncompleteResults(
                f"epc needs {rth} results at distinct points, got {len(results)}"
            )
        coeffs = interpolate_univariate(xs, [r.block for r in results], grid.modulus)

        def coeff_at(exp: tuple[int, ...]) -> Matrix:
            return coeffs[exp[0]]

    else:
        lookup = {r.point: r.block for r in results}
        if len(lookup) != len(results) or set(lookup) != set(grid.tasks):
            raise IncompleteResults(
                f"results must cover the {len(grid.tasks)}-task grid exactly once"
            )
        tensor = _tensor_coefficients(grid.axes, lookup, grid.modulus)

        def coeff_at(exp: tuple[int, ...]) -> Matrix:
            return tensor[exp]

    out = [
        [coeff_at(_target_exponent(kind, p, n0, n2)) for n2 in range(p.p2)]
        for n0 in range(p.p0)
    ]
    return assemble_blocks(BlockGrid(out))
