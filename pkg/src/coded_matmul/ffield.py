"""Exact arithmetic in a prime field F_q.

Every encoding, per-task product, and decode in this package happens over a
prime field, so equality of decoded output with the plain product is exact
rather than approximate.  Elements are canonical residues in [0, q).  The
modulus is a runtime value to let tests run in tiny fields like F_7.
"""

from __future__ import annotations

from dataclasses import dataclass

# 2^31 - 1 (Mersenne prime): elements fit 32 bits, products fit 64 bits,
# and the field is far larger than any evaluation grid used here.
DEFAULT_MODULUS = 2147483647

_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


class ModulusMismatch(ValueError):
    """Two field elements with different moduli were combined."""


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin primality test.

    The fixed base set is exact for all n < 3.3 * 10^24, which covers every
    modulus below 2^63 that this package accepts.
    """
    if n < 2:
        return False
    for p in _MR_BASES:
        if n == p:
            return True
        if n % p == 0:
            return False
    d = n - 1
    s = 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


@dataclass(frozen=True)
class PrimeModulus:
    """A prime q > 2 defining the field F_q, with raw-residue arithmetic.

    The int-in, int-out methods are the fast path used by the matrix and
    codec kernels; `element` wraps a residue in a FieldElement for callers
    that want operator syntax.
    """

    q: int

    def __post_init__(self) -> None:
        if self.q <= 2:
            raise ValueError(f"modulus must exceed 2, got {self.q}")
        if not is_prime(self.q):
            raise ValueError(f"modulus {self.q} is not prime")

    def element(self, value: int) -> FieldElement:
        return FieldElement(value % self.q, self)

    def add(self, a: int, b: int) -> int:
        return (a + b) % self.q

    def sub(self, a: int, b: int) -> int:
        return (a - b) % self.q

    def mul(self, a: int, b: int) -> int:
        return a * b % self.q

    def pow(self, a: int, e: int) -> int:
        if e < 0:
            return pow(self.inv(a), -e, self.q)
        return pow(a, e, self.q)

    def inv(self, a: int) -> int:
        """Multiplicative inverse via Fermat: a^(q-2) mod q."""
        a %= self.q
        if a == 0:
            raise ZeroDivisionError("zero has no multiplicative inverse")
        return pow(a, self.q - 2, self.q)


@dataclass(frozen=True)
class FieldElement:
    """A canonical residue in [0, q) with field operator overloads."""

    value: int
    modulus: PrimeModulus

    def __post_init__(self) -> None:
        object.__setattr__(self, "value", self.value % self.modulus.q)

    def _check(self, other: FieldElement) -> None:
        if self.modulus.q != other.modulus.q:
            raise ModulusMismatch(
                f"moduli differ: {self.modulus.q} vs {other.modulus.q}"
            )

    def __add__(self, other: FieldElement) -> FieldElement:
        self._check(other)
        return FieldElement(self.modulus.add(self.value, other.value), self.modulus)

    def __sub__(self, other: FieldElement) -> FieldElement:
        self._check(other)
        return FieldElement(self.modulus.sub(self.value, other.value), self.modulus)

    def __mul__(self, other: FieldElement) -> FieldElement:
        self._check(other)
        return FieldElement(self.modulus.mul(self.value, other.value), self.modulus)

    def __pow__(self, exponent: int) -> FieldElement:
        return FieldElement(self.modulus.pow(self.value, exponent), self.modulus)

    def __neg__(self) -> FieldElement:
        return FieldElement(-self.value, self.modulus)

    def inverse(self) -> FieldElement:
        return FieldElement(self.modulus.inv(self.value), self.modulus)
