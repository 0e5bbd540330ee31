"""Exact arithmetic in F_p and in its quadratic extension F_{p^2}.

Elements are plain residues: an ``FpElem`` is an ``int`` in ``[0, p)`` and an
``Fq2Elem`` is a pair ``(x, y)`` standing for ``x + y*w`` with ``w**2 = nu``,
``nu`` the least quadratic non-residue mod p. The prime itself lives in the
context objects (:class:`PrimeField`, :class:`QuadraticField`), never in the
elements.

Every context also offers vectorized counterparts working on numpy ``int64``
arrays. F_{p^2} elements are packed as ``x + y*p`` for those.
"""
from __future__ import annotations

from functools import cached_property, lru_cache
from typing import Literal, NamedTuple, Optional, Union

import numpy as np
import numpy.typing as npt
from sympy import isprime
from sympy.ntheory import legendre_symbol, sqrt_mod

from .constants import MAX_PRIME, DomainError

FpElem = int
IntArray = npt.NDArray[np.int64]
Fq2Op = Literal["add", "mul", "inv", "sqrt"]


class Fq2Elem(NamedTuple):
    x: int
    y: int = 0

    @property
    def is_base(self) -> bool:
        return self.y == 0


class PrimeField:
    """Context for arithmetic modulo an odd prime ``p``."""

    def __init__(self, p: int):
        if not isinstance(p, int) or p < 3 or p >= MAX_PRIME or not isprime(p):
            raise DomainError(f"{p!r} is not an odd prime below 2**31.", p=p)
        self.p = p

    def __repr__(self) -> str:
        return f"F_{self.p}"

    def __eq__(self, other: object) -> bool:
        return isinstance(other, PrimeField) and other.p == self.p

    def __hash__(self) -> int:
        return hash(("F", self.p))

    def element(self, value: int) -> FpElem:
        return value % self.p

    def inv(self, a: FpElem) -> FpElem:
        a %= self.p
        if a == 0:
            raise DomainError("Zero has no inverse.", p=self.p)
        return pow(a, -1, self.p)

    def is_residue(self, a: FpElem) -> bool:
        """Quadratic residue test; zero counts as a residue."""
        a %= self.p
        return a == 0 or legendre_symbol(a, self.p) == 1

    def sqrt(self, a: FpElem) -> Optional[FpElem]:
        """The smaller of the two square roots, or ``None`` for a non-residue."""
        a %= self.p
        if a == 0:
            return 0
        if legendre_symbol(a, self.p) != 1:
            return None
        root = int(sqrt_mod(a, self.p))
        return min(root, self.p - root)

    @cached_property
    def nonresidue(self) -> FpElem:
        # Euler's criterion, scanning upwards; deterministic for a given p.
        for candidate in range(2, self.p):
            if pow(candidate, (self.p - 1) // 2, self.p) == self.p - 1:
                return candidate
        raise DomainError("No quadratic non-residue found.", p=self.p)

    @cached_property
    def inv_table(self) -> IntArray:
        """``inv_table[a] = a^-1`` for ``a != 0``; entry 0 is 0."""
        table = np.zeros(self.p, dtype=np.int64)
        values = np.arange(1, self.p, dtype=np.int64)
        table[1:] = [pow(int(v), -1, self.p) for v in values]
        return table

    @cached_property
    def sqrt_table(self) -> IntArray:
        """``sqrt_table[a]`` = smaller square root of ``a``, or -1 for non-residues."""
        table = np.full(self.p, -1, dtype=np.int64)
        roots = np.arange(self.p, dtype=np.int64)
        squares = roots * roots % self.p
        # Reverse assignment so the smaller root wins.
        table[squares[::-1]] = roots[::-1]
        return table


class QuadraticField:
    """Context for F_{p^2} = F_p[w] / (w^2 - nu)."""

    def __init__(self, base: PrimeField):
        self.base = base
        self.p = base.p
        self.nu = base.nonresidue

    def __repr__(self) -> str:
        return f"F_{self.p}^2"

    @property
    def order(self) -> int:
        return self.p * self.p

    def element(self, x: int, y: int = 0) -> Fq2Elem:
        return Fq2Elem(x % self.p, y % self.p)

    @property
    def zero(self) -> Fq2Elem:
        return Fq2Elem(0, 0)

    @property
    def one(self) -> Fq2Elem:
        return Fq2Elem(1, 0)

    @property
    def omega(self) -> Fq2Elem:
        return Fq2Elem(0, 1)

    def add(self, a: Fq2Elem, b: Fq2Elem) -> Fq2Elem:
        return Fq2Elem((a.x + b.x) % self.p, (a.y + b.y) % self.p)

    def sub(self, a: Fq2Elem, b: Fq2Elem) -> Fq2Elem:
        return Fq2Elem((a.x - b.x) % self.p, (a.y - b.y) % self.p)

    def neg(self, a: Fq2Elem) -> Fq2Elem:
        return Fq2Elem(-a.x % self.p, -a.y % self.p)

    def mul(self, a: Fq2Elem, b: Fq2Elem) -> Fq2Elem:
        p = self.p
        return Fq2Elem(
            (a.x * b.x + self.nu * a.y * b.y) % p, (a.x * b.y + a.y * b.x) % p
        )

    def scale(self, a: Fq2Elem, k: int) -> Fq2Elem:
        return Fq2Elem(a.x * k % self.p, a.y * k % self.p)

    def conj(self, a: Fq2Elem) -> Fq2Elem:
        return Fq2Elem(a.x, -a.y % self.p)

    def norm(self, a: Fq2Elem) -> FpElem:
        """``a * conj(a)``, which lands in the base field."""
        return (a.x * a.x - self.nu * a.y * a.y) % self.p

    def inv(self, a: Fq2Elem) -> Fq2Elem:
        n = self.norm(a)
        if n == 0:
            raise DomainError("Zero has no inverse.", p=self.p)
        return self.scale(self.conj(a), self.base.inv(n))

    def div(self, a: Fq2Elem, b: Fq2Elem) -> Fq2Elem:
        return self.mul(a, self.inv(b))

    def is_square(self, a: Fq2Elem) -> bool:
        # z is a square in F_{p^2} iff its norm is a square in F_p.
        return self.base.is_residue(self.norm(a))

    def sqrt(self, a: Fq2Elem) -> Optional[Fq2Elem]:
        """A square root, the lexicographically smaller of ``{r, -r}``."""
        p = self.p
        if a.y == 0:
            root = self.base.sqrt(a.x)
            if root is not None:
                return Fq2Elem(root, 0)
            # x = c^2 nu, with x / nu a residue
            c = self.base.sqrt(a.x * self.base.inv(self.nu))
            if c is None:
                raise DomainError("Inconsistent residue classes.", p=p)
            return self._canonical(Fq2Elem(0, c))
        n = self.base.sqrt(self.norm(a))
        if n is None:
            return None
        half = self.base.inv(2)
        for sign in (1, -1):
            u = self.base.sqrt((a.x + sign * n) * half)
            if u is not None and u != 0:
                v = a.y * half * self.base.inv(u) % p
                return self._canonical(Fq2Elem(u, v))
        raise DomainError("Square root construction failed.", p=p, value=a)

    def _canonical(self, r: Fq2Elem) -> Fq2Elem:
        return min(r, self.neg(r))

    def arith(self, a: Fq2Elem, b: Optional[Fq2Elem], op: Fq2Op) -> Optional[Fq2Elem]:
        if op == "add":
            return self.add(a, self._operand(b))
        if op == "mul":
            return self.mul(a, self._operand(b))
        if op == "inv":
            return self.inv(a)
        if op == "sqrt":
            return self.sqrt(a)
        raise DomainError(f"Unknown operation {op!r}.")

    @staticmethod
    def _operand(b: Optional[Fq2Elem]) -> Fq2Elem:
        if b is None:
            raise DomainError("Binary operation needs a second operand.")
        return b

    # packed, vectorized arithmetic

    def pack(self, a: Fq2Elem) -> int:
        return a.x + a.y * self.p

    def unpack(self, code: int) -> Fq2Elem:
        return Fq2Elem(code % self.p, code // self.p)

    def mul_codes(self, c1: IntArray, c2: IntArray) -> IntArray:
        p = self.p
        x1, y1 = c1 % p, c1 // p
        x2, y2 = c2 % p, c2 // p
        x = (x1 * x2 % p + self.nu * (y1 * y2 % p)) % p
        y = (x1 * y2 % p + x2 * y1 % p) % p
        return x + y * p

    def add_codes(self, c1: IntArray, c2: IntArray) -> IntArray:
        p = self.p
        return (c1 % p + c2 % p) % p + ((c1 // p + c2 // p) % p) * p

    def inv_codes(self, codes: IntArray) -> IntArray:
        p = self.p
        x, y = codes % p, codes // p
        norm = (x * x % p - self.nu * (y * y % p)) % p
        if np.any(norm == 0):
            raise DomainError("Zero has no inverse.", p=p)
        n_inv = self.base.inv_table[norm]
        return x * n_inv % p + (-y * n_inv % p) * p


def fp_inv(field: PrimeField, a: FpElem) -> FpElem:
    return field.inv(a)


def fp_sqrt(field: PrimeField, a: FpElem) -> Optional[FpElem]:
    return field.sqrt(a)


def fq2_arith(
    field: QuadraticField, a: Fq2Elem, b: Optional[Fq2Elem], op: Fq2Op
) -> Optional[Fq2Elem]:
    return field.arith(a, b, op)


@lru_cache(maxsize=64)
def prime_field(p: int) -> PrimeField:
    return PrimeField(p)


@lru_cache(maxsize=64)
def quadratic_field(p: int) -> QuadraticField:
    return QuadraticField(prime_field(p))


class PackedField:
    """Vectorized arithmetic on packed codes of F_q, q = p or p^2."""

    def __init__(self, p: int, degree: int = 1):
        if degree not in (1, 2):
            raise DomainError(f"Only degrees 1 and 2 are supported, got {degree}.")
        self.base = prime_field(p)
        self.ext = quadratic_field(p) if degree == 2 else None
        self.p = p
        self.degree = degree
        self.q = p**degree

    def __repr__(self) -> str:
        return f"F_{self.q}"

    def pack(self, a: Union[int, Fq2Elem]) -> int:
        if isinstance(a, Fq2Elem):
            if self.degree == 1 and a.y:
                raise DomainError(f"{a} is not in F_{self.p}.")
            return a.x % self.p + (a.y % self.p) * self.p * (self.degree - 1)
        return a % self.p

    def mul(self, c1: IntArray, c2: IntArray) -> IntArray:
        if self.ext is not None:
            return self.ext.mul_codes(c1, c2)
        return c1 * c2 % self.p

    def add(self, c1: IntArray, c2: IntArray) -> IntArray:
        if self.ext is not None:
            return self.ext.add_codes(c1, c2)
        return (c1 + c2) % self.p

    def neg(self, c: IntArray) -> IntArray:
        if self.ext is not None:
            p = self.p
            return -(c % p) % p + (-(c // p) % p) * p
        return -c % self.p

    def inv(self, c: IntArray) -> IntArray:
        if self.ext is not None:
            return self.ext.inv_codes(c)
        if np.any(np.asarray(c) % self.p == 0):
            raise DomainError("Zero has no inverse.", p=self.p)
        return self.base.inv_table[c]
