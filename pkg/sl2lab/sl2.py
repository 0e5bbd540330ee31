"""SL_2(F_p): elements, canonical indexing and conjugacy data.

Elements are ``SL2Elem`` tuples ``(a, b, c, d)`` read row-major. Everything
that needs the prime goes through an :class:`SL2Group` context, which also
holds the vectorized versions of the group law working on arrays of
canonical indices.

The canonical index of ``g`` enumerates the first column ``(a, c) != (0, 0)``
as ``col = a*p + c - 1`` and the second column as a particular solution of
``ad - bc = 1`` shifted by ``t*(a, c)``; ``idx = col*p + t``.
"""
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Literal, NamedTuple, Optional, Union

import numpy as np
import structlog

from .constants import ConjTag, DomainError, EigenKind
from .ffield import Fq2Elem, IntArray, prime_field, quadratic_field

logger = structlog.get_logger(__name__)

ComposeOp = Literal["mul", "inv", "conj"]
ProjVector = tuple[Fq2Elem, Fq2Elem]
IndexLike = Union[int, IntArray]

NAMED_PAIRS: dict[str, tuple[tuple[int, int, int, int], tuple[int, int, int, int]]] = {
    # X = [[1,1],[0,1]], Y = [[1,0],[1,1]]; not free: X Y^-1 X = Y^-1 X Y^-1.
    "offdiag1": ((1, 1, 0, 1), (1, 0, 1, 1)),
    # Sanov's pair, free in SL_2(Z).
    "offdiag2": ((1, 2, 0, 1), (1, 0, 2, 1)),
    "offdiag3": ((1, 3, 0, 1), (1, 0, 3, 1)),
}


class SL2Elem(NamedTuple):
    a: int
    b: int
    c: int
    d: int

    def __str__(self) -> str:
        return f"{self.a},{self.b};{self.c},{self.d}"


class ConjClassId(NamedTuple):
    trace: int
    tag: ConjTag


@dataclass(frozen=True)
class EigenData:
    eigenvalues: tuple[Fq2Elem, Fq2Elem]
    eigenvectors: tuple[ProjVector, ProjVector]
    kind: EigenKind


class SL2Group:
    """The group SL_2(F_p) for one odd prime ``p``."""

    def __init__(self, p: int):
        self.field = prime_field(p)
        self.fq2 = quadratic_field(p)
        self.p = p

    def __repr__(self) -> str:
        return f"SL2(F_{self.p})"

    def __eq__(self, other: object) -> bool:
        return isinstance(other, SL2Group) and other.p == self.p

    def __hash__(self) -> int:
        return hash(("SL2", self.p))

    @property
    def order(self) -> int:
        return self.p * (self.p * self.p - 1)

    # scalar group law

    def element(self, a: int, b: int, c: int, d: int) -> SL2Elem:
        p = self.p
        g = SL2Elem(a % p, b % p, c % p, d % p)
        if (g.a * g.d - g.b * g.c) % p != 1:
            raise DomainError(f"Matrix {g} does not have determinant 1.", p=p)
        return g

    @property
    def identity(self) -> SL2Elem:
        return SL2Elem(1, 0, 0, 1)

    @property
    def minus_identity(self) -> SL2Elem:
        return SL2Elem(self.p - 1, 0, 0, self.p - 1)

    def is_central(self, g: SL2Elem) -> bool:
        return g in (self.identity, self.minus_identity)

    def mul(self, g: SL2Elem, h: SL2Elem) -> SL2Elem:
        p = self.p
        return SL2Elem(
            (g.a * h.a + g.b * h.c) % p,
            (g.a * h.b + g.b * h.d) % p,
            (g.c * h.a + g.d * h.c) % p,
            (g.c * h.b + g.d * h.d) % p,
        )

    def inv(self, g: SL2Elem) -> SL2Elem:
        p = self.p
        return SL2Elem(g.d, -g.b % p, -g.c % p, g.a)

    def conj(self, g: SL2Elem, h: SL2Elem) -> SL2Elem:
        """``h g h^-1``."""
        return self.mul(self.mul(h, g), self.inv(h))

    def compose(self, g: SL2Elem, h: Optional[SL2Elem], op: ComposeOp) -> SL2Elem:
        if op == "inv":
            return self.inv(g)
        if h is None:
            raise DomainError(f"Operation {op!r} needs two operands.")
        if op == "mul":
            return self.mul(g, h)
        if op == "conj":
            return self.conj(g, h)
        raise DomainError(f"Unknown operation {op!r}.")

    def product(self, elements: list[SL2Elem]) -> SL2Elem:
        result = self.identity
        for g in elements:
            result = self.mul(result, g)
        return result

    def power(self, g: SL2Elem, n: int) -> SL2Elem:
        if n < 0:
            g, n = self.inv(g), -n
        result = self.identity
        while n:
            if n & 1:
                result = self.mul(result, g)
            g = self.mul(g, g)
            n >>= 1
        return result

    def transpose_inverse(self, g: SL2Elem) -> SL2Elem:
        """The automorphism ``g -> (g^T)^-1``; swaps upper and lower triangular."""
        p = self.p
        return SL2Elem(g.d, -g.c % p, -g.b % p, g.a)

    def trace(self, g: SL2Elem) -> int:
        return (g.a + g.d) % self.p

    # canonical index

    def index(self, g: SL2Elem) -> int:
        p = self.p
        col = g.a * p + g.c - 1
        if g.a:
            t = g.b * self.field.inv(g.a) % p
        else:
            t = g.d * self.field.inv(g.c) % p
        return col * p + t

    def decode(self, idx: int) -> SL2Elem:
        p = self.p
        if not 0 <= idx < self.order:
            raise DomainError(f"Index {idx} outside [0, {self.order}).", p=p)
        col, t = divmod(idx, p)
        a, c = divmod(col + 1, p)
        if a:
            a_inv = self.field.inv(a)
            return SL2Elem(a, t * a % p, c, (a_inv + t * c) % p)
        return SL2Elem(0, -self.field.inv(c) % p, c, t * c % p)

    @property
    def identity_index(self) -> int:
        return (self.p - 1) * self.p

    # vectorized group law on canonical indices

    @cached_property
    def _inv_table(self) -> IntArray:
        return self.field.inv_table

    def index_array(
        self, a: IntArray, b: IntArray, c: IntArray, d: IntArray
    ) -> IntArray:
        p = self.p
        inv = self._inv_table
        col = a * p + c - 1
        t = np.where(a != 0, b * inv[a] % p, d * inv[c] % p)
        return col * p + t

    def decode_array(
        self, idx: IntArray
    ) -> tuple[IntArray, IntArray, IntArray, IntArray]:
        p = self.p
        idx = np.asarray(idx, dtype=np.int64)
        if idx.size and (idx.min() < 0 or idx.max() >= self.order):
            raise DomainError("Index outside the group.", p=p)
        col, t = np.divmod(idx, p)
        a, c = np.divmod(col + 1, p)
        inv = self._inv_table
        nonzero = a != 0
        b = np.where(nonzero, t * a % p, -inv[c] % p)
        d = np.where(nonzero, (inv[a] + t * c % p) % p, t * c % p)
        return a, b, c, d

    def mul_indices(self, x: IndexLike, y: IndexLike) -> IntArray:
        """Elementwise (broadcast) product of two index arrays."""
        p = self.p
        a1, b1, c1, d1 = self.decode_array(np.asarray(x, dtype=np.int64))
        a2, b2, c2, d2 = self.decode_array(np.asarray(y, dtype=np.int64))
        return self.index_array(
            (a1 * a2 % p + b1 * c2 % p) % p,
            (a1 * b2 % p + b1 * d2 % p) % p,
            (c1 * a2 % p + d1 * c2 % p) % p,
            (c1 * b2 % p + d1 * d2 % p) % p,
        )

    def inv_indices(self, x: IndexLike) -> IntArray:
        p = self.p
        a, b, c, d = self.decode_array(np.asarray(x, dtype=np.int64))
        return self.index_array(d, -b % p, -c % p, a)

    def trace_indices(self, x: IndexLike) -> IntArray:
        a, _, _, d = self.decode_array(np.asarray(x, dtype=np.int64))
        return (a + d) % self.p

    def all_indices(self) -> IntArray:
        return np.arange(self.order, dtype=np.int64)

    def random_element(self, rng: np.random.Generator) -> SL2Elem:
        return self.decode(int(rng.integers(self.order)))

    # eigendata and conjugacy

    def eigen(self, g: SL2Elem) -> EigenData:
        fq2 = self.fq2
        p = self.p
        if self.is_central(g):
            lam = Fq2Elem(g.a, 0)
            e1 = (fq2.one, fq2.zero)
            e2 = (fq2.zero, fq2.one)
            return EigenData((lam, lam), (e1, e2), EigenKind.CENTRAL)
        tr = self.trace(g)
        disc = (tr * tr - 4) % p
        if disc == 0:
            lam = Fq2Elem(tr * self.field.inv(2) % p, 0)
            v = self._eigenvector(g, lam)
            return EigenData((lam, lam), (v, v), EigenKind.PARABOLIC)
        root = fq2.sqrt(Fq2Elem(disc, 0))
        if root is None:
            raise DomainError("Base-field element without a root in F_p^2.", p=p)
        half = self.field.inv(2)
        lam1 = fq2.scale(fq2.add(Fq2Elem(tr, 0), root), half)
        lam2 = fq2.scale(fq2.sub(Fq2Elem(tr, 0), root), half)
        kind = EigenKind.SPLIT if self.field.is_residue(disc) else EigenKind.NON_SPLIT
        return EigenData(
            (lam1, lam2),
            (self._eigenvector(g, lam1), self._eigenvector(g, lam2)),
            kind,
        )

    def _eigenvector(self, g: SL2Elem, lam: Fq2Elem) -> ProjVector:
        fq2 = self.fq2
        if g.b:
            v = (Fq2Elem(g.b, 0), fq2.sub(lam, Fq2Elem(g.a, 0)))
        elif g.c:
            v = (fq2.sub(lam, Fq2Elem(g.d, 0)), Fq2Elem(g.c, 0))
        elif lam == Fq2Elem(g.a, 0):
            v = (fq2.one, fq2.zero)
        else:
            v = (fq2.zero, fq2.one)
        return self.normalize(v)

    def normalize(self, v: ProjVector) -> ProjVector:
        """Scale a nonzero vector so its first nonzero coordinate is 1."""
        fq2 = self.fq2
        lead = v[0] if v[0] != fq2.zero else v[1]
        if lead == fq2.zero:
            raise DomainError("The zero vector has no projective class.", p=self.p)
        scale = fq2.inv(lead)
        return (fq2.mul(v[0], scale), fq2.mul(v[1], scale))

    def has_eigenvector(self, g: SL2Elem, v: ProjVector) -> bool:
        """Whether ``v`` spans a line fixed by ``g``: det[g v | v] = 0."""
        fq2 = self.fq2
        v1, v2 = v
        if v1 == fq2.zero and v2 == fq2.zero:
            raise DomainError("The zero vector has no projective class.", p=self.p)
        # b v2^2 + (a - d) v1 v2 - c v1^2
        det = fq2.add(
            fq2.scale(fq2.mul(v2, v2), g.b),
            fq2.sub(
                fq2.scale(fq2.mul(v1, v2), g.a - g.d),
                fq2.scale(fq2.mul(v1, v1), g.c),
            ),
        )
        return det == fq2.zero

    def apply(self, g: SL2Elem, v: ProjVector) -> ProjVector:
        fq2 = self.fq2
        v1, v2 = v
        return (
            fq2.add(fq2.scale(v1, g.a), fq2.scale(v2, g.b)),
            fq2.add(fq2.scale(v1, g.c), fq2.scale(v2, g.d)),
        )

    def conj_class_id(self, g: SL2Elem) -> ConjClassId:
        tr = self.trace(g)
        if tr not in (2, self.p - 2):
            return ConjClassId(tr, ConjTag.REGULAR)
        if self.is_central(g):
            return ConjClassId(tr, ConjTag.CENTRAL)
        # g - eps*I is nilpotent of rank one; the square class of its
        # upper-right entry (or of minus the lower-left one) is invariant.
        entry = g.b if g.b else -g.c % self.p
        if self.field.is_residue(entry):
            return ConjClassId(tr, ConjTag.UNIPOTENT_RESIDUE)
        return ConjClassId(tr, ConjTag.UNIPOTENT_NON_RESIDUE)

    def centralizer(self, g: SL2Elem) -> IntArray:
        """Sorted canonical indices of ``{alpha*I + beta*g} ∩ SL_2`` for non-central ``g``."""
        if self.is_central(g):
            raise DomainError("The centralizer of a central element is the group.")
        p = self.p
        tr = self.trace(g)
        beta = np.arange(p, dtype=np.int64)
        # alpha^2 + alpha*beta*tr + beta^2 = 1
        disc = (beta * beta % p * ((tr * tr - 4) % p) + 4) % p
        root = self.field.sqrt_table[disc]
        ok = root >= 0
        beta, root = beta[ok], root[ok]
        half = self.field.inv(2)
        bt = beta * tr % p
        found = []
        for sign in (1, -1):
            alpha = (-bt + sign * root) % p * half % p
            found.append(
                self.index_array(
                    (alpha + beta * g.a) % p,
                    beta * g.b % p,
                    beta * g.c % p,
                    (alpha + beta * g.d) % p,
                )
            )
        return np.unique(np.concatenate(found))

    # text

    def parse(self, literal: str) -> SL2Elem:
        """Parse ``"a,b;c,d"``."""
        try:
            rows = [row.split(",") for row in literal.strip().split(";")]
            (a, b), (c, d) = ((int(x) for x in row) for row in rows)
        except ValueError as e:
            raise DomainError(f"Malformed matrix literal {literal!r}.") from e
        return self.element(a, b, c, d)

    def named_pair(self, name: str) -> tuple[SL2Elem, SL2Elem]:
        if name not in NAMED_PAIRS:
            raise DomainError(f"Unknown generator pair {name!r}.")
        x, y = NAMED_PAIRS[name]
        return self.element(*x), self.element(*y)


@lru_cache(maxsize=64)
def sl2_group(p: int) -> SL2Group:
    return SL2Group(p)


def sl2_compose(
    group: SL2Group, g: SL2Elem, h: Optional[SL2Elem], op: ComposeOp
) -> SL2Elem:
    return group.compose(g, h, op)


def sl2_index(group: SL2Group, g: SL2Elem) -> int:
    return group.index(g)


def sl2_eigen(group: SL2Group, g: SL2Elem) -> EigenData:
    return group.eigen(g)


def conj_class_id(group: SL2Group, g: SL2Elem) -> ConjClassId:
    return group.conj_class_id(g)
