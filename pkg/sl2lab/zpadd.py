"""Additive and multiplicative combinatorics over F_p and F_{p^2}.

Fourier transforms are only ever used to measure. Inequalities that decide a
pass or a failure (mass identity, the dilate bound, Ruzsa's abelian
inequality) are evaluated on integer counts or :class:`fractions.Fraction`.
"""
import math
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Iterator, Optional, Union

import numpy as np
import numpy.typing as npt
import structlog

from .constants import ContextMismatchError, DomainError, ExpanderKind, HypothesisError
from .ffield import Fq2Elem, IntArray, PackedField
from .models import ExactInequality, ExpanderImage, SorgeCertificate, SumProductStats, at_least, at_most

logger = structlog.get_logger(__name__)

DensityFn = npt.NDArray[np.complex128]

# pairs per vectorized block
_BLOCK = 1 << 22


class ZpSet:
    """A subset of F_q, q = p or p^2, stored as sorted packed codes."""

    def __init__(self, p: int, members: Union[IntArray, Iterable[int]] = (), degree: int = 1):
        self.field = PackedField(p, degree)
        if not isinstance(members, np.ndarray):
            members = np.fromiter(members, dtype=np.int64)
        self.members = np.unique(members.astype(np.int64, copy=False) % self.q)
        self.members.setflags(write=False)

    @property
    def p(self) -> int:
        return self.field.p

    @property
    def q(self) -> int:
        return self.field.q

    @property
    def degree(self) -> int:
        return self.field.degree

    @cached_property
    def mask(self) -> np.ndarray:
        mask = np.zeros(self.q, dtype=bool)
        mask[self.members] = True
        return mask

    def __len__(self) -> int:
        return int(self.members.size)

    def __iter__(self) -> Iterator[int]:
        return (int(x) for x in self.members)

    def __contains__(self, x: int) -> bool:
        return bool(self.mask[x % self.q])

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, ZpSet)
            and other.q == self.q
            and np.array_equal(other.members, self.members)
        )

    def __repr__(self) -> str:
        return f"ZpSet(q={self.q}, size={len(self)})"

    def _same(self, other: "ZpSet") -> None:
        if other.q != self.q:
            raise ContextMismatchError("Sets live in different fields.", left=self.q, right=other.q)

    def indicator(self) -> npt.NDArray[np.int64]:
        return self.mask.astype(np.int64)

    def _pairwise(self, other: "ZpSet", op: str) -> "ZpSet":
        self._same(other)
        if not len(self) or not len(other):
            return ZpSet(self.p, (), self.degree)
        combine = self.field.add if op == "add" else self.field.mul
        rows = max(1, _BLOCK // len(other))
        seen = np.zeros(self.q, dtype=bool)
        for start in range(0, len(self), rows):
            block = self.members[start : start + rows, None]
            seen[combine(block, other.members[None, :]).ravel()] = True
        return ZpSet(self.p, np.flatnonzero(seen), self.degree)

    def sumset(self, other: "ZpSet") -> "ZpSet":
        return self._pairwise(other, "add")

    def productset(self, other: "ZpSet") -> "ZpSet":
        return self._pairwise(other, "mul")

    def negate(self) -> "ZpSet":
        return ZpSet(self.p, self.field.neg(self.members), self.degree)

    def difference_set(self, other: "ZpSet") -> "ZpSet":
        """``A - B``."""
        return self.sumset(other.negate())

    def dilate(self, xi: int) -> "ZpSet":
        return ZpSet(self.p, self.field.mul(self.members, np.int64(xi)), self.degree)

    def inverse(self) -> "ZpSet":
        return ZpSet(self.p, self.field.inv(self.members), self.degree)

    def without_zero(self) -> "ZpSet":
        return ZpSet(self.p, self.members[self.members != 0], self.degree)


def fourier(f: npt.ArrayLike) -> DensityFn:
    """``f^(y) = sum_x f(x) exp(-2 pi i x y / p)``."""
    return np.fft.fft(np.asarray(f, dtype=np.complex128))


def convolve(A: ZpSet, B: ZpSet) -> npt.NDArray[np.int64]:
    """``(A*B)(x) = #{(a, b) in A x B : a + b = x}``, in integers."""
    if A.q != B.q:
        raise ContextMismatchError("Sets live in different fields.", left=A.q, right=B.q)
    if A.degree != 1:
        raise DomainError("Convolution is defined over F_p only.")
    p = A.p
    full = np.convolve(A.indicator(), B.indicator())
    counts = full[:p].copy()
    counts[: p - 1] += full[p:]
    return counts


def sumset(A: ZpSet, B: ZpSet) -> ZpSet:
    return A.sumset(B)


def additive_ruzsa_distance(A: ZpSet, B: ZpSet) -> float:
    """``log(|A - B| / sqrt(|A| |B|))``."""
    if not len(A) or not len(B):
        raise DomainError("Ruzsa distance needs nonempty sets.")
    size = len(A.difference_set(B))
    return math.log(size) - 0.5 * (math.log(len(A)) + math.log(len(B)))


def additive_ruzsa_inequality(A: ZpSet) -> ExactInequality:
    """``d(A, -A) <= 3 d(A, A)`` as ``|A + A| |A|^2 <= |A - A|^3``."""
    diff = len(A.difference_set(A))
    return at_most("sum_by_difference", len(A.sumset(A)) * len(A) ** 2, diff**3)


def sorge_find_xi(A: ZpSet, S: ZpSet, c: Union[Fraction, float, str] = 1) -> tuple[int, SorgeCertificate]:
    """Dilate ``xi`` in ``S`` maximizing ``|A + xi A|`` (smallest on ties).

    Certifies ``|A + xi A| >= (1/p + p / (|S| |A|^2))^-1`` and counts the
    ``xi`` reaching ``c`` times that bound, which must be at least ``(1 - c)|S|``.
    """
    if A.degree != 1 or S.degree != 1 or A.p != S.p:
        raise ContextMismatchError("Dilates need two subsets of the same F_p.")
    if not len(A) or not len(S):
        raise HypothesisError("Both sets must be nonempty.", a=len(A), s=len(S))
    if 0 in S:
        raise HypothesisError("Dilations by zero are excluded.")
    ratio = Fraction(str(c)) if isinstance(c, float) else Fraction(c)
    if not 0 < ratio <= 1:
        raise DomainError(f"c must lie in (0, 1], got {ratio}.")
    p = A.p
    sizes = {int(xi): len(A.sumset(A.dilate(int(xi)))) for xi in S}
    best = max(sizes.values())
    xi = min(x for x, size in sizes.items() if size == best)
    weight = len(S) * len(A) ** 2
    # bound = p*weight / (weight + p^2)
    bound = Fraction(p * weight, weight + p * p)
    hits = sum(1 for size in sizes.values() if size >= ratio * bound)
    needed = (1 - ratio) * len(S)
    logger.debug("sorge_scan", p=p, xi=xi, best=best, hits=hits)
    return xi, SorgeCertificate(
        xi=xi,
        dilate_sum=best,
        bound=at_least("dilate_sum", best * bound.denominator, bound.numerator),
        c=str(ratio),
        scaled_hits=hits,
        scaled_hits_bound=at_least(
            "scaled_hits", hits * needed.denominator, needed.numerator
        ),
    )


def sumproduct_stats(A: ZpSet) -> SumProductStats:
    if len(A) < 2 or 0 in A:
        raise DomainError("Need at least two nonzero elements.", size=len(A))
    plus = len(A.sumset(A))
    times = len(A.productset(A))
    exponent = math.log(max(plus, times)) / math.log(len(A)) - 1
    return SumProductStats(size=len(A), sumset=plus, productset=times, exponent=exponent)


class MulBall:
    """Products of at most ``r`` elements of ``A ∪ A^-1`` (and 1) in F_q^*."""

    def __init__(self, base: ZpSet, radius: int):
        if 0 in base:
            raise DomainError("The base set must avoid zero.")
        if radius < 1:
            raise DomainError(f"Radius must be positive, got {radius}.")
        self.base = base
        self.radius = radius

    @cached_property
    def members(self) -> ZpSet:
        base = self.base
        step = ZpSet(base.p, np.concatenate([base.members, base.inverse().members, [1]]), base.degree)
        current = step
        frontier = step
        for _ in range(1, self.radius):
            grown = ZpSet(base.p, np.union1d(current.members, frontier.productset(step).members), base.degree)
            frontier = ZpSet(base.p, np.setdiff1d(grown.members, current.members), base.degree)
            current = grown
            if not len(frontier):
                break
        return current

    def __len__(self) -> int:
        return len(self.members)


def w_map(field: PackedField, x: IntArray) -> IntArray:
    """``w(x) = x + x^-1``."""
    return field.add(x, field.inv(x))


def w_identity_holds(field: PackedField, x: IntArray, y: IntArray) -> np.ndarray:
    """``w(x) w(y) = w(xy) + w(x y^-1)``, elementwise."""
    lhs = field.mul(w_map(field, x), w_map(field, y))
    rhs = field.add(w_map(field, field.mul(x, y)), w_map(field, field.mul(x, field.inv(y))))
    return lhs == rhs


def expander_sets(
    ball: MulBall,
    kind: ExpanderKind,
    a1: Optional[Fq2Elem] = None,
    a2: Optional[Fq2Elem] = None,
) -> tuple[ZpSet, ExpanderImage]:
    """Image of the amtar or corz polynomial over ``ball x ball``.

    amtar: ``(x + x^-1)(y + y^-1)``; corz: ``a1 (xy + x^-1 y^-1) + a2 (x^-1 y + x y^-1)``.
    """
    field = ball.base.field
    xs = ball.members.members
    if kind is ExpanderKind.CORZ:
        if a1 is None or a2 is None or a1 == Fq2Elem(0, 0) or a2 == Fq2Elem(0, 0):
            raise DomainError("corz needs two nonzero coefficients.")
        c1 = np.int64(field.pack(a1))
        c2 = np.int64(field.pack(a2))
    inv = field.inv(xs)
    seen = np.zeros(field.q, dtype=bool)
    rows = max(1, _BLOCK // len(xs))
    for start in range(0, len(xs), rows):
        x = xs[start : start + rows, None]
        xi = inv[start : start + rows, None]
        y = xs[None, :]
        yi = inv[None, :]
        if kind is ExpanderKind.AMTAR:
            values = field.mul(field.add(x, xi), field.add(y, yi))
        else:
            values = field.add(
                field.mul(c1, field.add(field.mul(x, y), field.mul(xi, yi))),
                field.mul(c2, field.add(field.mul(xi, y), field.mul(x, yi))),
            )
        seen[values.ravel()] = True
    image = ZpSet(field.p, np.flatnonzero(seen), field.degree)
    size = len(ball.base)
    exponent = math.log(len(image)) / math.log(size) - 1 if size > 1 else 0.0
    record = ExpanderImage(
        kind=kind.value,
        q=field.q,
        base_size=size,
        ball_size=len(ball),
        image_size=len(image),
        exponent=exponent,
    )
    logger.debug("expander_image", **record.model_dump())
    return image, record
