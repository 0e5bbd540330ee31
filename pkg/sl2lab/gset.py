"""Finite subsets of SL_2(F_p) and their product-set algebra.

A :class:`GroupSet` keeps its members as a sorted, duplicate-free ``int64``
array of canonical indices. When the universe is small enough, or the set is
a sizeable fraction of it, membership queries go through a dense boolean
mask over the whole group instead of a binary search.
"""
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator, Optional, Union

import numpy as np
import structlog

from .constants import (
    DEFAULT_CLOSURE_CAP,
    DENSE_STORAGE_LIMIT,
    CapExceededError,
    ContextMismatchError,
    DomainError,
    FixtureKind,
    HypothesisError,
    Storage,
)
from .ffield import IntArray
from .models import ExactInequality, GrowthCertificate, RuzsaCover, at_most
from .parallel import chunked_map, split
from .sl2 import SL2Elem, SL2Group
from .word import context_hash

logger = structlog.get_logger(__name__)

# products per vectorized block
_BLOCK = 1 << 22


class GroupSet:
    def __init__(self, group: SL2Group, indices: Union[IntArray, Iterable[int]] = ()):
        self.group = group
        if not isinstance(indices, np.ndarray):
            indices = np.fromiter(indices, dtype=np.int64)
        self._indices = np.unique(indices.astype(np.int64, copy=False))
        if self._indices.size and (
            self._indices[0] < 0 or self._indices[-1] >= group.order
        ):
            raise DomainError("Index outside the group.", p=group.p)
        self._indices.setflags(write=False)
        self._balls: dict[int, GroupSet] = {}

    @classmethod
    def of(cls, group: SL2Group, elements: Iterable[SL2Elem]) -> "GroupSet":
        return cls(group, [group.index(g) for g in elements])

    @classmethod
    def full(cls, group: SL2Group) -> "GroupSet":
        return cls(group, group.all_indices())

    @property
    def p(self) -> int:
        return self.group.p

    @property
    def indices(self) -> IntArray:
        return self._indices

    @property
    def storage(self) -> Storage:
        universe = self.group.order
        if universe <= DENSE_STORAGE_LIMIT or len(self) > universe // 64:
            return Storage.DENSE
        return Storage.SPARSE

    @cached_property
    def mask(self) -> np.ndarray:
        mask = np.zeros(self.group.order, dtype=bool)
        mask[self._indices] = True
        return mask

    @cached_property
    def context_hash(self) -> str:
        return context_hash(self.p, self._indices)

    def __len__(self) -> int:
        return int(self._indices.size)

    def __iter__(self) -> Iterator[SL2Elem]:
        return (self.group.decode(int(i)) for i in self._indices)

    def __contains__(self, item: Union[SL2Elem, int]) -> bool:
        idx = self.group.index(item) if isinstance(item, SL2Elem) else int(item)
        return bool(self.contains_indices(np.array([idx], dtype=np.int64))[0])

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, GroupSet)
            and other.group == self.group
            and np.array_equal(other._indices, self._indices)
        )

    def __repr__(self) -> str:
        return f"GroupSet(p={self.p}, size={len(self)})"

    def contains_indices(self, idx: IntArray) -> np.ndarray:
        if self.storage is Storage.DENSE:
            return self.mask[idx]
        pos = np.searchsorted(self._indices, idx)
        pos = np.minimum(pos, max(len(self) - 1, 0))
        return (self._indices[pos] == idx) if len(self) else np.zeros(len(idx), bool)

    def elements(self) -> list[SL2Elem]:
        return list(self)

    def _same(self, other: "GroupSet") -> None:
        if other.group != self.group:
            raise ContextMismatchError(
                "Sets live over different primes.", left=self.p, right=other.p
            )

    def inverse(self) -> "GroupSet":
        return GroupSet(self.group, self.group.inv_indices(self._indices))

    def union(self, other: "GroupSet") -> "GroupSet":
        self._same(other)
        return GroupSet(self.group, np.union1d(self._indices, other._indices))

    def intersection(self, other: "GroupSet") -> "GroupSet":
        self._same(other)
        return GroupSet(self.group, np.intersect1d(self._indices, other._indices))

    def difference(self, other: "GroupSet") -> "GroupSet":
        self._same(other)
        return GroupSet(self.group, np.setdiff1d(self._indices, other._indices))

    def issubset(self, other: "GroupSet") -> bool:
        self._same(other)
        return bool(other.contains_indices(self._indices).all())

    def filter(self, keep: np.ndarray) -> "GroupSet":
        return GroupSet(self.group, self._indices[keep])

    def conjugate(self, g: SL2Elem) -> "GroupSet":
        """``g A g^-1``."""
        group = self.group
        left = group.index(g)
        right = group.index(group.inv(g))
        return GroupSet(group, group.mul_indices(group.mul_indices(left, self._indices), right))

    def traces(self) -> IntArray:
        return np.unique(self.group.trace_indices(self._indices))

    def __mul__(self, other: "GroupSet") -> "GroupSet":
        return product_set(self, other)

    # balls

    def ball(self, r: int) -> "GroupSet":
        return ball(self, r)

    # serialization

    def to_json(self) -> list[int]:
        return [int(i) for i in self._indices]

    @classmethod
    def from_json(cls, group: SL2Group, data: list[int]) -> "GroupSet":
        return cls(group, data)

    def to_bytes(self) -> bytes:
        count = np.array([len(self)], dtype="<u8")
        return count.tobytes() + self._indices.astype("<u8").tobytes()

    @classmethod
    def from_bytes(cls, group: SL2Group, data: bytes) -> "GroupSet":
        (count,) = np.frombuffer(data[:8], dtype="<u8")
        body = np.frombuffer(data[8:], dtype="<u8")
        if body.size != count:
            raise DomainError("Truncated set encoding.", expected=int(count), found=body.size)
        return cls(group, body.astype(np.int64))


def _check_context(*sets: GroupSet) -> SL2Group:
    group = sets[0].group
    for s in sets[1:]:
        if s.group != group:
            raise ContextMismatchError("Sets live over different primes.", left=group.p, right=s.p)
    return group


def product_set(A: GroupSet, B: GroupSet, workers: Optional[int] = None) -> GroupSet:
    """``{ab : a in A, b in B}``, exact.

    The smaller operand is streamed row by row against the whole larger one;
    rows are split between workers and the partial results merged by union.
    """
    group = _check_context(A, B)
    if not len(A) or not len(B):
        return GroupSet(group)
    if len(A) + len(B) > group.order:
        # g B^-1 meets A for every g
        return GroupSet.full(group)
    left_small = len(A) <= len(B)
    small, large = (A, B) if left_small else (B, A)
    rows = max(1, _BLOCK // len(large))
    dense = group.order <= DENSE_STORAGE_LIMIT

    def scatter(chunk: IntArray) -> IntArray:
        seen = np.zeros(group.order, dtype=bool) if dense else None
        found: list[IntArray] = []
        for start in range(0, len(chunk), rows):
            block = chunk[start : start + rows, None]
            if left_small:
                prod = group.mul_indices(block, large.indices[None, :])
            else:
                prod = group.mul_indices(large.indices[None, :], block)
            if seen is not None:
                seen[prod.ravel()] = True
            else:
                found.append(np.unique(prod))
        if seen is not None:
            return np.flatnonzero(seen)
        return np.unique(np.concatenate(found)) if found else np.empty(0, np.int64)

    parts = chunked_map(scatter, split(small.indices, workers, min_chunk=rows), workers)
    result = parts[0] if len(parts) == 1 else np.unique(np.concatenate(parts))
    return GroupSet(group, result)


def ball(A: GroupSet, r: int) -> GroupSet:
    """``A_r``: products of at most ``r`` elements of ``A ∪ A^-1 ∪ {1}``."""
    if r < 1:
        raise DomainError(f"Radius must be positive, got {r}.")
    cache = A._balls  # pylint: disable=protected-access
    if 1 not in cache:
        identity = GroupSet(A.group, [A.group.identity_index])
        cache[1] = A.union(A.inverse()).union(identity)
    step = cache[1]
    done = max(k for k in cache if k <= r)
    current = cache[done]
    previous = cache.get(done - 1)
    while done < r:
        if previous is not None and len(previous) == len(current):
            for k in range(done + 1, r + 1):
                cache[k] = current
            break
        sphere = current if previous is None else current.difference(previous)
        grown = current.union(product_set(sphere, step))
        done += 1
        logger.debug("ball_radius", radius=done, size=len(grown))
        previous, current = current, grown
        cache[done] = current
    return current


def ruzsa_distance(A: GroupSet, B: GroupSet) -> float:
    """``log(|A B^-1| / sqrt(|A| |B|))``."""
    _check_context(A, B)
    if not len(A) or not len(B):
        raise DomainError("Ruzsa distance needs nonempty sets.")
    size = len(product_set(A, B.inverse()))
    return math.log(size) - 0.5 * (math.log(len(A)) + math.log(len(B)))


def ruzsa_triangle(A: GroupSet, B: GroupSet, C: GroupSet) -> ExactInequality:
    """``|A C^-1| |B| <= |A B^-1| |B C^-1|``."""
    lhs = len(product_set(A, C.inverse())) * len(B)
    rhs = len(product_set(A, B.inverse())) * len(product_set(B, C.inverse()))
    return at_most("ruzsa_triangle", lhs, rhs)


def ruzsa_cover(A: GroupSet, B: GroupSet) -> RuzsaCover:
    """Greedy maximal family of disjoint translates ``a B`` with ``a`` in ``A``.

    Every ``a`` in ``A`` then lies in some ``a_j B B^-1``.
    """
    group = _check_context(A, B)
    if not len(B):
        raise DomainError("Covering needs a nonempty set.")
    taken = GroupSet(group)
    representatives: list[int] = []
    for a in A.indices:
        translate = group.mul_indices(a, B.indices)
        if len(taken) and taken.contains_indices(translate).any():
            continue
        representatives.append(int(a))
        taken = GroupSet(group, np.concatenate([taken.indices, translate]))
    reps = GroupSet(group, representatives)
    covers = A.issubset(product_set(reps, product_set(B, B.inverse())))
    bound = at_most(
        "cover_count", len(representatives) * len(B), len(product_set(A, B))
    )
    return RuzsaCover(representatives=representatives, covers=covers, bound=bound)


@dataclass(frozen=True)
class GenerationResult:
    generates: Optional[bool]
    closure: GroupSet

    @property
    def decided(self) -> bool:
        return self.generates is not None


def generates(A: GroupSet, cap: int = DEFAULT_CLOSURE_CAP) -> GenerationResult:
    """Closure of ``A`` by frontier search; undecided once the closure outgrows ``cap``."""
    group = A.group
    if not len(A):
        return GenerationResult(False, A)
    r = 1
    current = A.ball(1)
    while True:
        if len(current) == group.order:
            return GenerationResult(True, current)
        if len(current) > cap:
            logger.info("closure_undecided", p=group.p, size=len(current), cap=cap)
            return GenerationResult(None, current)
        grown = A.ball(r + 1)
        if len(grown) == len(current):
            return GenerationResult(False, current)
        r, current = r + 1, grown


def require_generating(A: GroupSet, cap: int = DEFAULT_CLOSURE_CAP) -> None:
    result = generates(A, cap)
    if result.generates is None:
        raise CapExceededError(
            "Cannot decide generation at this scale.",
            closure=len(result.closure),
            cap=cap,
        )
    if not result.generates:
        raise HypothesisError(
            "The set does not generate the group.",
            closure=len(result.closure),
            order=A.group.order,
        )


# standard subsets


def borel_subgroup(group: SL2Group) -> GroupSet:
    """Upper-triangular matrices ``[[r, x], [0, r^-1]]``."""
    p = group.p
    r, x = np.meshgrid(np.arange(1, p, dtype=np.int64), np.arange(p, dtype=np.int64), indexing="ij")
    r, x = r.ravel(), x.ravel()
    zero = np.zeros_like(r)
    return GroupSet(group, group.index_array(r, x, zero, group.field.inv_table[r]))


def diagonal_torus(group: SL2Group) -> GroupSet:
    p = group.p
    r = np.arange(1, p, dtype=np.int64)
    zero = np.zeros_like(r)
    return GroupSet(group, group.index_array(r, zero, zero, group.field.inv_table[r]))


def pathological_fixtures(group: SL2Group, kind: FixtureKind) -> GroupSet:
    """A coset ``gH`` or ``H ∪ {g}`` of the Borel subgroup, ``g`` lower unipotent."""
    if group.p < 5:
        raise DomainError("Fixtures need p >= 5.", p=group.p)
    H = borel_subgroup(group)
    g = group.element(1, 0, 1, 1)
    if kind is FixtureKind.COSET:
        return GroupSet(group, group.mul_indices(group.index(g), H.indices))
    return H.union(GroupSet.of(group, [g]))


# inequalities between balls


def furcht_certificate(A: GroupSet, n_max: int = 6) -> GrowthCertificate:
    """Controls ``|A_n|`` by ``|A_3|`` and ``|A_3|``-type products by ``|AAA|``."""
    size = len(A)
    a3 = len(A.ball(3))
    inv = A.inverse()
    aaa = len(product_set(product_set(A, A), A))
    aa_inv = product_set(A, A)
    aaa_inv = len(product_set(aa_inv, inv))
    aa_inv_a = len(product_set(product_set(A, inv), A))
    inequalities = [
        at_most(f"ball_{n}_chain", len(A.ball(n)) * size ** (n - 3), a3 ** (n - 2))
        for n in range(4, n_max + 1)
    ]
    inequalities += [
        at_most("aai_by_aaa", aaa_inv * size, aaa * aaa),
        at_most("aia_by_aaa", aa_inv_a * size, aaa_inv * aaa),
    ]
    cardinalities = {"A": size, "A_3": a3, "AAA": aaa, "AAA^-1": aaa_inv, "AA^-1A": aa_inv_a}
    cardinalities.update({f"A_{n}": len(A.ball(n)) for n in range(4, n_max + 1)})
    return GrowthCertificate(stage="furcht", cardinalities=cardinalities, inequalities=inequalities)


def doubling_inequality(A: GroupSet) -> ExactInequality:
    """``d(A, A) <= 2 d(A, A^-1)`` in the form ``|A A^-1| |A| <= |A A|^2``."""
    aa = len(product_set(A, A))
    return at_most("distance_to_inverse", len(product_set(A, A.inverse())) * len(A), aa * aa)


def tripling_exponent(A: GroupSet) -> float:
    """``log(|AAA| / |A|) / log |A|``."""
    if len(A) < 2:
        return 0.0
    aaa = len(product_set(product_set(A, A), A))
    return math.log(aaa / len(A)) / math.log(len(A))


def random_subset(group: SL2Group, size: int, rng: np.random.Generator) -> GroupSet:
    return GroupSet(group, rng.choice(group.order, size=size, replace=False))
