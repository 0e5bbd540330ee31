"""Unipotents inside a Borel subgroup, and short words for every element.

Every element handed out here comes with a :class:`Word` over the source set
that evaluates to it; words are re-evaluated before they leave the module.
Lower-triangular sets are handled through the automorphism
``g -> (g^T)^-1``, which maps them onto upper-triangular ones and ``L(y)``
onto ``U(-y)``.
"""
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Optional

import numpy as np
import structlog
from sympy import integer_nthroot

from .constants import DomainError, HypothesisError, ImplementationBugError
from .ffield import IntArray
from .gset import GroupSet
from .models import ExactInequality, at_least
from .parallel import chunked_map
from .sl2 import SL2Elem, SL2Group
from .word import Letter, Word
from .zpadd import ZpSet, sorge_find_xi

logger = structlog.get_logger(__name__)

ATTAC_WORD_BOUND = 8
FACTORIZE_WORD_BOUND = 64


class BorelElem(NamedTuple):
    """``[[r, x], [0, r^-1]]``."""

    r: int
    x: int

    @classmethod
    def from_elem(cls, g: SL2Elem) -> "BorelElem":
        if g.c:
            raise DomainError(f"{g} is not upper triangular.")
        return cls(g.a, g.b)

    def to_elem(self, group: SL2Group) -> SL2Elem:
        return group.element(self.r, self.x, 0, group.field.inv(self.r))


def unipotent(group: SL2Group, x: int) -> SL2Elem:
    return group.element(1, x, 0, 1)


def lower_unipotent(group: SL2Group, y: int) -> SL2Elem:
    return group.element(1, 0, y, 1)


def attac_threshold(p: int) -> int:
    """``floor(2 p^(5/3)) + 1``; a set is large enough iff its size exceeds this."""
    return int(integer_nthroot(8 * p**5, 3)[0]) + 1


def factorize_threshold(p: int) -> int:
    """``floor(6 p^(8/3))``."""
    return int(integer_nthroot(216 * p**8, 3)[0])


@dataclass(frozen=True)
class TrackedSet:
    """Elements of SL_2(F_p) keyed by canonical index, each with a word over a source set.

    With ``twisted`` the key of a word ``w`` is the index of ``(w^T)^-1``
    rather than of ``w`` itself.
    """

    group: SL2Group
    words: dict[int, Word]
    bound: int
    twisted: bool = False
    checks: tuple[ExactInequality, ...] = field(default=())

    def __len__(self) -> int:
        return len(self.words)

    def key_of(self, g: SL2Elem) -> int:
        return self.group.index(self.group.transpose_inverse(g) if self.twisted else g)

    def elements(self) -> list[SL2Elem]:
        return [self.group.decode(k) for k in self.words]

    def verify(self) -> None:
        for key, word in self.words.items():
            if len(word) > self.bound:
                raise ImplementationBugError("Word longer than its bound.", length=len(word), bound=self.bound)
            if self.key_of(word.evaluate()) != key:
                raise ImplementationBugError("Word does not evaluate to its element.", key=key)

    @classmethod
    def of_source(cls, A: GroupSet, twisted: bool = False) -> "TrackedSet":
        """Each element of ``A`` spelled by itself."""
        group = A.group
        context = A.context_hash
        words = {}
        for idx in A.indices:
            g = group.decode(int(idx))
            words[_key(group, g, twisted)] = Word(p=group.p, context_hash=context, letters=(Letter(index=int(idx)),))
        return cls(group, words, bound=1, twisted=twisted)


def _key(group: SL2Group, g: SL2Elem, twisted: bool) -> int:
    return group.index(group.transpose_inverse(g) if twisted else g)


def attac_unipotents(tracked: TrackedSet, force: bool = False) -> TrackedSet:
    """Words for every ``U(x)`` from a large upper-triangular tracked set.

    Products ``T R_x T^-1 R_x'^-1`` with ``R_x = [[r, x], [0, r^-1]]`` and
    ``T = [[t, u], [0, t^-1]]`` give ``U(r(t^2 x - x') + (1 - r^2) u t)``; once
    those values fill more than two thirds of F_p, two of them reach every
    residue.
    """
    group = tracked.group
    p = group.p
    if not force and len(tracked) <= attac_threshold(p):
        raise HypothesisError(
            "The set is too small: need |A| > 2p^(5/3) + 1.", size=len(tracked), threshold=attac_threshold(p)
        )
    rows: dict[int, dict[int, Word]] = {}
    for key, word in tracked.words.items():
        b = BorelElem.from_elem(group.decode(key))
        rows.setdefault(b.r, {})[b.x] = word
    r = max(sorted(rows), key=lambda k: len(rows[k]))
    P = rows[r]
    others = {t: rows[t][min(rows[t])] for t in sorted(rows) if t != r}
    if not others:
        raise HypothesisError("All elements share one diagonal entry.", r=r)
    squares = {}
    for t in others:
        squares.setdefault(-t * t % p, t)
    P_set = ZpSet(p, P)
    xi, sorge = sorge_find_xi(P_set, ZpSet(p, squares))
    t = squares[xi]
    T_word = others[t]
    u = BorelElem.from_elem(group.decode(tracked.key_of(T_word.evaluate()))).x
    dilate = at_least("dilate_two_thirds", 3 * sorge.dilate_sum, 2 * p + 1)
    if not dilate.passed and not force:
        raise ImplementationBugError("Dilate sum below 2p/3.", dilate_sum=sorge.dilate_sum, p=p)

    # first occurrence of each value in (x, x') lexicographic order
    xs = np.array(sorted(P), dtype=np.int64)
    shift = (1 - r * r) * u * t % p
    values = (r * ((t * t % p) * xs[:, None] - xs[None, :]) % p + shift) % p
    reached, first = np.unique(values.ravel(), return_index=True)
    pair_of = {int(z): (int(xs[i // len(xs)]), int(xs[i % len(xs)])) for z, i in zip(reached, first)}

    sums = (reached[:, None] + reached[None, :]) % p
    targets, first_sum = np.unique(sums.ravel(), return_index=True)
    if len(targets) < p:
        missing = sorted(set(range(p)) - {int(z) for z in targets})
        error = HypothesisError if force else ImplementationBugError
        raise error("Two-fold sums miss residues.", missing=missing[:10], reached=len(targets))

    T_inv = T_word.inverse()

    def spell(z: int) -> Word:
        x, x_prime = pair_of[z]
        return T_word + P[x] + T_inv + P[x_prime].inverse()

    context = T_word.context_hash
    words: dict[int, Word] = {}
    for y, i in zip(targets, first_sum):
        y = int(y)
        if y == 0:
            word = Word.empty(p, context)
        else:
            z1, z2 = int(reached[i // len(reached)]), int(reached[i % len(reached)])
            word = spell(z1) + spell(z2)
        words[group.index(unipotent(group, y))] = word
    result = TrackedSet(
        group,
        words,
        bound=ATTAC_WORD_BOUND * tracked.bound,
        twisted=tracked.twisted,
        checks=(dilate, sorge.bound),
    )
    result.verify()
    logger.debug("attac", p=p, r=r, t=t, values=len(reached), source=len(tracked))
    return result


def lu_decompose(group: SL2Group, g: SL2Elem) -> tuple[int, int, int, int]:
    """``(y, x, y', x')`` with ``g = L(y) U(x) L(y') U(x')``, first ``y'`` in scan order."""
    p = group.p
    a, b = g.a, g.b
    for y2 in range(p):
        lead = a * y2 % p
        rest = (1 - a + b * y2) % p
        if lead:
            x2 = rest * group.field.inv(lead) % p
        elif rest == 0:
            x2 = 0
        else:
            continue
        n_inv = group.element((1 + x2 * y2) % p, -x2 % p, -y2 % p, 1)
        m = group.mul(g, n_inv)
        if m.a != 1:
            raise ImplementationBugError("Triangular solve went wrong.", g=str(g), y2=y2)
        return m.c, m.b, y2, x2
    raise ImplementationBugError("No LU form found.", g=str(g))


def _bucket(A: GroupSet, keys: IntArray) -> IntArray:
    """Members of ``A`` in the largest class of ``keys``, smallest key on ties."""
    values, counts = np.unique(keys, return_counts=True)
    best = values[int(np.argmax(counts))]
    return A.indices[keys == best]


def _quotients(A: GroupSet, members: IntArray, twisted: bool) -> TrackedSet:
    """``{g h^-1 : g in members}`` for the first member ``h``, as length-2 words."""
    group = A.group
    context = A.context_hash
    h = int(members[0])
    h_inv = group.inv_indices(h)
    words = {}
    for g, q in zip(members, group.mul_indices(members, h_inv)):
        word = Word(
            p=group.p, context_hash=context, letters=(Letter(index=int(g)), Letter(index=h, inverted=True))
        )
        words[_key(group, group.decode(int(q)), twisted)] = word
    return TrackedSet(group, words, bound=2, twisted=twisted)


class Factorizer:
    """Words of length at most 64 over a very large subset of SL_2(F_p)."""

    def __init__(self, A: GroupSet, force: bool = False):
        group = A.group
        p = group.p
        if not force and len(A) <= factorize_threshold(p):
            raise HypothesisError(
                "The set is too small: need |A| > 6p^(8/3).", size=len(A), threshold=factorize_threshold(p)
            )
        self.A = A
        self.group = group
        a, b, c, d = group.decode_array(A.indices)
        inv = group.field.inv_table
        # projective lower and upper rows; p stands for the point at infinity
        lower_rows = np.where(c != 0, d * inv[c] % p, p)
        upper_rows = np.where(a != 0, b * inv[a] % p, p)
        upper = _bucket(A, lower_rows)
        lower = _bucket(A, upper_rows)
        threshold = attac_threshold(p)
        if min(len(upper), len(lower)) <= threshold:
            error = HypothesisError if force else ImplementationBugError
            raise error(
                "Bucket extraction shortfall.", upper=len(upper), lower=len(lower), threshold=threshold
            )
        self.upper = attac_unipotents(_quotients(A, upper, twisted=False), force)
        self.lower = attac_unipotents(_quotients(A, lower, twisted=True), force)

    def _upper_word(self, x: int) -> Word:
        return self.upper.words[self.group.index(unipotent(self.group, x))]

    def _lower_word(self, y: int) -> Word:
        return self.lower.words[self.group.index(unipotent(self.group, -y % self.group.p))]

    def factorize(self, target: SL2Elem) -> Word:
        group = self.group
        idx = group.index(target)
        if idx in self.A:
            word = Word(p=group.p, context_hash=self.A.context_hash, letters=(Letter(index=idx),))
        else:
            y, x, y2, x2 = lu_decompose(group, target)
            word = self._lower_word(y) + self._upper_word(x) + self._lower_word(y2) + self._upper_word(x2)
        if len(word) > FACTORIZE_WORD_BOUND or word.evaluate() != target:
            raise ImplementationBugError("Factorization failed its check.", target=str(target), length=len(word))
        return word


def factorize(A: GroupSet, target: SL2Elem, force: bool = False) -> Word:
    if target in A:
        group = A.group
        return Word(p=group.p, context_hash=A.context_hash, letters=(Letter(index=group.index(target)),))
    return Factorizer(A, force).factorize(target)


def factorize_many(
    A: GroupSet, targets: Iterable[SL2Elem], force: bool = False, workers: Optional[int] = None
) -> list[Word]:
    factorizer = Factorizer(A, force)
    return chunked_map(factorizer.factorize, list(targets), workers)
