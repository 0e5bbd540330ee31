"""Words over a finite subset of SL_2(F_p).

A letter refers to an element of the source set by canonical index, so a
word costs memory proportional to its length whatever the size of the set.
"""
import hashlib
from typing import Iterable

import numpy as np
from pydantic import BaseModel, ConfigDict

from .constants import ContextMismatchError
from .ffield import IntArray
from .sl2 import SL2Elem, sl2_group


def context_hash(p: int, indices: IntArray) -> str:
    """Fingerprint of a source set: prime plus sorted little-endian u64 indices."""
    digest = hashlib.sha256(str(p).encode())
    digest.update(np.sort(np.asarray(indices, dtype="<u8")).tobytes())
    return digest.hexdigest()[:16]


class Letter(BaseModel):
    model_config = ConfigDict(frozen=True)

    index: int
    inverted: bool = False

    def inverse(self) -> "Letter":
        return Letter(index=self.index, inverted=not self.inverted)


class Word(BaseModel):
    model_config = ConfigDict(frozen=True)

    p: int
    context_hash: str
    letters: tuple[Letter, ...] = ()

    @classmethod
    def empty(cls, p: int, context: str) -> "Word":
        return cls(p=p, context_hash=context)

    @classmethod
    def from_pairs(
        cls, p: int, context: str, pairs: Iterable[tuple[int, int]]
    ) -> "Word":
        """Build from ``(index, exponent)`` pairs with exponent in {+1, -1}."""
        return cls(
            p=p,
            context_hash=context,
            letters=tuple(Letter(index=i, inverted=e < 0) for i, e in pairs),
        )

    def __len__(self) -> int:
        return len(self.letters)

    def __add__(self, other: "Word") -> "Word":
        if (other.p, other.context_hash) != (self.p, self.context_hash):
            raise ContextMismatchError(
                "Cannot concatenate words over different sets.",
                left=self.context_hash,
                right=other.context_hash,
            )
        return Word(
            p=self.p,
            context_hash=self.context_hash,
            letters=self.letters + other.letters,
        )

    def inverse(self) -> "Word":
        return Word(
            p=self.p,
            context_hash=self.context_hash,
            letters=tuple(letter.inverse() for letter in reversed(self.letters)),
        )

    def is_reduced(self) -> bool:
        return all(
            not (x.index == y.index and x.inverted != y.inverted)
            for x, y in zip(self.letters, self.letters[1:])
        )

    def evaluate(self) -> SL2Elem:
        group = sl2_group(self.p)
        result = group.identity
        for letter in self.letters:
            g = group.decode(letter.index)
            result = group.mul(result, group.inv(g) if letter.inverted else g)
        return result
