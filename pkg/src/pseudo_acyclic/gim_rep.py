"""Generalized intersection matrices and the reflection representation π.

``π(s_i)`` acts on coordinate columns of the lattice with basis
``α_1..α_n``: it sends ``e_j`` to ``e_j - a_ji e_i``. As a matrix it is the
identity except for row ``i``, which is ``e_i - (column i of A)``.
"""

from __future__ import annotations

from collections.abc import Iterator, Sequence
from dataclasses import dataclass
from functools import lru_cache
from itertools import permutations
from typing import Any

import numpy as np
import numpy.typing as npt

from .intmat import (
    IntArray,
    as_int_matrix,
    checked_matmul,
    checked_power,
    checked_product,
    identity,
    is_identity,
    matrix_key,
    to_rows,
)
from .quiver_core import QuiverMatrix, check_label
from .reflection_engine import GroupWord, ReflectionState
from .utils import InvariantViolation, PreconditionError, format_label_list, parse_label_list

PiMatrix = npt.NDArray[np.int64]
LMatrix = npt.NDArray[np.int64]


@dataclass(frozen=True)
class LinearOrdering:
    """Total order ``≺`` on ``1..n`` stored as ranks (``rank[label-1]``).

    >>> LinearOrdering.parse("3,1,2").precedes(3, 1)
    True
    """

    rank: tuple[int, ...]

    def __post_init__(self) -> None:
        rank = tuple(int(value) for value in self.rank)
        if sorted(rank) != list(range(1, len(rank) + 1)):
            raise PreconditionError(f"ranks {rank} are not a bijection onto 1..{len(rank)}")
        object.__setattr__(self, "rank", rank)

    @classmethod
    def from_chain(cls, chain: Sequence[int]) -> LinearOrdering:
        labels = [int(label) for label in chain]
        n = len(labels)
        if sorted(labels) != list(range(1, n + 1)):
            raise PreconditionError(f"ordering {labels} is not a permutation of 1..{n}")
        rank = [0] * n
        for position, label in enumerate(labels, start=1):
            rank[label - 1] = position
        return cls(tuple(rank))

    @classmethod
    def parse(cls, raw: str) -> LinearOrdering:
        return cls.from_chain(parse_label_list(raw, what="ordering"))

    @classmethod
    def identity(cls, n: int) -> LinearOrdering:
        return cls(tuple(range(1, n + 1)))

    @property
    def n(self) -> int:
        return len(self.rank)

    @property
    def chain(self) -> tuple[int, ...]:
        """Labels in ≺-ascending order."""

        ordered = [0] * self.n
        for label, position in enumerate(self.rank, start=1):
            ordered[position - 1] = label
        return tuple(ordered)

    def precedes(self, i: int, j: int) -> bool:
        return self.rank[check_label(i, self.n)] < self.rank[check_label(j, self.n)]

    def format(self) -> str:
        return format_label_list(self.chain)

    def describe(self) -> str:
        return "≺".join(str(label) for label in self.chain)


def all_orderings(n: int) -> Iterator[LinearOrdering]:
    for chain in permutations(range(1, n + 1)):
        yield LinearOrdering.from_chain(chain)


@dataclass(frozen=True, eq=False)
class Gim:
    """Generalized intersection matrix: ``a_ii = 2`` and sign-symmetric off-diagonal.

    >>> build_gim(QuiverMatrix.from_rows([[0, 1], [-1, 0]]), LinearOrdering.identity(2)).to_rows()
    [[2, 1], [1, 2]]
    """

    entries: IntArray

    def __post_init__(self) -> None:
        entries = as_int_matrix(self.entries)
        rows, cols = entries.shape
        if rows != cols:
            raise InvariantViolation(f"GIM must be square, got {rows}x{cols}")
        if not bool((np.diag(entries) == 2).all()):
            raise InvariantViolation("GIM diagonal must be 2")
        if not bool((np.sign(entries) == np.sign(entries.T)).all()):
            raise InvariantViolation("GIM off-diagonal entries are not sign-symmetric")
        object.__setattr__(self, "entries", entries)

    @property
    def n(self) -> int:
        return int(self.entries.shape[0])

    def a(self, i: int, j: int) -> int:
        return int(self.entries[check_label(i, self.n), check_label(j, self.n)])

    def to_rows(self) -> list[list[int]]:
        return to_rows(self.entries)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Gim):
            return NotImplemented
        return bool(np.array_equal(self.entries, other.entries))

    def __hash__(self) -> int:
        return hash(matrix_key(self.entries))


def build_gim(b: QuiverMatrix, ord: LinearOrdering) -> Gim:
    if ord.n != b.n:
        raise PreconditionError(f"ordering covers {ord.n} labels but the quiver has n={b.n}")
    rank = np.array(ord.rank)
    before = rank[:, None] < rank[None, :]
    entries = np.where(before, b.entries, -b.entries)
    np.fill_diagonal(entries, 2)
    return Gim(entries)


def pi_generator(a: Gim, i: int) -> PiMatrix:
    """``π(s_i)``; column ``j`` is ``e_j - a_ji e_i``.

    >>> gim = Gim(as_int_matrix([[2, 1], [1, 2]]))
    >>> pi_generator(gim, 1).tolist()
    [[-1, -1], [0, 1]]
    """

    return _pi_generators(a)[check_label(i, a.n)]


@lru_cache(maxsize=4096)
def _pi_generators(a: Gim) -> tuple[PiMatrix, ...]:
    generators: list[PiMatrix] = []
    for i in range(a.n):
        matrix = np.eye(a.n, dtype=np.int64)
        matrix[i, :] -= a.entries[:, i]
        matrix[i, i] = -1
        generators.append(as_int_matrix(matrix))
    return tuple(generators)


def pi_generators(a: Gim) -> tuple[PiMatrix, ...]:
    return _pi_generators(a)


def pi_of_word(a: Gim, w: GroupWord) -> PiMatrix:
    generators = _pi_generators(a)
    for letter in w.letters:
        check_label(letter, a.n, what="generator")
    return checked_product([generators[letter - 1] for letter in w.letters], a.n)


def pi_images(a: Gim, state: ReflectionState) -> tuple[PiMatrix, ...]:
    return tuple(pi_of_word(a, word) for word in state.reflections)


def l_matrix(a: Gim, r: ReflectionState) -> LMatrix:
    rows = [pi_of_word(a, g)[:, index] for index, g in enumerate(r.conjugators)]
    return as_int_matrix(np.vstack(rows))


def l_matrix_from_conjugators(conjugator_images: Sequence[PiMatrix]) -> LMatrix:
    """L-matrix from precomputed ``π(g_i)``: row ``i`` is ``π(g_i) e_i``."""

    rows = [image[:, index] for index, image in enumerate(conjugator_images)]
    return as_int_matrix(np.vstack(rows))


def rows_equal_up_to_sign(x: LMatrix, y: LMatrix) -> bool:
    if x.shape != y.shape:
        raise PreconditionError(f"cannot compare L-matrices of shapes {x.shape} and {y.shape}")
    for left, right in zip(x, y):
        if not (np.array_equal(left, right) or np.array_equal(left, -right)):
            return False
    return True


def relation_order(m: PiMatrix, max_order: int = 12) -> int | None:
    """Smallest ``k ≤ max_order`` with ``m^k = I``.

    >>> relation_order(as_int_matrix([[0, 1], [1, 0]]))
    2
    """

    power = identity(m.shape[0])
    for exponent in range(1, max_order + 1):
        power = checked_matmul(power, m)
        if is_identity(power):
            return exponent
    return None


def pair_relation_holds(x: PiMatrix, y: PiMatrix, exponent: int) -> bool:
    return is_identity(checked_power(checked_matmul(x, y), exponent))


def gim_report(a: Gim, state: ReflectionState) -> dict[str, Any]:
    return {
        "gim": a.to_rows(),
        "pi": [to_rows(image) for image in pi_images(a, state)],
        "L": to_rows(l_matrix(a, state)),
    }
