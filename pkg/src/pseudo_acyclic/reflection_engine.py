"""Words in the universal Coxeter group and mutated reflections.

The universal Coxeter group on ``s_1..s_n`` is the free product of ``n``
copies of ``Z/2``. Its only relations are ``s_i^2 = 1``, so a word is in
normal form exactly when no two adjacent letters agree, and equality of
group elements is equality of reduced words.
"""

from __future__ import annotations

from collections.abc import Iterable, Sequence
from dataclasses import dataclass

from .quiver_core import MutationSequence, Seed, c_sign, check_label, mutate_seed
from .utils import InvariantViolation, PreconditionError, format_label_list, parse_label_list


def _reduce(letters: Iterable[int], stack: list[int] | None = None) -> list[int]:
    reduced = [] if stack is None else stack
    for letter in letters:
        if reduced and reduced[-1] == letter:
            reduced.pop()
        else:
            reduced.append(letter)
    return reduced


@dataclass(frozen=True)
class GroupWord:
    """Reduced word; construct through :meth:`of` to reduce arbitrary input.

    >>> GroupWord.of([1, 2, 2, 3]).letters
    (1, 3)
    """

    letters: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        letters = tuple(int(letter) for letter in self.letters)
        for left, right in zip(letters, letters[1:]):
            if left == right:
                raise InvariantViolation(f"word {letters} is not reduced")
        if any(letter < 1 for letter in letters):
            raise PreconditionError(f"generator indices must be positive: {letters}")
        object.__setattr__(self, "letters", letters)

    @classmethod
    def of(cls, letters: Iterable[int]) -> GroupWord:
        return cls(tuple(_reduce(int(letter) for letter in letters)))

    @classmethod
    def generator(cls, i: int) -> GroupWord:
        return cls((i,))

    def __len__(self) -> int:
        return len(self.letters)

    def __mul__(self, other: GroupWord) -> GroupWord:
        return word_mul(self, other)

    def __str__(self) -> str:
        return format_word(self)


IDENTITY_WORD = GroupWord()


def word_mul(a: GroupWord, b: GroupWord) -> GroupWord:
    """Concatenate and cancel adjacent equal letters.

    >>> word_mul(GroupWord((1, 2)), GroupWord((2, 1))).letters
    ()
    """

    return GroupWord(tuple(_reduce(b.letters, list(a.letters))))


def word_inv(a: GroupWord) -> GroupWord:
    return GroupWord(tuple(reversed(a.letters)))


def conjugate(by: GroupWord, word: GroupWord) -> GroupWord:
    """``by · word · by⁻¹``."""

    return word_mul(word_mul(by, word), word_inv(by))


def parse_word(raw: str) -> GroupWord:
    """Parse ``2,1,2``; ``e`` is the identity.

    >>> parse_word("2,1,2").letters
    (2, 1, 2)
    """

    return GroupWord.of(parse_label_list(raw, what="group word"))


def format_word(word: GroupWord) -> str:
    return format_label_list(word.letters, empty="e")


@dataclass(frozen=True)
class ReflectionState:
    """Mutated reflections ``r_i`` with conjugators ``g_i``, ``r_i = g_i s_i g_i⁻¹``."""

    reflections: tuple[GroupWord, ...]
    conjugators: tuple[GroupWord, ...]

    def __post_init__(self) -> None:
        if len(self.reflections) != len(self.conjugators):
            raise PreconditionError("reflections and conjugators differ in length")
        check_conjugators(self)

    @classmethod
    def initial(cls, n: int) -> ReflectionState:
        return cls(
            tuple(GroupWord.generator(i) for i in range(1, n + 1)),
            tuple(IDENTITY_WORD for _ in range(n)),
        )

    @property
    def n(self) -> int:
        return len(self.reflections)

    def r(self, i: int) -> GroupWord:
        return self.reflections[check_label(i, self.n)]

    def g(self, i: int) -> GroupWord:
        return self.conjugators[check_label(i, self.n)]

    def to_dict(self) -> dict[str, list[str]]:
        return {
            "reflections": [format_word(word) for word in self.reflections],
            "conjugators": [format_word(word) for word in self.conjugators],
        }


def check_conjugators(state: ReflectionState) -> None:
    for index, (r, g) in enumerate(zip(state.reflections, state.conjugators), start=1):
        expected = conjugate(g, GroupWord.generator(index))
        if expected != r:
            raise InvariantViolation(
                f"r_{index}={format_word(r)} differs from g s g⁻¹={format_word(expected)}"
            )


def conjugated_indices(s: Seed, k: int) -> tuple[int, ...]:
    """Labels ``i`` with ``b_ik ≠ 0`` and ``sgn(b_ik)`` equal to the sign of ``c_k``."""

    sign = c_sign(s, k)
    column = s.b.entries[:, check_label(k, s.n)]
    return tuple(i + 1 for i, value in enumerate(column.tolist()) if value * sign > 0)


def mutate_reflections(r: ReflectionState, s: Seed, k: int) -> ReflectionState:
    """Update reflections for a mutation at ``k``; ``s`` is the seed before it.

    >>> from pseudo_acyclic.quiver_core import QuiverMatrix
    >>> seed = Seed.initial(QuiverMatrix.from_rows([[0, 1], [-1, 0]]))
    >>> format_word(mutate_reflections(ReflectionState.initial(2), seed, 2).r(1))
    '2,1,2'
    """

    if r.n != s.n:
        raise PreconditionError(f"state has {r.n} reflections but the seed has n={s.n}")
    targets = conjugated_indices(s, k)
    if not targets:
        return r
    r_k = r.r(k)
    reflections = list(r.reflections)
    conjugators = list(r.conjugators)
    for i in targets:
        reflections[i - 1] = conjugate(r_k, reflections[i - 1])
        conjugators[i - 1] = word_mul(r_k, conjugators[i - 1])
    return ReflectionState(tuple(reflections), tuple(conjugators))


def apply_sequence_with_reflections(
    seed: Seed, r: ReflectionState, w: MutationSequence
) -> tuple[Seed, ReflectionState]:
    for k in w:
        r = mutate_reflections(r, seed, k)
        seed = mutate_seed(seed, k)
    return seed, r


def reflections_after(seed: Seed, w: MutationSequence) -> tuple[Seed, ReflectionState]:
    """Run ``w`` from ``seed`` starting at the initial reflection state."""

    return apply_sequence_with_reflections(seed, ReflectionState.initial(seed.n), w)


def words_product(words: Sequence[GroupWord]) -> GroupWord:
    result = IDENTITY_WORD
    for word in words:
        result = word_mul(result, word)
    return result
