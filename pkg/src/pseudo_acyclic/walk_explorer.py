"""Exchange-graph exploration, elementary swaps and walk-level checks.

Walks are followed with :class:`TrackedState`, which carries the seed
together with the matrices ``π(r_i)`` and ``π(g_i)``. A mutation at ``k``
conjugates ``π(r_i)`` by ``π(r_k)`` and left-multiplies ``π(g_i)`` by
``π(r_k)`` for exactly the labels returned by ``conjugated_indices``.
"""

from __future__ import annotations

import time
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from functools import lru_cache
from itertools import combinations, permutations
from typing import Any

import numpy as np
import numpy.typing as npt

from .config import DEFAULT_MAX_VIOLATIONS, DEFAULT_NODE_BUDGET, DEFAULT_WORKERS
from .events import emit_event
from .gim_rep import (
    Gim,
    LinearOrdering,
    LMatrix,
    PiMatrix,
    all_orderings,
    build_gim,
    l_matrix_from_conjugators,
    pi_generators,
    relation_order,
)
from .intmat import (
    IntArray,
    bareiss_determinant,
    checked_matmul,
    checked_power,
    checked_product,
    identity,
    is_identity,
    to_rows,
)
from .quiver_core import (
    MutationSequence,
    Permutation,
    QuiverMatrix,
    Seed,
    apply_sequence,
    check_label,
    mutate_matrix_stack,
    mutate_seed,
    oriented_cycle_quiver,
    permute_matrix,
)
from .reflection_engine import (
    conjugated_indices,
    format_word,
    reflections_after,
    words_product,
)
from .utils import BudgetExceededError, InvariantViolation, PreconditionError


@dataclass(frozen=True, eq=False)
class TrackedState:
    """Seed plus ``π(r_i)`` and ``π(g_i)`` along a walk from the initial seed."""

    seed: Seed
    pi: tuple[PiMatrix, ...]
    g: tuple[PiMatrix, ...]

    @classmethod
    def initial(cls, b: QuiverMatrix, a: Gim) -> TrackedState:
        if a.n != b.n:
            raise PreconditionError(f"GIM has n={a.n} but the quiver has n={b.n}")
        unit = identity(b.n)
        return cls(Seed.initial(b), pi_generators(a), tuple(unit for _ in range(b.n)))

    @property
    def n(self) -> int:
        return self.seed.n

    def step(self, k: int) -> TrackedState:
        targets = conjugated_indices(self.seed, k)
        pi = list(self.pi)
        g = list(self.g)
        pivot = self.pi[k - 1]
        for i in targets:
            pi[i - 1] = checked_matmul(checked_matmul(pivot, pi[i - 1]), pivot)
            g[i - 1] = checked_matmul(pivot, g[i - 1])
        return TrackedState(mutate_seed(self.seed, k), tuple(pi), tuple(g))

    def run(self, w: MutationSequence | Sequence[int]) -> TrackedState:
        state = self
        for k in w:
            state = state.step(k)
        return state

    def l_matrix(self) -> LMatrix:
        return l_matrix_from_conjugators(self.g)


def _mul(*factors: PiMatrix) -> PiMatrix:
    return checked_product(factors, factors[0].shape[0])


def _images_differ(left: Sequence[PiMatrix], right: Sequence[PiMatrix]) -> list[int]:
    return [
        index
        for index, (x, y) in enumerate(zip(left, right), start=1)
        if not np.array_equal(x, y)
    ]


# --- reports ---------------------------------------------------------------


@dataclass(frozen=True)
class Violation:
    """A counterexample; both witnesses are re-runnable mutation sequences."""

    kind: str
    witness: MutationSequence
    other: MutationSequence | None = None
    index: int | None = None
    indices: tuple[int, ...] = ()
    expected: PiMatrix | None = field(default=None, compare=False)
    actual: PiMatrix | None = field(default=None, compare=False)
    detail: str = ""

    def to_dict(self) -> dict[str, Any]:
        payload: dict[str, Any] = {
            "kind": self.kind,
            "witness": list(self.witness.indices),
        }
        if self.other is not None:
            payload["other"] = list(self.other.indices)
        if self.index is not None:
            payload["index"] = self.index
        if self.indices:
            payload["indices"] = list(self.indices)
        if self.expected is not None:
            payload["expected"] = to_rows(self.expected)
        if self.actual is not None:
            payload["actual"] = to_rows(self.actual)
        if self.detail:
            payload["detail"] = self.detail
        return payload

    def describe(self) -> str:
        where = self.witness.describe()
        if self.other is not None:
            where += f" vs {self.other.describe()}"
        target = f" index {self.index}" if self.index is not None else ""
        if self.indices:
            target = f" indices {self.indices}"
        return f"{self.kind} at {where}{target}: {self.detail}".rstrip(": ")


@dataclass(frozen=True)
class RelationFailure:
    kind: str
    indices: tuple[int, ...]
    exponent: int
    product: PiMatrix = field(compare=False)
    order: int | None = None

    def describe(self) -> str:
        labels = ",".join(str(index) for index in self.indices)
        if self.kind == "triangle":
            i, j, k = self.indices
            word = f"r_{j} r_{i} r_{j} r_{k}"
        else:
            i, j = self.indices
            word = f"r_{i} r_{j}"
        found = "infinite" if self.order is None else str(self.order)
        return f"(π({word}))^{self.exponent} ≠ I for ({labels}); order {found}"


@lru_cache(maxsize=None)
def _relation_layout(n: int) -> tuple[npt.NDArray[np.intp], npt.NDArray[np.intp]]:
    """Label pairs ``i < j`` and every ordering of every label triple, 0-based."""

    pairs = np.array(list(combinations(range(n), 2)), dtype=np.intp).reshape(-1, 2)
    triples = np.array(
        [ordered for triple in combinations(range(n), 3) for ordered in permutations(triple)],
        dtype=np.intp,
    ).reshape(-1, 3)
    return pairs, triples


def _is_unit(stack: IntArray) -> npt.NDArray[np.bool_]:
    return (stack == identity(stack.shape[-1])).all(axis=(-2, -1))


def _relation_failures(b_stack: IntArray, pi_stack: IntArray) -> list[list[RelationFailure]]:
    """Relation suite for ``S`` seeds at once: ``(S, n, n)`` exchange matrices
    and ``(S, n, n, n)`` reflection images. Failures per seed list pairs
    before triangles, each in label order."""

    count, n = b_stack.shape[:2]
    failures: list[list[RelationFailure]] = [[] for _ in range(count)]
    pairs, triples = _relation_layout(n)
    weight = np.abs(b_stack[:, pairs[:, 0], pairs[:, 1]])
    seeds, slots = np.nonzero(weight <= 1)
    if len(seeds):
        left, right = pairs[slots, 0], pairs[slots, 1]
        product = checked_matmul(pi_stack[seeds, left], pi_stack[seeds, right])
        squared = checked_matmul(product, product)
        braid = weight[seeds, slots] == 1
        bad = ~_is_unit(squared) & ~braid
        if braid.any():
            bad[braid] = ~_is_unit(checked_matmul(squared[braid], product[braid]))
        for row in np.flatnonzero(bad):
            exponent = 3 if braid[row] else 2
            failures[seeds[row]].append(
                RelationFailure(
                    kind="braid" if braid[row] else "commute",
                    indices=(int(left[row]) + 1, int(right[row]) + 1),
                    exponent=exponent,
                    product=checked_power(product[row], exponent),
                    order=relation_order(product[row]),
                )
            )
    if len(triples):
        first, middle, last = triples[:, 0], triples[:, 1], triples[:, 2]
        epsilon = b_stack[:, last, first]
        oriented = (
            (np.abs(epsilon) == 1)
            & (b_stack[:, first, middle] == epsilon)
            & (b_stack[:, middle, last] == epsilon)
        )
        seeds, slots = np.nonzero(oriented)
        if len(seeds):
            i, j, k = first[slots], middle[slots], last[slots]
            outer = pi_stack[seeds, j]
            product = checked_matmul(
                checked_matmul(checked_matmul(outer, pi_stack[seeds, i]), outer),
                pi_stack[seeds, k],
            )
            squared = checked_matmul(product, product)
            for row in np.flatnonzero(~_is_unit(squared)):
                failures[seeds[row]].append(
                    RelationFailure(
                        kind="triangle",
                        indices=(int(i[row]) + 1, int(j[row]) + 1, int(k[row]) + 1),
                        exponent=2,
                        product=squared[row],
                        order=relation_order(product[row]),
                    )
                )
    return failures


def check_relation_suite(
    b_current: QuiverMatrix, images: Sequence[PiMatrix]
) -> list[RelationFailure]:
    """Commutation, braid and triangle relations among ``π(r_i)`` at one seed."""

    if len(images) != b_current.n:
        raise PreconditionError(f"expected {b_current.n} reflection images, got {len(images)}")
    return _relation_failures(b_current.entries[None], np.stack(images)[None])[0]


def _l_matrices(g_stack: IntArray) -> IntArray:
    """``L[s, i] = π(g_i) e_i`` for every seed ``s`` of the stack."""

    return np.swapaxes(np.diagonal(g_stack, axis1=1, axis2=3), 1, 2)


class _SeedStore:
    """Growable stacks of ``B``, ``C``, ``π(r_i)`` and ``π(g_i)``, one slot per labelled seed."""

    def __init__(self, n: int, capacity: int = 64) -> None:
        self.size = 0
        self.b = np.zeros((capacity, n, n), dtype=np.int64)
        self.c = np.zeros((capacity, n, n), dtype=np.int64)
        self.pi = np.zeros((capacity, n, n, n), dtype=np.int64)
        self.g = np.zeros((capacity, n, n, n), dtype=np.int64)

    def extend(self, b: IntArray, c: IntArray, pi: IntArray, g: IntArray) -> range:
        stop = self.size + len(b)
        if stop > len(self.b):
            capacity = max(stop, 2 * len(self.b))
            for name in ("b", "c", "pi", "g"):
                old = getattr(self, name)
                grown = np.zeros((capacity, *old.shape[1:]), dtype=np.int64)
                grown[: self.size] = old[: self.size]
                setattr(self, name, grown)
        self.b[self.size : stop] = b
        self.c[self.size : stop] = c
        self.pi[self.size : stop] = pi
        self.g[self.size : stop] = g
        added = range(self.size, stop)
        self.size = stop
        return added


Layer = tuple[IntArray, IntArray, IntArray, IntArray]


@dataclass(frozen=True)
class VerificationReport:
    """Outcome of an exchange-graph walk; ``verdict`` is ``pass`` or ``fail``."""

    ordering: LinearOrdering
    seeds: int
    edges: int
    depth: int
    violations: tuple[Violation, ...] = ()
    truncated: bool = False

    @property
    def verdict(self) -> str:
        return "fail" if self.violations else "pass"

    @property
    def passed(self) -> bool:
        return not self.violations

    @property
    def first_violation(self) -> Violation | None:
        return self.violations[0] if self.violations else None

    def to_dict(self) -> dict[str, Any]:
        return {
            "verdict": self.verdict,
            "ordering": self.ordering.format(),
            "seeds": self.seeds,
            "edges": self.edges,
            "depth": self.depth,
            "violations": [violation.to_dict() for violation in self.violations],
            "truncated": self.truncated,
        }


class ExchangeGraphExplorer:
    """Breadth-first walk of the labelled exchange graph from ``[B | I]``.

    A whole layer is mutated at once on stacked arrays; child ``f·n + k - 1``
    is parent ``f`` mutated at ``k``. New seeds are numbered in that order,
    first writer wins. With ``workers > 1`` the parents of a layer are split
    into contiguous chunks on a thread pool and the chunks are concatenated
    back in order, so the report does not depend on the worker count.
    """

    def __init__(
        self,
        b: QuiverMatrix,
        ord: LinearOrdering,
        *,
        budget: int = DEFAULT_NODE_BUDGET,
        workers: int = DEFAULT_WORKERS,
        max_violations: int = DEFAULT_MAX_VIOLATIONS,
        check_relations: bool = True,
    ) -> None:
        if budget < 1:
            raise PreconditionError("node budget must be positive")
        self.b = b
        self.ordering = ord
        self.gim = build_gim(b, ord)
        self.budget = budget
        self.workers = max(1, workers)
        self.max_violations = max_violations
        self.check_relations = check_relations
        self.store = _SeedStore(b.n)
        self.index: dict[bytes, int] = {}
        self.keys: list[bytes] = []
        self.witnesses: list[tuple[int, ...]] = []
        self.edges: set[tuple[bytes, bytes]] = set()
        self.violations: list[Violation] = []
        self.truncated = False

    def _record_violation(self, violation: Violation) -> None:
        if len(self.violations) >= self.max_violations:
            self.truncated = True
            return
        self.violations.append(violation)
        emit_event("verify", "violation", **violation.to_dict())

    def _witness(self, seed: int) -> MutationSequence:
        return MutationSequence(self.witnesses[seed])

    def _expand(self, start: int, stop: int) -> Layer:
        """Children of the stored seeds ``start..stop-1``."""

        n = self.b.n
        b = self.store.b[start:stop]
        c = self.store.c[start:stop]
        pi = self.store.pi[start:stop]
        g = self.store.g[start:stop]
        extended = np.concatenate([b, c], axis=2)
        positive = (c >= 0).all(axis=2)
        parts: list[Layer] = []
        for k in range(n):
            mutated = mutate_matrix_stack(extended, k + 1)
            sign = np.where(positive[:, k], 1, -1)
            targets = (b[:, :, k] * sign[:, None] > 0)[:, :, None, None]
            pivot = pi[:, k][:, None]
            conjugated = checked_matmul(checked_matmul(pivot, pi), pivot)
            parts.append(
                (
                    mutated[:, :, :n],
                    mutated[:, :, n:],
                    np.where(targets, conjugated, pi),
                    np.where(targets, checked_matmul(pivot, g), g),
                )
            )
        b, c, pi, g = (
            np.stack(arrays, axis=1).reshape(-1, *arrays[0].shape[1:]) for arrays in zip(*parts)
        )
        return b, c, pi, g

    def _expand_layer(self, start: int, stop: int) -> Layer:
        if self.workers == 1 or stop - start < 2:
            return self._expand(start, stop)
        chunks = min(self.workers, stop - start)
        bounds = [start + (stop - start) * part // chunks for part in range(chunks + 1)]
        with ThreadPoolExecutor(max_workers=self.workers) as executor:
            futures = [
                executor.submit(self._expand, lo, hi) for lo, hi in zip(bounds, bounds[1:])
            ]
            results = [future.result() for future in futures]
        b, c, pi, g = (np.concatenate(arrays) for arrays in zip(*results))
        return b, c, pi, g

    def _check_coherence(self, start: int, child_c: IntArray) -> None:
        signed = (child_c >= 0).all(axis=2) | (child_c <= 0).all(axis=2)
        coherent = child_c.any(axis=2) & signed
        if coherent.all():
            return
        position, row = (int(value) for value in np.argwhere(~coherent)[0])
        n = self.b.n
        witness = self._witness(start + position // n).then(position % n + 1)
        raise InvariantViolation(
            f"c-vector c_{row + 1}={child_c[position, row].tolist()} is not sign-coherent "
            f"at {witness.describe()}"
        )

    def _admit(
        self, b: IntArray, c: IntArray, pi: IntArray, g: IntArray, positions: Sequence[int]
    ) -> list[tuple[int, Violation]]:
        """Store new seeds (already indexed) and run the relation suite on them."""

        first = self.store.size
        for offset, matrix in enumerate(c):
            determinant = bareiss_determinant(to_rows(matrix))
            if abs(determinant) != 1:
                raise InvariantViolation(
                    f"det C = {determinant} at {self._witness(first + offset).describe()}, "
                    "expected ±1"
                )
        self.store.extend(b, c, pi, g)
        found: list[tuple[int, Violation]] = []
        if not self.check_relations:
            return found
        for offset, failures in enumerate(_relation_failures(b, pi)):
            for failure in failures:
                found.append(
                    (
                        positions[offset],
                        Violation(
                            kind="relation",
                            witness=self._witness(first + offset),
                            indices=failure.indices,
                            actual=failure.product,
                            detail=failure.describe(),
                        ),
                    )
                )
        return found

    def _compare(
        self, layer: Layer, start: int, revisits: list[tuple[int, int]]
    ) -> list[tuple[int, Violation]]:
        """Match revisited children against the stored seed with the same C-matrix."""

        if not revisits:
            return []
        child_b, _, child_pi, child_g = layer
        n = self.b.n
        stored = np.array([seed for seed, _ in revisits], dtype=np.intp)
        positions = np.array([position for _, position in revisits], dtype=np.intp)

        def witness_of(position: int) -> MutationSequence:
            return self._witness(start + position // n).then(position % n + 1)

        same_b = (self.store.b[stored] == child_b[positions]).all(axis=(1, 2))
        if not same_b.all():
            row = int(np.argmin(same_b))
            raise InvariantViolation(
                f"C-matrix reached by {self._witness(int(stored[row])).describe()} and "
                f"{witness_of(int(positions[row])).describe()} "
                "carries two different exchange matrices"
            )
        expected_pi = self.store.pi[stored]
        actual_pi = child_pi[positions]
        differs = (expected_pi != actual_pi).any(axis=(2, 3))
        expected_l = _l_matrices(self.store.g[stored])
        actual_l = _l_matrices(child_g[positions])
        rows_match = (expected_l == actual_l).all(axis=2) | (expected_l == -actual_l).all(axis=2)
        found: list[tuple[int, Violation]] = []
        for row in np.flatnonzero(differs.any(axis=1) | ~rows_match.all(axis=1)):
            position = int(positions[row])
            witness = self._witness(int(stored[row]))
            if differs[row].any():
                index = int(np.argmax(differs[row]))
                violation = Violation(
                    kind="conjecture",
                    witness=witness,
                    other=witness_of(position),
                    index=index + 1,
                    expected=expected_pi[row, index],
                    actual=actual_pi[row, index],
                    detail="equal C-matrices with different π(r_i)",
                )
            else:
                violation = Violation(
                    kind="l_matrix",
                    witness=witness,
                    other=witness_of(position),
                    index=int(np.argmin(rows_match[row])) + 1,
                    expected=expected_l[row],
                    actual=actual_l[row],
                    detail="L-matrices differ beyond row signs",
                )
            found.append((position, violation))
        return found

    def _index_children(
        self, start: int, child_c: IntArray
    ) -> tuple[list[int], list[tuple[int, int]]]:
        """Assign numbers to unseen C-matrices and record every edge of the layer."""

        n = self.b.n
        fresh: list[int] = []
        revisits: list[tuple[int, int]] = []
        for position, matrix in enumerate(child_c):
            parent = start + position // n
            parent_key = self.keys[parent]
            key = matrix.tobytes()
            self.edges.add((parent_key, key) if parent_key < key else (key, parent_key))
            seen = self.index.get(key)
            if seen is not None:
                revisits.append((seen, position))
                continue
            self.index[key] = len(self.keys)
            self.keys.append(key)
            self.witnesses.append(self.witnesses[parent] + (position % n + 1,))
            if len(self.keys) > self.budget:
                raise BudgetExceededError(
                    f"exchange graph exceeds the node budget of {self.budget} seeds"
                )
            fresh.append(position)
        return fresh, revisits

    def run(self) -> VerificationReport:
        started = time.perf_counter()
        emit_event(
            "verify",
            "bfs_started",
            n=self.b.n,
            ordering=self.ordering.format(),
            budget=self.budget,
            workers=self.workers,
        )
        n = self.b.n
        unit = identity(n)
        self.index[unit.tobytes()] = 0
        self.keys.append(unit.tobytes())
        self.witnesses.append(())
        initial = self._admit(
            self.b.entries[None],
            unit[None],
            np.stack(pi_generators(self.gim))[None],
            np.broadcast_to(unit, (1, n, n, n)),
            [0],
        )
        for _, violation in initial:
            self._record_violation(violation)
        start, stop = 0, 1
        depth = 0
        while start < stop:
            layer = self._expand_layer(start, stop)
            self._check_coherence(start, layer[1])
            fresh, revisits = self._index_children(start, layer[1])
            picked = np.array(fresh, dtype=np.intp)
            b, c, pi, g = (array[picked] for array in layer)
            found = self._admit(b, c, pi, g, fresh)
            found += self._compare(layer, start, revisits)
            for _, violation in sorted(found, key=lambda item: item[0]):
                self._record_violation(violation)
            start, stop = stop, self.store.size
            if fresh:
                depth += 1
                emit_event(
                    "verify",
                    "bfs_layer",
                    depth=depth,
                    frontier=len(fresh),
                    seeds=self.store.size,
                )
        report = VerificationReport(
            ordering=self.ordering,
            seeds=self.store.size,
            edges=len(self.edges),
            depth=depth,
            violations=tuple(self.violations),
            truncated=self.truncated,
        )
        emit_event(
            "verify",
            "bfs_completed",
            verdict=report.verdict,
            seeds=report.seeds,
            edges=report.edges,
            violations=len(report.violations),
            duration_ms=round((time.perf_counter() - started) * 1000, 2),
        )
        return report


def bfs_verify(
    b: QuiverMatrix,
    ord: LinearOrdering,
    budget: int = DEFAULT_NODE_BUDGET,
    *,
    workers: int = DEFAULT_WORKERS,
    max_violations: int = DEFAULT_MAX_VIOLATIONS,
) -> VerificationReport:
    explorer = ExchangeGraphExplorer(
        b, ord, budget=budget, workers=workers, max_violations=max_violations
    )
    return explorer.run()


# --- elementary swaps and stable walks ---------------------------------------


def _check_pair(n: int, i: int, j: int) -> None:
    check_label(i, n)
    check_label(j, n)
    if i == j:
        raise PreconditionError(f"swap labels must differ, got ({i},{j})")


def elementary_swap_sequence(
    p: MutationSequence, i: int, j: int, s0: Seed
) -> MutationSequence:
    """``p ++ [i,j,i,j,i] ++`` the reversed, ``(i j)``-relabelled ``p``."""

    _check_pair(s0.n, i, j)
    p.validate(s0.n)
    at_p = apply_sequence(s0, p)
    weight = at_p.b.b(i, j)
    if abs(weight) != 1:
        raise PreconditionError(
            f"no elementary swap: |b_{i}{j}| = {abs(weight)} after {p.describe()}, expected 1"
        )
    swap = Permutation.transposition(s0.n, i, j)
    return p.then(i, j, i, j, i) + p.relabel_reversed(swap)


@dataclass(frozen=True)
class SwapEffectReport:
    """Checks that a swap walk relabels the initial seed and its π images."""

    sequence: MutationSequence
    sigma: Permutation
    b_matches: bool
    c_matches: bool
    mismatched: tuple[int, ...] = ()

    @property
    def passed(self) -> bool:
        return self.b_matches and self.c_matches and not self.mismatched

    def to_dict(self) -> dict[str, Any]:
        return {
            "passed": self.passed,
            "sequence": list(self.sequence.indices),
            "sigma": list(self.sigma.images),
            "b_matches": self.b_matches,
            "c_matches": self.c_matches,
            "mismatched": list(self.mismatched),
        }


def _check_relabelled_walk(
    b: QuiverMatrix, ord: LinearOrdering, v: MutationSequence, sigma: Permutation
) -> SwapEffectReport:
    gim = build_gim(b, ord)
    final = TrackedState.initial(b, gim).run(v)
    generators = pi_generators(gim)
    b_matches = bool(np.array_equal(final.seed.b.entries, permute_matrix(b.entries, sigma)))
    c_matches = bool(np.array_equal(final.seed.c, sigma.matrix()))
    mismatched = tuple(
        k
        for k in range(1, b.n + 1)
        if not np.array_equal(final.pi[k - 1], generators[sigma.apply(k) - 1])
    )
    return SwapEffectReport(
        sequence=v,
        sigma=sigma,
        b_matches=b_matches,
        c_matches=c_matches,
        mismatched=mismatched,
    )


def check_swap_effect(
    b: QuiverMatrix, ord: LinearOrdering, p: MutationSequence, i: int, j: int
) -> SwapEffectReport:
    s0 = Seed.initial(b)
    sequence = elementary_swap_sequence(p, i, j, s0)
    return _check_relabelled_walk(b, ord, sequence, Permutation.transposition(b.n, i, j))


def check_repeated_swaps(
    b: QuiverMatrix,
    ord: LinearOrdering,
    swaps: Sequence[tuple[MutationSequence, int, int]],
) -> SwapEffectReport:
    """Concatenate elementary swaps; each prefix starts where the last swap ended.

    The walk relabels the initial seed by ``σ = (i_1 j_1)∘…∘(i_s j_s)``.
    """

    seed = Seed.initial(b)
    walk = MutationSequence()
    sigma = Permutation.identity(b.n)
    for p, i, j in swaps:
        walk = walk + elementary_swap_sequence(p, i, j, apply_sequence(seed, walk))
        sigma = sigma.compose(Permutation.transposition(b.n, i, j))
    return _check_relabelled_walk(b, ord, walk, sigma)


@dataclass(frozen=True)
class SwapIdentityReport:
    """Result of comparing π images across a swap and a relabelled suffix."""

    mismatched: tuple[int, ...] = ()

    @property
    def passed(self) -> bool:
        return not self.mismatched

    def to_dict(self) -> dict[str, Any]:
        return {"passed": self.passed, "mismatched": list(self.mismatched)}


def check_swap_identity(
    b: QuiverMatrix,
    ord: LinearOrdering,
    p: MutationSequence,
    i: int,
    j: int,
    u: MutationSequence,
) -> SwapIdentityReport:
    """``π(r_k)`` after ``p[i,j,i,j,i]u`` equals ``π(r_{(i j)k})`` after ``p u^{(i,j)}``."""

    _check_pair(b.n, i, j)
    at_p = TrackedState.initial(b, build_gim(b, ord)).run(p.validate(b.n))
    if abs(at_p.seed.b.b(i, j)) != 1:
        raise PreconditionError(f"|b_{i}{j}| ≠ 1 after {p.describe()}")
    swap = Permutation.transposition(b.n, i, j)
    left = at_p.run([i, j, i, j, i]).run(u.validate(b.n))
    right = at_p.run(u.relabel(swap))
    mismatched = tuple(
        k
        for k in range(1, b.n + 1)
        if not np.array_equal(left.pi[k - 1], right.pi[swap.apply(k) - 1])
    )
    return SwapIdentityReport(mismatched=mismatched)


@dataclass(frozen=True)
class FormMatch:
    label: int
    case: str
    candidate: str | None

    def to_dict(self) -> dict[str, Any]:
        return {"label": self.label, "case": self.case, "candidate": self.candidate}


@dataclass(frozen=True)
class SwapFormReport:
    """Which closed form matched ``π(r_k)`` after ``p[i,j,i,j,i]``, per label."""

    prefix: MutationSequence
    pair: tuple[int, int]
    matches: tuple[FormMatch, ...]

    @property
    def unmatched(self) -> tuple[int, ...]:
        return tuple(match.label for match in self.matches if match.candidate is None)

    @property
    def passed(self) -> bool:
        return not self.unmatched

    def to_dict(self) -> dict[str, Any]:
        return {
            "passed": self.passed,
            "prefix": list(self.prefix.indices),
            "pair": list(self.pair),
            "matches": [match.to_dict() for match in self.matches],
        }


def _swap_candidates(
    state: TrackedState, i: int, j: int, k: int
) -> tuple[str, dict[str, PiMatrix]]:
    images = state.pi
    r_i, r_j = images[i - 1], images[j - 1]
    ij3 = checked_power(_mul(r_i, r_j), 3)
    ji3 = checked_power(_mul(r_j, r_i), 3)
    if k == i:
        return "i", {"(r_i r_j)^3 r_j": _mul(ij3, r_j), "(r_j r_i)^3 r_j": _mul(ji3, r_j)}
    if k == j:
        return "j", {"(r_i r_j)^3 r_i": _mul(ij3, r_i), "(r_j r_i)^3 r_i": _mul(ji3, r_i)}
    r_k = images[k - 1]
    b_ki = state.seed.b.b(k, i)
    b_kj = state.seed.b.b(k, j)
    if b_ki == 0 and b_kj == 0:
        return "A", {"r_k": r_k}
    if b_ki != 0 and b_kj != 0:
        twisted = checked_power(_mul(r_j, r_i, r_j, r_k), 2)
        return "D", {"r_k": r_k, "(r_j r_i r_j r_k)^2 r_k": _mul(twisted, r_k)}
    case, partner, name = ("B", r_i, "r_i") if b_ki == 0 else ("C", r_j, "r_j")
    square = checked_power(_mul(partner, r_k), 2)
    return case, {
        "r_k": r_k,
        "(r_i r_j)^3 r_k (r_j r_i)^3": _mul(ij3, r_k, ji3),
        "(r_j r_i)^3 r_k (r_i r_j)^3": _mul(ji3, r_k, ij3),
        f"({name} r_k)^2 r_k": _mul(square, r_k),
        f"(r_i r_j)^3 ({name} r_k)^2 r_k (r_j r_i)^3": _mul(ij3, square, r_k, ji3),
    }


def check_swap_lemma_forms(
    b: QuiverMatrix, ord: LinearOrdering, p: MutationSequence, i: int, j: int
) -> SwapFormReport:
    _check_pair(b.n, i, j)
    at_p = TrackedState.initial(b, build_gim(b, ord)).run(p.validate(b.n))
    if abs(at_p.seed.b.b(i, j)) != 1:
        raise PreconditionError(f"|b_{i}{j}| ≠ 1 after {p.describe()}")
    after = at_p.run([i, j, i, j, i])
    matches: list[FormMatch] = []
    for k in range(1, b.n + 1):
        case, candidates = _swap_candidates(at_p, i, j, k)
        target = after.pi[k - 1]
        found = next(
            (name for name, value in candidates.items() if np.array_equal(value, target)),
            None,
        )
        matches.append(FormMatch(label=k, case=case, candidate=found))
    return SwapFormReport(prefix=p, pair=(i, j), matches=tuple(matches))


@dataclass(frozen=True)
class StableWalkReport:
    """Compares ``u p [i,j,i,j] p⁻¹ w`` against ``u w``."""

    seed_matches: bool
    mismatched: tuple[int, ...] = ()

    @property
    def passed(self) -> bool:
        return self.seed_matches and not self.mismatched

    def to_dict(self) -> dict[str, Any]:
        return {
            "passed": self.passed,
            "seed_matches": self.seed_matches,
            "mismatched": list(self.mismatched),
        }


def check_stable_walk(
    b: QuiverMatrix,
    ord: LinearOrdering,
    p: MutationSequence,
    i: int,
    j: int,
    u: MutationSequence,
    w: MutationSequence,
) -> StableWalkReport:
    _check_pair(b.n, i, j)
    for sequence in (p, u, w):
        sequence.validate(b.n)
    base = TrackedState.initial(b, build_gim(b, ord)).run(u)
    at = base.run(p)
    if at.seed.b.b(i, j) != 0:
        raise PreconditionError(
            f"stable walk needs b_{i}{j} = 0 after {(u + p).describe()}, "
            f"got {at.seed.b.b(i, j)}"
        )
    left = at.run([i, j, i, j]).run(p.inverse()).run(w)
    right = base.run(w)
    return StableWalkReport(
        seed_matches=left.seed == right.seed,
        mismatched=tuple(_images_differ(left.pi, right.pi)),
    )


# --- closed walks and fuzzing -------------------------------------------------


@dataclass(frozen=True)
class ClosedWalkReport:
    """Steps of a walk where ``C = I``, and the returns that did not restore π."""

    walk: MutationSequence
    returns: tuple[int, ...] = ()
    violations: tuple[Violation, ...] = ()

    @property
    def passed(self) -> bool:
        return not self.violations


def check_closed_walk(
    b: QuiverMatrix, ord: LinearOrdering, w: MutationSequence
) -> ClosedWalkReport:
    """Every prefix of ``w`` that returns C to the identity must restore π."""

    gim = build_gim(b, ord)
    generators = pi_generators(gim)
    state = TrackedState.initial(b, gim)
    returns: list[int] = []
    violations: list[Violation] = []
    for step, k in enumerate(w.validate(b.n), start=1):
        state = state.step(k)
        if not is_identity(state.seed.c):
            continue
        returns.append(step)
        differing = _images_differ(generators, state.pi)
        if differing:
            index = differing[0]
            violations.append(
                Violation(
                    kind="closed_walk",
                    witness=MutationSequence(w.indices[:step]),
                    index=index,
                    expected=generators[index - 1],
                    actual=state.pi[index - 1],
                    detail="C returned to I but π(r_i) did not",
                )
            )
    return ClosedWalkReport(walk=w, returns=tuple(returns), violations=tuple(violations))


def random_walk(rng: np.random.Generator, n: int, length: int) -> MutationSequence:
    """Random labels with no immediate repeats (those are spurs)."""

    labels: list[int] = []
    previous = 0
    for _ in range(length):
        choices = [k for k in range(1, n + 1) if k != previous] or [1]
        previous = choices[int(rng.integers(len(choices)))]
        labels.append(previous)
    return MutationSequence(tuple(labels))


def new_token() -> int:
    """Fresh reproducibility token for randomized runs."""

    return int(np.random.SeedSequence().entropy) % (2**32)


@dataclass(frozen=True)
class FuzzReport:
    token: int
    trials: int
    length: int
    hits: int
    violations: tuple[Violation, ...] = ()

    @property
    def verdict(self) -> str:
        return "fail" if self.violations else "pass"

    @property
    def passed(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict[str, Any]:
        return {
            "verdict": self.verdict,
            "token": self.token,
            "trials": self.trials,
            "length": self.length,
            "hits": self.hits,
            "violations": [violation.to_dict() for violation in self.violations],
        }


def random_walk_fuzz(
    b: QuiverMatrix,
    ord: LinearOrdering,
    length: int,
    trials: int,
    seed: int | None = None,
    *,
    max_violations: int = DEFAULT_MAX_VIOLATIONS,
) -> FuzzReport:
    token = new_token() if seed is None else seed
    rng = np.random.default_rng(token)
    hits = 0
    violations: list[Violation] = []
    for trial in range(trials):
        walk = check_closed_walk(b, ord, random_walk(rng, b.n, length))
        broken = {len(violation.witness) for violation in walk.violations}
        for step in walk.returns:
            emit_event("fuzz", "trial_hit", trial=trial, step=step, consistent=step not in broken)
        hits += len(walk.returns)
        for violation in walk.violations:
            if len(violations) >= max_violations:
                break
            violations.append(replace(violation, detail=f"{violation.detail} (token {token})"))
    report = FuzzReport(
        token=token,
        trials=trials,
        length=length,
        hits=hits,
        violations=tuple(violations),
    )
    summary = {key: value for key, value in report.to_dict().items() if key != "violations"}
    emit_event("fuzz", "completed", **summary)
    return report


# --- instance sampling ---------------------------------------------------------


def sample_swap_instance(
    b: QuiverMatrix, rng: np.random.Generator, max_prefix: int, *, attempts: int = 50
) -> tuple[MutationSequence, int, int] | None:
    """Random ``(p, i, j)`` with ``|b_ij| = 1`` at the seed reached by ``p``."""

    s0 = Seed.initial(b)
    for _ in range(attempts):
        p = random_walk(rng, b.n, int(rng.integers(max_prefix + 1)))
        rows = apply_sequence(s0, p).b.to_rows()
        pairs = [
            (i + 1, j + 1)
            for i in range(b.n)
            for j in range(b.n)
            if i != j and abs(rows[i][j]) == 1
        ]
        if pairs:
            i, j = pairs[int(rng.integers(len(pairs)))]
            return p, i, j
    return None


def sample_stable_walk_instance(
    b: QuiverMatrix, rng: np.random.Generator, max_len: int, *, attempts: int = 50
) -> tuple[MutationSequence, int, int, MutationSequence, MutationSequence] | None:
    """Random ``(p, i, j, u, w)`` with ``b_ij = 0`` at the seed reached by ``u ++ p``."""

    s0 = Seed.initial(b)
    for _ in range(attempts):
        u = random_walk(rng, b.n, int(rng.integers(max_len + 1)))
        p = random_walk(rng, b.n, int(rng.integers(max_len + 1)))
        rows = apply_sequence(s0, u + p).b.to_rows()
        pairs = [
            (i + 1, j + 1)
            for i in range(b.n)
            for j in range(b.n)
            if i != j and rows[i][j] == 0
        ]
        if pairs:
            i, j = pairs[int(rng.integers(len(pairs)))]
            w = random_walk(rng, b.n, int(rng.integers(max_len + 1)))
            return p, i, j, u, w
    return None


# --- the oriented-triangle counterexample ----------------------------------------


@dataclass(frozen=True)
class CounterexampleCase:
    ordering: LinearOrdering
    holds: bool
    product: PiMatrix = field(compare=False)
    r1: str = ""
    r3: str = ""
    r1r3: str = ""
    bfs: VerificationReport | None = None

    def to_dict(self) -> dict[str, Any]:
        payload: dict[str, Any] = {
            "ordering": self.ordering.format(),
            "holds": self.holds,
            "square": to_rows(self.product),
            "r_1": self.r1,
            "r_3": self.r3,
            "r_1 r_3": self.r1r3,
        }
        if self.bfs is not None:
            payload["bfs"] = {
                "verdict": self.bfs.verdict,
                "seeds": self.bfs.seeds,
                "violations": len(self.bfs.violations),
            }
        return payload


def reproduce_counterexample(*, with_bfs: bool = True) -> list[CounterexampleCase]:
    """``(π(r_1 r_3))^2`` at the seed ``[2]`` of ``1→2→3→1`` under all six orderings."""

    b = oriented_cycle_quiver()
    witness = MutationSequence((2,))
    _, words = reflections_after(Seed.initial(b), witness)
    cases: list[CounterexampleCase] = []
    for ordering in all_orderings(b.n):
        gim = build_gim(b, ordering)
        state = TrackedState.initial(b, gim).run(witness)
        product = _mul(state.pi[0], state.pi[2])
        square = checked_matmul(product, product)
        cases.append(
            CounterexampleCase(
                ordering=ordering,
                holds=is_identity(square),
                product=square,
                r1=format_word(words.r(1)),
                r3=format_word(words.r(3)),
                r1r3=format_word(words_product([words.r(1), words.r(3)])),
                bfs=bfs_verify(b, ordering) if with_bfs else None,
            )
        )
    return cases
