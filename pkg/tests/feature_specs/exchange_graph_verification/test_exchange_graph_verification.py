from __future__ import annotations

import numpy as np
import pytest

from pseudo_acyclic.gim_rep import all_orderings, build_gim, pi_generators
from pseudo_acyclic.ordering_builder import build_pseudo_acyclic_ordering, ordering_valid
from pseudo_acyclic.quiver_core import QuiverMatrix, oriented_cycle_quiver, random_mutation
from pseudo_acyclic.walk_explorer import bfs_verify, check_relation_suite
from tests.utils.quivers import an_mutation_class, path_orientations


def _distinct_mutations(n: int, count: int, seed: int) -> list[QuiverMatrix]:
    rng = np.random.default_rng(seed)
    start = path_orientations(n)[0]
    found: dict[bytes, QuiverMatrix] = {}
    attempts = 0
    while len(found) < count and attempts < 50 * count:
        b = random_mutation(start, int(rng.integers(1, 4 * n)), rng)
        found.setdefault(b.key(), b)
        attempts += 1
    return sorted(found.values(), key=lambda b: b.key())


@pytest.mark.parametrize("n", [2, 3])
def test_acyclic_paths_pass_under_every_ordering(n):
    """AC#1 Every orientation of the An path passes bfs_verify under every ordering."""

    for b in path_orientations(n):
        for ordering in all_orderings(n):
            report = bfs_verify(b, ordering)
            assert report.passed, (b.to_rows(), ordering.format(), report.first_violation)


@pytest.mark.slow
def test_acyclic_a4_paths_pass_under_every_ordering():
    """AC#1 The n = 4 sweep: 8 orientations times 24 orderings."""

    for b in path_orientations(4):
        for ordering in all_orderings(4):
            report = bfs_verify(b, ordering)
            assert report.passed, (b.to_rows(), ordering.format(), report.first_violation)


def test_triangle_passes_under_constructed_ordering():
    """AC#2 The oriented triangle passes under build_pseudo_acyclic_ordering."""

    b = oriented_cycle_quiver()
    report = bfs_verify(b, build_pseudo_acyclic_ordering(b))
    assert report.passed
    assert report.seeds > 1


def test_a3_class_passes_under_constructed_ordering():
    """AC#2 Every labelled A3 exchange matrix passes, relation suite included."""

    for b in an_mutation_class(3):
        report = bfs_verify(b, build_pseudo_acyclic_ordering(b))
        assert report.passed, (b.to_rows(), report.first_violation)


@pytest.mark.slow
def test_random_a4_a5_quivers_pass_under_constructed_ordering():
    """AC#2 At least fifty distinct mutated quivers with n ≤ 5 pass."""

    quivers = _distinct_mutations(4, 47, seed=2024) + _distinct_mutations(5, 3, seed=7)
    assert len({b.key() for b in quivers}) >= 50
    for b in quivers:
        report = bfs_verify(b, build_pseudo_acyclic_ordering(b))
        assert report.passed, (b.to_rows(), report.first_violation)


def _base_case_failures(b: QuiverMatrix) -> list[tuple[str, str]]:
    failures: list[tuple[str, str]] = []
    for ordering in all_orderings(b.n):
        valid = ordering_valid(b, ordering).valid
        for failure in check_relation_suite(b, pi_generators(build_gim(b, ordering))):
            if failure.kind != "triangle" or valid:
                failures.append((ordering.format(), failure.describe()))
    return failures


@pytest.mark.parametrize("n", [2, 3])
def test_base_case_identities(n):
    """AC#3 Commutation and braid relations always hold; triangle relations under valid orderings."""

    for b in an_mutation_class(n):
        assert _base_case_failures(b) == [], b.to_rows()


@pytest.mark.slow
def test_base_case_identities_a4():
    """AC#3 The exhaustive n = 4 sweep."""

    for b in an_mutation_class(4):
        assert _base_case_failures(b) == [], b.to_rows()


def test_invalid_orderings_break_a_triangle_relation():
    """AC#3 On the triangle each invalid ordering fails the triangle relation somewhere."""

    b = oriented_cycle_quiver()
    for ordering in all_orderings(3):
        failures = check_relation_suite(b, pi_generators(build_gim(b, ordering)))
        broken = any(failure.kind == "triangle" for failure in failures)
        assert broken is not ordering_valid(b, ordering).valid
