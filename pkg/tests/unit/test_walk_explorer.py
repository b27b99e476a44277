from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import pytest

from pseudo_acyclic.gim_rep import LinearOrdering, build_gim, pi_generators, pi_of_word
from pseudo_acyclic.intmat import checked_power, is_identity
from pseudo_acyclic.quiver_core import (
    MutationSequence,
    QuiverMatrix,
    Seed,
    apply_sequence,
    oriented_cycle_quiver,
    path_quiver,
)
from pseudo_acyclic.reflection_engine import parse_word
from pseudo_acyclic.walk_explorer import (
    TrackedState,
    Violation,
    bfs_verify,
    check_closed_walk,
    check_relation_suite,
    check_repeated_swaps,
    check_stable_walk,
    check_swap_effect,
    check_swap_identity,
    check_swap_lemma_forms,
    elementary_swap_sequence,
    random_walk,
    random_walk_fuzz,
    reproduce_counterexample,
    sample_stable_walk_instance,
    sample_swap_instance,
)
from pseudo_acyclic.utils import BudgetExceededError, PreconditionError

GOOD = LinearOrdering.parse("1,3,2")
BAD = LinearOrdering.parse("1,2,3")


def seq(raw: str) -> MutationSequence:
    return MutationSequence.parse(raw)


# --- tracked state -------------------------------------------------------------


def test_tracked_state_follows_the_pentagon(a2: QuiverMatrix) -> None:
    gim = build_gim(a2, LinearOrdering.identity(2))
    generators = pi_generators(gim)
    state = TrackedState.initial(a2, gim).run(seq("1,2,1,2,1"))
    assert state.seed.c.tolist() == [[0, 1], [1, 0]]
    assert np.array_equal(state.pi[0], generators[1])
    assert np.array_equal(state.pi[1], generators[0])


def test_tracked_state_l_matrix(a2: QuiverMatrix) -> None:
    state = TrackedState.initial(a2, build_gim(a2, LinearOrdering.identity(2))).step(2)
    assert state.l_matrix().tolist() == [[1, -1], [0, 1]]


def test_tracked_state_rejects_mismatched_gim(a2: QuiverMatrix, triangle: QuiverMatrix) -> None:
    with pytest.raises(PreconditionError):
        TrackedState.initial(a2, build_gim(triangle, GOOD))


# --- relation suite ------------------------------------------------------------


def test_relation_suite_is_clean_for_a2(a2: QuiverMatrix) -> None:
    gim = build_gim(a2, LinearOrdering.identity(2))
    assert check_relation_suite(a2, pi_generators(gim)) == []


def test_relation_suite_flags_commutation_under_bad_ordering(triangle: QuiverMatrix) -> None:
    state = TrackedState.initial(triangle, build_gim(triangle, BAD)).step(2)
    failures = check_relation_suite(state.seed.b, state.pi)
    commute = [failure for failure in failures if failure.kind == "commute"]
    assert [failure.indices for failure in commute] == [(1, 3)]
    assert "r_1 r_3" in commute[0].describe()


def test_relation_suite_accepts_good_ordering_after_mutation(triangle: QuiverMatrix) -> None:
    state = TrackedState.initial(triangle, build_gim(triangle, GOOD)).step(2)
    assert check_relation_suite(state.seed.b, state.pi) == []


# --- exchange-graph walk -----------------------------------------------------------


def test_bfs_on_a2(a2: QuiverMatrix) -> None:
    report = bfs_verify(a2, LinearOrdering.identity(2))
    assert report.verdict == "pass"
    assert (report.seeds, report.edges, report.depth) == (10, 10, 5)
    assert report.first_violation is None


def test_bfs_on_triangle_with_valid_ordering(triangle: QuiverMatrix) -> None:
    report = bfs_verify(triangle, GOOD)
    assert report.passed
    assert not report.truncated


def test_bfs_on_triangle_with_invalid_ordering(triangle: QuiverMatrix) -> None:
    report = bfs_verify(triangle, BAD)
    assert report.verdict == "fail"
    assert any(
        violation.kind == "relation"
        and violation.witness == seq("2")
        and violation.indices == (1, 3)
        for violation in report.violations
    )
    payload = report.to_dict()
    assert payload["verdict"] == "fail"
    assert payload["ordering"] == "1,2,3"


def test_bfs_violation_cap_truncates(triangle: QuiverMatrix) -> None:
    report = bfs_verify(triangle, BAD, max_violations=1)
    assert len(report.violations) == 1
    assert report.truncated


def test_bfs_is_independent_of_worker_count(triangle: QuiverMatrix) -> None:
    serial = bfs_verify(triangle, BAD, workers=1)
    threaded = bfs_verify(triangle, BAD, workers=2)
    assert serial.to_dict() == threaded.to_dict()


def test_bfs_counts_labelled_seeds_of_a3_and_a4(triangle: QuiverMatrix) -> None:
    a3 = bfs_verify(triangle, GOOD)
    assert (a3.seeds, a3.edges) == (84, 126)
    report = bfs_verify(path_quiver(4), LinearOrdering.parse("2,4,1,3"))
    assert report.passed
    assert (report.seeds, report.edges) == (1008, 2016)


def test_bfs_layers_split_across_workers_match_serial_run() -> None:
    b = path_quiver(4, orientation=(1, -1, 1))
    ordering = LinearOrdering.parse("3,1,4,2")
    serial = bfs_verify(b, ordering, workers=1)
    chunked = bfs_verify(b, ordering, workers=3)
    assert serial.to_dict() == chunked.to_dict()
    assert serial.seeds == 1008


def test_bfs_violations_follow_discovery_order(triangle: QuiverMatrix) -> None:
    report = bfs_verify(triangle, BAD)
    reached = [len(violation.other or violation.witness) for violation in report.violations]
    assert reached == sorted(reached)
    assert [violation.to_dict() for violation in report.violations] == [
        violation.to_dict() for violation in bfs_verify(triangle, BAD, workers=4).violations
    ]


def test_bfs_budget(a2: QuiverMatrix) -> None:
    with pytest.raises(BudgetExceededError):
        bfs_verify(a2, LinearOrdering.identity(2), budget=3)


def test_bfs_emits_progress_events(a2: QuiverMatrix, tmp_path: Path) -> None:
    bfs_verify(a2, LinearOrdering.identity(2))
    lines = (tmp_path / "events.jsonl").read_text(encoding="utf-8").splitlines()
    types = [json.loads(line)["type"] for line in lines]
    assert types[0] == "bfs_started"
    assert types[-1] == "bfs_completed"
    assert "bfs_layer" in types


def test_violation_describe() -> None:
    violation = Violation(kind="relation", witness=seq("2"), indices=(1, 3), detail="order 4")
    assert violation.describe() == "relation at [2] indices (1, 3): order 4"
    assert violation.to_dict() == {
        "kind": "relation",
        "witness": [2],
        "indices": [1, 3],
        "detail": "order 4",
    }


# --- elementary swaps ------------------------------------------------------------


@pytest.mark.parametrize(
    ("n", "prefix", "pair", "expected"),
    [
        (2, "", (1, 2), "1,2,1,2,1"),
        (3, "3", (1, 2), "3,1,2,1,2,1,3"),
        (2, "1,2", (1, 2), "1,2,1,2,1,2,1,1,2"),
    ],
)
def test_elementary_swap_sequence(
    n: int, prefix: str, pair: tuple[int, int], expected: str
) -> None:
    s0 = Seed.initial(path_quiver(n))
    assert elementary_swap_sequence(seq(prefix), *pair, s0).format() == expected


def test_elementary_swap_requires_an_arrow() -> None:
    s0 = Seed.initial(path_quiver(3))
    with pytest.raises(PreconditionError, match=r"\|b_13\| = 0"):
        elementary_swap_sequence(seq(""), 1, 3, s0)
    with pytest.raises(PreconditionError):
        elementary_swap_sequence(seq(""), 2, 2, s0)


def test_swap_effect_on_a2(a2: QuiverMatrix) -> None:
    report = check_swap_effect(a2, LinearOrdering.identity(2), seq(""), 1, 2)
    assert report.passed
    assert report.to_dict()["sigma"] == [2, 1]


def test_swap_effect_with_prefix() -> None:
    report = check_swap_effect(path_quiver(3), LinearOrdering.identity(3), seq("3"), 1, 2)
    assert report.passed
    assert report.sequence.format() == "3,1,2,1,2,1,3"


def test_swap_effect_on_triangle(triangle: QuiverMatrix) -> None:
    assert check_swap_effect(triangle, GOOD, seq("2"), 1, 2).passed


def test_repeated_swaps_compose_transpositions() -> None:
    report = check_repeated_swaps(
        path_quiver(3),
        LinearOrdering.identity(3),
        [(seq(""), 1, 2), (seq(""), 1, 3)],
    )
    assert report.passed
    assert report.sigma.images == (3, 1, 2)
    assert np.array_equal(
        apply_sequence(Seed.initial(path_quiver(3)), report.sequence).c, report.sigma.matrix()
    )


def test_swap_identity() -> None:
    report = check_swap_identity(
        path_quiver(3), LinearOrdering.identity(3), seq(""), 1, 2, seq("3,2")
    )
    assert report.passed
    assert report.to_dict() == {"passed": True, "mismatched": []}


def test_swap_lemma_forms_classify_every_label() -> None:
    report = check_swap_lemma_forms(path_quiver(3), LinearOrdering.identity(3), seq(""), 1, 2)
    assert [match.case for match in report.matches] == ["i", "j", "B"]
    assert report.passed
    assert report.unmatched == ()


def test_stable_walk_returns_to_the_same_seed() -> None:
    b = path_quiver(4)
    report = check_stable_walk(b, LinearOrdering.identity(4), seq(""), 1, 4, seq("2"), seq("3,1"))
    assert report.passed
    assert report.seed_matches


def test_stable_walk_requires_missing_arrow() -> None:
    with pytest.raises(PreconditionError, match="b_12 = 0"):
        check_stable_walk(
            path_quiver(3), LinearOrdering.identity(3), seq(""), 1, 2, seq(""), seq("")
        )


# --- closed walks and fuzzing ---------------------------------------------------


def test_closed_walk_around_the_pentagon_twice(a2: QuiverMatrix) -> None:
    walk = seq("1,2,1,2,1,2,1,2,1,2")
    assert is_identity(apply_sequence(Seed.initial(a2), walk).c)
    report = check_closed_walk(a2, LinearOrdering.identity(2), walk)
    assert report.passed
    assert report.returns == (10,)


def test_random_walk_never_repeats_a_label() -> None:
    walk = random_walk(np.random.default_rng(3), 4, 50)
    assert len(walk) == 50
    assert all(1 <= label <= 4 for label in walk)
    assert all(left != right for left, right in zip(walk.indices, walk.indices[1:]))
    again = random_walk(np.random.default_rng(3), 4, 50)
    assert again == walk


def test_fuzz_on_a2_finds_closed_walks(a2: QuiverMatrix) -> None:
    report = random_walk_fuzz(a2, LinearOrdering.identity(2), 12, 5, seed=42)
    assert report.token == 42
    assert report.hits > 0
    assert report.verdict == "pass"


def test_fuzz_witnesses_close_the_walk(triangle: QuiverMatrix) -> None:
    report = random_walk_fuzz(triangle, BAD, 30, 20, seed=7)
    assert report.token == 7
    assert report.to_dict()["token"] == 7
    for violation in report.violations:
        assert is_identity(apply_sequence(Seed.initial(triangle), violation.witness).c)


def test_fuzz_hits_are_the_returns_of_its_walks(triangle: QuiverMatrix) -> None:
    report = random_walk_fuzz(triangle, GOOD, 24, 6, seed=11)
    rng = np.random.default_rng(11)
    walks = [check_closed_walk(triangle, GOOD, random_walk(rng, 3, 24)) for _ in range(6)]
    assert report.hits == sum(len(walk.returns) for walk in walks)
    assert report.passed


def test_fuzz_is_reproducible_from_token(triangle: QuiverMatrix) -> None:
    first = random_walk_fuzz(triangle, GOOD, 20, 10, seed=99)
    second = random_walk_fuzz(triangle, GOOD, 20, 10, seed=99)
    assert first.to_dict() == second.to_dict()


def test_fuzz_without_seed_draws_a_token(a2: QuiverMatrix) -> None:
    report = random_walk_fuzz(a2, LinearOrdering.identity(2), 4, 1)
    assert 0 <= report.token < 2**32


# --- sampling ----------------------------------------------------------------------


def test_sample_swap_instance_has_an_arrow() -> None:
    b = path_quiver(4)
    sample = sample_swap_instance(b, np.random.default_rng(5), 6)
    assert sample is not None
    p, i, j = sample
    assert abs(apply_sequence(Seed.initial(b), p).b.b(i, j)) == 1


def test_sample_stable_walk_instance_has_no_arrow() -> None:
    b = path_quiver(4)
    sample = sample_stable_walk_instance(b, np.random.default_rng(5), 4)
    assert sample is not None
    p, i, j, u, _ = sample
    assert apply_sequence(Seed.initial(b), u + p).b.b(i, j) == 0


# --- counterexample ------------------------------------------------------------------


def test_counterexample_splits_orderings() -> None:
    cases = reproduce_counterexample(with_bfs=False)
    assert len(cases) == 6
    assert {case.ordering.format() for case in cases if case.holds} == {"1,3,2", "2,1,3", "3,2,1"}
    assert all(case.r1 == "2,1,2" and case.r3 == "3" for case in cases)
    assert {case.r1r3 for case in cases} == {"2,1,2,3"}
    triangle = oriented_cycle_quiver()
    for case in cases:
        product = pi_of_word(build_gim(triangle, case.ordering), parse_word(case.r1r3))
        assert np.array_equal(checked_power(product, 2), case.product)
    assert cases[0].to_dict()["r_1 r_3"] == "2,1,2,3"
    assert "bfs" not in cases[0].to_dict()


def test_counterexample_bfs_agrees_with_relation() -> None:
    for case in reproduce_counterexample():
        assert case.bfs is not None
        assert case.bfs.passed is case.holds
