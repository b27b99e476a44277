from __future__ import annotations

import numpy as np
import pytest

from pseudo_acyclic.gim_rep import (
    Gim,
    LinearOrdering,
    all_orderings,
    build_gim,
    gim_report,
    l_matrix,
    pair_relation_holds,
    pi_generator,
    pi_of_word,
    relation_order,
    rows_equal_up_to_sign,
)
from pseudo_acyclic.intmat import as_int_matrix, is_identity
from pseudo_acyclic.quiver_core import MutationSequence, QuiverMatrix, Seed
from pseudo_acyclic.reflection_engine import parse_word, reflections_after
from pseudo_acyclic.utils import IndexOutOfRangeError, InvariantViolation, PreconditionError


def test_linear_ordering_chain_and_rank() -> None:
    ordering = LinearOrdering.parse("1,3,2")
    assert ordering.rank == (1, 3, 2)
    assert ordering.chain == (1, 3, 2)
    assert ordering.precedes(3, 2)
    assert not ordering.precedes(2, 1)
    assert ordering.describe() == "1≺3≺2"


def test_linear_ordering_rejects_non_permutations() -> None:
    with pytest.raises(PreconditionError):
        LinearOrdering.parse("1,1,2")
    with pytest.raises(PreconditionError):
        LinearOrdering((1, 3))


def test_all_orderings_counts() -> None:
    assert len(list(all_orderings(3))) == 6
    assert {ordering.format() for ordering in all_orderings(2)} == {"1,2", "2,1"}


def test_triangle_gim_under_constructed_ordering(triangle: QuiverMatrix) -> None:
    gim = build_gim(triangle, LinearOrdering.parse("1,3,2"))
    assert gim.to_rows() == [[2, 1, -1], [1, 2, -1], [-1, -1, 2]]
    assert gim.a(3, 1) == -1


def test_build_gim_requires_matching_size(a2: QuiverMatrix) -> None:
    with pytest.raises(PreconditionError):
        build_gim(a2, LinearOrdering.identity(3))


def test_gim_validation() -> None:
    with pytest.raises(InvariantViolation, match="diagonal"):
        Gim(as_int_matrix([[1, 0], [0, 2]]))
    with pytest.raises(InvariantViolation, match="sign-symmetric"):
        Gim(as_int_matrix([[2, 1], [-1, 2]]))


@pytest.mark.parametrize("i", [1, 2, 3])
def test_pi_generators_are_involutions(triangle: QuiverMatrix, i: int) -> None:
    gim = build_gim(triangle, LinearOrdering.parse("1,3,2"))
    generator = pi_generator(gim, i)
    assert is_identity(generator @ generator)


def test_a2_braid_relation(a2: QuiverMatrix) -> None:
    gim = build_gim(a2, LinearOrdering.identity(2))
    product = pi_of_word(gim, parse_word("1,2"))
    assert relation_order(product) == 3
    assert pair_relation_holds(pi_generator(gim, 1), pi_generator(gim, 2), 3)
    assert not pair_relation_holds(pi_generator(gim, 1), pi_generator(gim, 2), 2)


def test_pi_of_word_rejects_out_of_range_letters(a2: QuiverMatrix) -> None:
    gim = build_gim(a2, LinearOrdering.identity(2))
    with pytest.raises(IndexOutOfRangeError):
        pi_of_word(gim, parse_word("3"))


def test_relation_order_gives_up_past_the_cap() -> None:
    shear = as_int_matrix([[1, 1], [0, 1]])
    assert relation_order(shear, max_order=6) is None


def test_l_matrix_rows_are_conjugator_columns(a2: QuiverMatrix) -> None:
    _, state = reflections_after(Seed.initial(a2), MutationSequence((2,)))
    lm = l_matrix(build_gim(a2, LinearOrdering.identity(2)), state)
    assert lm.tolist() == [[1, -1], [0, 1]]


def test_rows_equal_up_to_sign() -> None:
    x = as_int_matrix([[1, -1], [0, 1]])
    assert rows_equal_up_to_sign(x, as_int_matrix([[-1, 1], [0, 1]]))
    assert not rows_equal_up_to_sign(x, as_int_matrix([[1, 1], [0, 1]]))
    with pytest.raises(PreconditionError):
        rows_equal_up_to_sign(x, as_int_matrix([[1]]))


def test_gim_report_shape(a2: QuiverMatrix) -> None:
    _, state = reflections_after(Seed.initial(a2), MutationSequence((2,)))
    report = gim_report(build_gim(a2, LinearOrdering.identity(2)), state)
    assert report["gim"] == [[2, 1], [1, 2]]
    assert len(report["pi"]) == 2
    assert np.array(report["L"]).shape == (2, 2)
