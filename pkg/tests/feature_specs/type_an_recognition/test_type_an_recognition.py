from __future__ import annotations

import networkx as nx
import pytest

from pseudo_acyclic.quiver_core import an_membership_oracle, underlying_graph, validate_type_an
from tests.utils.quivers import an_mutation_class, simply_laced_matrices


def _disagreements(n: int) -> list[list[list[int]]]:
    cache: dict[bytes, bool] = {}
    mismatched = []
    for b in simply_laced_matrices(n):
        if not nx.is_connected(underlying_graph(b)):
            continue
        if validate_type_an(b).accepted != an_membership_oracle(b, cache=cache):
            mismatched.append(b.to_rows())
    return mismatched


@pytest.mark.parametrize("n", [2, 3, 4])
def test_validator_agrees_with_oracle(n):
    """AC#1 validate_type_an agrees with the mutation-class oracle on connected {−1,0,1} quivers."""

    assert _disagreements(n) == []


@pytest.mark.slow
def test_validator_agrees_with_oracle_n5():
    """AC#1 The exhaustive n = 5 sweep."""

    assert _disagreements(5) == []


@pytest.mark.parametrize("n", [3, 4, 5])
def test_every_class_member_is_accepted(n):
    """AC#1 Members of the An mutation class are all accepted."""

    for b in an_mutation_class(n):
        report = validate_type_an(b)
        assert report.accepted, (b.to_rows(), report.reasons)
