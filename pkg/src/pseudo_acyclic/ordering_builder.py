"""Pseudo-acyclic orderings for type-Aₙ quivers.

Each oriented triangle ``k→i→j→k`` (so ``b_ki = b_ij = b_jk = 1``) allows
exactly three of the six linear orders of its vertices: ``i≺k≺j``,
``j≺i≺k`` and ``k≺j≺i``. An ordering is valid when every triangle sees one
of its allowed orders.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Any

from .config import DEFAULT_ENUMERATION_N_MAX
from .events import emit_event
from .gim_rep import LinearOrdering, all_orderings
from .quiver_core import QuiverMatrix, triangle_vertex_sets, validate_type_an
from .utils import BudgetExceededError, ConstructionError, PreconditionError


@dataclass(frozen=True)
class TriangleConstraint:
    """Oriented triangle with ``b_ki = b_ij = b_jk = epsilon``.

    >>> TriangleConstraint(2, 3, 1).allowed_chains()
    ((2, 1, 3), (3, 2, 1), (1, 3, 2))
    """

    i: int
    j: int
    k: int
    epsilon: int = 1

    @property
    def vertices(self) -> tuple[int, int, int]:
        return (self.i, self.j, self.k)

    def allowed_chains(self) -> tuple[tuple[int, int, int], ...]:
        i, j, k = self.vertices
        if self.epsilon == 1:
            return ((i, k, j), (j, i, k), (k, j, i))
        return ((i, j, k), (j, k, i), (k, i, j))

    def restriction(self, ord: LinearOrdering) -> tuple[int, int, int]:
        a, b, c = sorted(self.vertices, key=lambda label: ord.rank[label - 1])
        return (a, b, c)

    def satisfied_by(self, ord: LinearOrdering) -> bool:
        return self.restriction(ord) in self.allowed_chains()

    def describe(self) -> str:
        i, j, k = self.vertices
        return f"({i},{j},{k}) eps={self.epsilon:+d}"

    def to_dict(self) -> dict[str, Any]:
        return {
            "triple": list(self.vertices),
            "epsilon": self.epsilon,
            "allowed": [list(chain) for chain in self.allowed_chains()],
        }


def find_triangles(b: QuiverMatrix) -> list[TriangleConstraint]:
    """Oriented 3-cycles, canonical rotation ``(i, j, k)`` with ``k`` the smallest label.

    The cycle read as ``k→i→j→k`` starts at the smallest label, so the
    triangle ``1→2→3→1`` is reported as ``(2, 3, 1)``.
    """

    constraints: list[TriangleConstraint] = []
    for a, c, d in triangle_vertex_sets(b):
        if b.b(a, c) == b.b(c, d) == b.b(d, a) == 1:
            constraints.append(TriangleConstraint(c, d, a))
        elif b.b(a, d) == b.b(d, c) == b.b(c, a) == 1:
            constraints.append(TriangleConstraint(d, c, a))
    return constraints


@dataclass(frozen=True)
class OrderingCheck:
    """Result of :func:`ordering_valid`; truthy when no constraint is violated."""

    ordering: LinearOrdering
    violations: tuple[TriangleConstraint, ...] = ()

    @property
    def valid(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.valid

    def to_dict(self) -> dict[str, Any]:
        return {
            "ordering": self.ordering.format(),
            "valid": self.valid,
            "violations": [constraint.to_dict() for constraint in self.violations],
        }


def ordering_valid(b: QuiverMatrix, ord: LinearOrdering) -> OrderingCheck:
    if ord.n != b.n:
        raise PreconditionError(f"ordering covers {ord.n} labels but the quiver has n={b.n}")
    violations = tuple(
        constraint for constraint in find_triangles(b) if not constraint.satisfied_by(ord)
    )
    return OrderingCheck(ordering=ord, violations=violations)


def _triangle_tree_order(triangles: list[TriangleConstraint]) -> list[TriangleConstraint]:
    """Breadth-first order over triangles linked by shared vertices.

    Roots and children are taken by ascending smallest label, so every
    triangle after the first of its component meets the placed ones in a
    single vertex.
    """

    remaining = sorted(triangles, key=lambda t: (min(t.vertices), sorted(t.vertices)))
    ordered: list[TriangleConstraint] = []
    placed: set[TriangleConstraint] = set()
    for root in remaining:
        if root in placed:
            continue
        queue: deque[TriangleConstraint] = deque([root])
        placed.add(root)
        while queue:
            current = queue.popleft()
            ordered.append(current)
            for other in remaining:
                if other in placed:
                    continue
                if set(other.vertices) & set(current.vertices):
                    placed.add(other)
                    queue.append(other)
    return ordered


def _preferred_chain(
    constraint: TriangleConstraint,
) -> tuple[int, int, int]:
    smallest = min(constraint.vertices)
    return min(constraint.allowed_chains(), key=lambda chain: chain.index(smallest))


def build_pseudo_acyclic_ordering(b: QuiverMatrix) -> LinearOrdering:
    """Chain the triangles, splicing each at its shared vertex, then append the rest.

    >>> from pseudo_acyclic.quiver_core import oriented_cycle_quiver
    >>> build_pseudo_acyclic_ordering(oriented_cycle_quiver()).format()
    '1,3,2'
    """

    report = validate_type_an(b)
    if not report.accepted:
        raise PreconditionError(
            "quiver is not of type A_n: " + "; ".join(report.reasons)
        )
    chain: list[int] = []
    for constraint in _triangle_tree_order(find_triangles(b)):
        shared = [vertex for vertex in constraint.vertices if vertex in chain]
        block = list(_preferred_chain(constraint))
        if not shared:
            chain.extend(block)
            continue
        if len(shared) > 1:
            raise ConstructionError(
                f"triangle {constraint.describe()} meets the chain in {shared}"
            )
        position = chain.index(shared[0])
        chain[position : position + 1] = block
    chain.extend(vertex for vertex in range(1, b.n + 1) if vertex not in chain)
    ordering = LinearOrdering.from_chain(chain)
    check = ordering_valid(b, ordering)
    if not check.valid:
        raise ConstructionError(
            "constructed ordering violates "
            + ", ".join(constraint.describe() for constraint in check.violations)
        )
    emit_event(
        "ordering",
        "constructed",
        n=b.n,
        ordering=ordering.format(),
        triangles=[constraint.vertices for constraint in find_triangles(b)],
    )
    return ordering


def enumerate_valid_orderings(
    b: QuiverMatrix, n_max: int = DEFAULT_ENUMERATION_N_MAX
) -> list[LinearOrdering]:
    if b.n > n_max:
        raise BudgetExceededError(f"ordering enumeration limited to n ≤ {n_max}, got n={b.n}")
    constraints = find_triangles(b)
    return [
        ordering
        for ordering in all_orderings(b.n)
        if all(constraint.satisfied_by(ordering) for constraint in constraints)
    ]
