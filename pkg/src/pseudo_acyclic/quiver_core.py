"""Exchange matrices, seeds, mutation and type-Aₙ recognition."""

from __future__ import annotations

from collections import deque
from collections.abc import Iterator, Sequence
from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path
from typing import Any

import networkx as nx
import numpy as np
import numpy.typing as npt

from .config import DEFAULT_CLASS_BUDGET, DEFAULT_ORACLE_N_MAX, INT64_MAX
from .intmat import (
    IntArray,
    as_int_matrix,
    bareiss_determinant,
    format_matrix,
    freeze,
    from_exact_values,
    identity,
    matrix_key,
    max_abs,
    to_rows,
)
from .utils import (
    BudgetExceededError,
    IndexOutOfRangeError,
    InvariantViolation,
    PreconditionError,
    QuiverParseError,
    format_label_list,
    parse_label_list,
)


def check_label(k: int, n: int, *, what: str = "vertex label") -> int:
    """Validate a 1-based label and return its 0-based position.

    >>> check_label(2, 3)
    1
    """

    if isinstance(k, bool) or not isinstance(k, (int, np.integer)):
        raise IndexOutOfRangeError(f"{what} {k!r} is not an integer")
    if not 1 <= k <= n:
        raise IndexOutOfRangeError(f"{what} {k} outside 1..{n}")
    return int(k) - 1


@dataclass(frozen=True, eq=False)
class QuiverMatrix:
    """Skew-symmetric integer exchange matrix ``B`` with 1-based accessors.

    >>> QuiverMatrix.from_rows([[0, 1], [-1, 0]]).b(1, 2)
    1
    """

    entries: IntArray

    def __post_init__(self) -> None:
        entries = as_int_matrix(self.entries)
        rows, cols = entries.shape
        if rows != cols or rows < 1:
            raise QuiverParseError(f"exchange matrix must be square, got {rows}x{cols}")
        mismatch = np.argwhere(entries != -entries.T)
        if mismatch.size:
            i, j = (int(v) + 1 for v in mismatch[0])
            raise QuiverParseError(
                f"matrix is not skew-symmetric at ({i},{j}): "
                f"b_{i}{j}={entries[i - 1, j - 1]}, b_{j}{i}={entries[j - 1, i - 1]}",
                entry=(i, j),
            )
        object.__setattr__(self, "entries", entries)

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]]) -> QuiverMatrix:
        return cls(as_int_matrix(rows))

    @property
    def n(self) -> int:
        return int(self.entries.shape[0])

    def b(self, i: int, j: int) -> int:
        return int(self.entries[check_label(i, self.n), check_label(j, self.n)])

    def is_simply_laced(self) -> bool:
        return max_abs(self.entries) <= 1

    def key(self) -> bytes:
        return matrix_key(self.entries)

    def to_rows(self) -> list[list[int]]:
        return to_rows(self.entries)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, QuiverMatrix):
            return NotImplemented
        return bool(np.array_equal(self.entries, other.entries))

    def __hash__(self) -> int:
        return hash((self.n, self.key()))

    def __repr__(self) -> str:
        return f"QuiverMatrix({self.to_rows()!r})"


@dataclass(frozen=True)
class Permutation:
    """Bijection on ``1..n`` stored as its image tuple.

    >>> Permutation.transposition(3, 1, 3).images
    (3, 2, 1)
    """

    images: tuple[int, ...]

    def __post_init__(self) -> None:
        images = tuple(int(value) for value in self.images)
        if sorted(images) != list(range(1, len(images) + 1)):
            raise PreconditionError(f"not a permutation of 1..{len(images)}: {images}")
        object.__setattr__(self, "images", images)

    @classmethod
    def identity(cls, n: int) -> Permutation:
        return cls(tuple(range(1, n + 1)))

    @classmethod
    def transposition(cls, n: int, i: int, j: int) -> Permutation:
        check_label(i, n)
        check_label(j, n)
        images = list(range(1, n + 1))
        images[i - 1], images[j - 1] = j, i
        return cls(tuple(images))

    @property
    def n(self) -> int:
        return len(self.images)

    def apply(self, label: int) -> int:
        return self.images[check_label(label, self.n)]

    def compose(self, other: Permutation) -> Permutation:
        """``self ∘ other``: apply ``other`` first."""

        if other.n != self.n:
            raise PreconditionError("cannot compose permutations of different size")
        return Permutation(tuple(self.apply(other.apply(k)) for k in range(1, self.n + 1)))

    def inverse(self) -> Permutation:
        inverse = [0] * self.n
        for position, image in enumerate(self.images, start=1):
            inverse[image - 1] = position
        return Permutation(tuple(inverse))

    def is_identity(self) -> bool:
        return self.images == tuple(range(1, self.n + 1))

    def matrix(self) -> IntArray:
        """Matrix with a 1 at ``(k, σ(k))``: the C-matrix of a relabelled seed."""

        result = np.zeros((self.n, self.n), dtype=np.int64)
        for k, image in enumerate(self.images):
            result[k, image - 1] = 1
        return as_int_matrix(result)


def permute_matrix(m: IntArray, sigma: Permutation) -> IntArray:
    """Relabel rows and columns: ``result[k, l] = m[σ(k), σ(l)]``."""

    if m.shape != (sigma.n, sigma.n):
        raise PreconditionError(f"cannot permute a {m.shape} matrix by a size-{sigma.n} permutation")
    index = np.array(sigma.images, dtype=np.intp) - 1
    return as_int_matrix(m[np.ix_(index, index)])


@dataclass(frozen=True)
class MutationSequence:
    """Ordered mutation labels ``w = [i_1, ..., i_l]``.

    >>> seq = MutationSequence.parse("4,3,2,3,5")
    >>> seq.relabel_reversed(Permutation.transposition(5, 3, 5)).format()
    '3,5,2,5,4'
    """

    indices: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        indices = tuple(int(value) for value in self.indices)
        for value in indices:
            if value < 1:
                raise IndexOutOfRangeError(f"mutation label {value} must be positive")
        object.__setattr__(self, "indices", indices)

    @classmethod
    def parse(cls, raw: str) -> MutationSequence:
        return cls(tuple(parse_label_list(raw, what="mutation sequence")))

    def format(self) -> str:
        return format_label_list(self.indices)

    def describe(self) -> str:
        return f"[{self.format()}]"

    def __len__(self) -> int:
        return len(self.indices)

    def __iter__(self) -> Iterator[int]:
        return iter(self.indices)

    def __add__(self, other: MutationSequence) -> MutationSequence:
        return MutationSequence(self.indices + other.indices)

    def then(self, *labels: int) -> MutationSequence:
        return MutationSequence(self.indices + tuple(labels))

    def validate(self, n: int) -> MutationSequence:
        for value in self.indices:
            check_label(value, n, what="mutation label")
        return self

    def inverse(self) -> MutationSequence:
        return MutationSequence(tuple(reversed(self.indices)))

    def relabel(self, sigma: Permutation) -> MutationSequence:
        return MutationSequence(tuple(sigma.apply(value) for value in self.indices))

    def relabel_reversed(self, sigma: Permutation) -> MutationSequence:
        return self.inverse().relabel(sigma)


def _mutate_exact(m: IntArray, p: int) -> IntArray:
    rows = to_rows(m)
    column = [row[p] for row in rows]
    pivot = rows[p]
    result: list[list[int]] = []
    for i, row in enumerate(rows):
        out: list[int] = []
        for j, value in enumerate(row):
            if i == p or (j == p):
                out.append(-value)
                continue
            product = column[i] * pivot[j]
            sign = (column[i] > 0) - (column[i] < 0)
            out.append(value + sign * max(product, 0))
        result.append(out)
    return as_int_matrix(result)


def mutate_matrix(m: IntArray, k: int) -> IntArray:
    """Mutate an ``n×n`` or ``n×2n`` matrix at the 1-based label ``k``.

    >>> mutate_matrix(as_int_matrix([[0, 1], [-1, 0]]), 1).tolist()
    [[0, -1], [1, 0]]
    """

    rows, cols = m.shape
    if cols not in (rows, 2 * rows):
        raise PreconditionError(f"mutation needs an n×n or n×2n matrix, got {rows}x{cols}")
    p = check_label(k, rows, what="mutation label")
    largest = max_abs(m)
    if largest + largest * largest > INT64_MAX:
        return _mutate_exact(m, p)
    column = m[:, p]
    pivot = m[p, :]
    increment = np.sign(column)[:, None] * np.maximum(np.outer(column, pivot), 0)
    result = m + increment
    result[p, :] = -pivot
    result[:, p] = -column
    return as_int_matrix(result)


def mutate_matrix_stack(stack: IntArray, k: int) -> IntArray:
    """Mutate every matrix of an ``(m, n, n)`` or ``(m, n, 2n)`` stack at ``k``.

    Slice ``t`` of the result equals ``mutate_matrix(stack[t], k)``.
    """

    if stack.ndim != 3 or stack.shape[2] not in (stack.shape[1], 2 * stack.shape[1]):
        raise PreconditionError(
            f"mutation needs a stack of n×n or n×2n matrices, got {stack.shape}"
        )
    p = check_label(k, stack.shape[1], what="mutation label")
    largest = max_abs(stack)
    exact = largest + largest * largest > INT64_MAX
    work: npt.NDArray[Any] = stack.astype(object) if exact else stack
    column = work[:, :, p]
    pivot = work[:, p, :]
    sign = (column > 0).astype(np.int64) - (column < 0).astype(np.int64)
    result = work + sign[:, :, None] * np.maximum(column[:, :, None] * pivot[:, None, :], 0)
    result[:, p, :] = -pivot
    result[:, :, p] = -column
    if exact:
        return from_exact_values(result, context="stacked mutation")
    return freeze(result)


def mutate_quiver(b: QuiverMatrix, k: int) -> QuiverMatrix:
    return QuiverMatrix(mutate_matrix(b.entries, k))


def is_sign_coherent(row: IntArray) -> bool:
    return bool(row.any()) and (bool((row >= 0).all()) or bool((row <= 0).all()))


@dataclass(frozen=True, eq=False)
class Seed:
    """Exchange matrix together with its C-matrix.

    >>> Seed.initial(QuiverMatrix.from_rows([[0, 1], [-1, 0]])).c.tolist()
    [[1, 0], [0, 1]]
    """

    b: QuiverMatrix
    c: IntArray

    def __post_init__(self) -> None:
        c = as_int_matrix(self.c)
        if c.shape != (self.b.n, self.b.n):
            raise PreconditionError(
                f"C-matrix shape {c.shape} does not match n={self.b.n}"
            )
        object.__setattr__(self, "c", c)

    @classmethod
    def initial(cls, b: QuiverMatrix) -> Seed:
        return cls(b, identity(b.n))

    @property
    def n(self) -> int:
        return self.b.n

    def key(self) -> bytes:
        return matrix_key(self.c)

    def extended(self) -> IntArray:
        return np.hstack([self.b.entries, self.c])

    def c_row(self, k: int) -> IntArray:
        return self.c[check_label(k, self.n)]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Seed):
            return NotImplemented
        return self.b == other.b and bool(np.array_equal(self.c, other.c))

    def __hash__(self) -> int:
        return hash((self.b, self.key()))


def check_sign_coherence(seed: Seed) -> None:
    for index, row in enumerate(seed.c, start=1):
        if not is_sign_coherent(row):
            raise InvariantViolation(
                f"c-vector c_{index}={row.tolist()} is not sign-coherent"
            )


def mutate_seed(s: Seed, k: int) -> Seed:
    n = s.n
    mutated = mutate_matrix(s.extended(), k)
    result = Seed(QuiverMatrix(mutated[:, :n]), mutated[:, n:])
    check_sign_coherence(result)
    return result


def apply_sequence(s: Seed, w: MutationSequence) -> Seed:
    for k in w:
        s = mutate_seed(s, k)
    return s


def c_sign(s: Seed, k: int) -> int:
    """Sign of the c-vector ``c_k`` in the componentwise partial order.

    >>> c_sign(Seed.initial(QuiverMatrix.from_rows([[0, 1], [-1, 0]])), 2)
    1
    """

    row = s.c_row(k)
    if not is_sign_coherent(row):
        raise InvariantViolation(f"c-vector c_{k}={row.tolist()} is not sign-coherent")
    return 1 if bool((row >= 0).all()) else -1


def det_c(seed: Seed) -> int:
    return bareiss_determinant(to_rows(seed.c))


def path_quiver(n: int, orientation: Sequence[int] | None = None) -> QuiverMatrix:
    """Orientation of the Aₙ path; ``orientation[i]`` is ``b_{i+1,i+2}``.

    >>> path_quiver(3).to_rows()
    [[0, 1, 0], [-1, 0, 1], [0, -1, 0]]
    """

    if n < 1:
        raise PreconditionError("path quiver needs n ≥ 1")
    signs = tuple(orientation) if orientation is not None else (1,) * (n - 1)
    if len(signs) != n - 1 or any(sign not in (1, -1) for sign in signs):
        raise PreconditionError(f"orientation must be {n - 1} entries of ±1")
    entries = np.zeros((n, n), dtype=np.int64)
    for i, sign in enumerate(signs):
        entries[i, i + 1] = sign
        entries[i + 1, i] = -sign
    return QuiverMatrix(entries)


def oriented_cycle_quiver() -> QuiverMatrix:
    """The oriented triangle 1→2→3→1."""

    return QuiverMatrix.from_rows([[0, 1, -1], [-1, 0, 1], [1, -1, 0]])


def random_mutation(b: QuiverMatrix, steps: int, rng: np.random.Generator) -> QuiverMatrix:
    """Apply ``steps`` random mutations, never repeating the previous label."""

    previous = 0
    for _ in range(steps):
        choices = [k for k in range(1, b.n + 1) if k != previous] or [1]
        k = int(choices[int(rng.integers(len(choices)))])
        b = mutate_quiver(b, k)
        previous = k
    return b


# --- text format -----------------------------------------------------------


def _data_lines(text: str) -> Iterator[tuple[int, str]]:
    for number, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        yield number, line


def _parse_int(token: str, *, line: int, column: int) -> int:
    try:
        return int(token)
    except ValueError as exc:
        raise QuiverParseError(f"expected an integer, got {token!r}", line=line, column=column) from exc


def _tokens(line: str) -> list[tuple[int, str]]:
    tokens: list[tuple[int, str]] = []
    position = 0
    for token in line.split():
        position = line.index(token, position)
        tokens.append((position + 1, token))
        position += len(token)
    return tokens


def parse_quiver(text: str) -> QuiverMatrix:
    """Parse the quiver text format: ``n`` then ``n`` rows of ``B``.

    >>> parse_quiver("# A2\\n2\\n0 1\\n-1 0\\n").b(1, 2)
    1
    """

    lines = list(_data_lines(text))
    if not lines:
        raise QuiverParseError("empty quiver file: expected the vertex count n")
    header_line, header = lines[0]
    header_tokens = _tokens(header)
    if len(header_tokens) != 1:
        raise QuiverParseError(
            "first data line must hold only the vertex count n", line=header_line, column=1
        )
    column, token = header_tokens[0]
    n = _parse_int(token, line=header_line, column=column)
    if n < 1:
        raise QuiverParseError(f"vertex count must be ≥ 1, got {n}", line=header_line, column=column)
    body = lines[1:]
    if len(body) < n:
        last = body[-1][0] if body else header_line
        raise QuiverParseError(f"expected {n} matrix rows, found {len(body)}", line=last)
    if len(body) > n:
        raise QuiverParseError(f"unexpected data after {n} matrix rows", line=body[n][0], column=1)
    rows: list[list[int]] = []
    positions: list[list[tuple[int, int]]] = []
    for number, line in body:
        tokens = _tokens(line)
        if len(tokens) != n:
            raise QuiverParseError(
                f"expected {n} entries, found {len(tokens)}", line=number, column=1
            )
        rows.append([_parse_int(tok, line=number, column=col) for col, tok in tokens])
        positions.append([(number, col) for col, _ in tokens])
    for i in range(n):
        for j in range(i, n):
            if rows[i][j] != -rows[j][i]:
                line, col = positions[i][j]
                raise QuiverParseError(
                    f"matrix is not skew-symmetric at ({i + 1},{j + 1}): "
                    f"b_{i + 1}{j + 1}={rows[i][j]}, b_{j + 1}{i + 1}={rows[j][i]}",
                    line=line,
                    column=col,
                    entry=(i + 1, j + 1),
                )
    return QuiverMatrix.from_rows(rows)


def load_quiver(path: Path) -> QuiverMatrix:
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError as exc:
        raise QuiverParseError(f"quiver file not found: {path}") from exc
    except OSError as exc:
        raise QuiverParseError(f"cannot read quiver file {path}: {exc}") from exc
    return parse_quiver(text)


def format_quiver(b: QuiverMatrix, *, comment: str | None = None) -> str:
    header = f"# {comment}\n" if comment else ""
    return f"{header}{b.n}\n{format_matrix(b.entries)}\n"


# --- type Aₙ recognition ---------------------------------------------------


def underlying_graph(b: QuiverMatrix) -> nx.Graph:
    graph = nx.Graph()
    graph.add_nodes_from(range(1, b.n + 1))
    for i, j in combinations(range(1, b.n + 1), 2):
        weight = b.b(i, j)
        if weight:
            graph.add_edge(i, j, weight=weight)
    return graph


def triangle_vertex_sets(b: QuiverMatrix) -> list[tuple[int, int, int]]:
    """Every 3-clique of the underlying graph as a sorted triple."""

    graph = underlying_graph(b)
    triples: list[tuple[int, int, int]] = []
    for a, c, d in combinations(range(1, b.n + 1), 3):
        if graph.has_edge(a, c) and graph.has_edge(c, d) and graph.has_edge(a, d):
            triples.append((a, c, d))
    return triples


def is_cyclically_oriented(b: QuiverMatrix, triple: tuple[int, int, int]) -> bool:
    a, c, d = triple
    first = b.b(a, c)
    return first != 0 and first == b.b(c, d) == b.b(d, a)


@dataclass(frozen=True)
class TypeAnReport:
    """Outcome of the structural type-Aₙ check.

    >>> validate_type_an(path_quiver(3)).q
    3
    """

    n: int
    accepted: bool
    reasons: tuple[str, ...] = ()
    triangles: tuple[tuple[int, int, int], ...] = ()
    outside: tuple[int, ...] = field(default=())

    @property
    def m(self) -> int:
        return len(self.triangles)

    @property
    def q(self) -> int:
        return len(self.outside)

    def to_dict(self) -> dict[str, Any]:
        return {
            "n": self.n,
            "accepted": self.accepted,
            "reasons": list(self.reasons),
            "triangles": [list(triple) for triple in self.triangles],
            "outside": list(self.outside),
            "m": self.m,
            "q": self.q,
        }


def validate_type_an(b: QuiverMatrix) -> TypeAnReport:
    reasons: list[str] = []
    if not b.is_simply_laced():
        bad = [
            (i, j)
            for i, j in combinations(range(1, b.n + 1), 2)
            if abs(b.b(i, j)) > 1
        ]
        reasons.append(f"entries outside {{-1,0,1}} at {bad}")
    graph = underlying_graph(b)
    if not nx.is_connected(graph):
        reasons.append("underlying graph is not connected")

    for cycle in nx.chordless_cycles(graph):
        if len(cycle) > 3:
            reasons.append(f"chordless cycle of length {len(cycle)} through {sorted(cycle)}")
            break

    triangles = triangle_vertex_sets(b)
    for triple in triangles:
        if not is_cyclically_oriented(b, triple):
            reasons.append(f"triangle {triple} is not cyclically oriented")

    membership = {vertex: 0 for vertex in graph.nodes}
    for triple in triangles:
        for vertex in triple:
            membership[vertex] += 1
    for vertex, degree in sorted(graph.degree):
        count = membership[vertex]
        if degree > 4:
            reasons.append(f"vertex {vertex} has degree {degree} > 4")
        elif degree == 4 and count != 2:
            reasons.append(f"degree-4 vertex {vertex} lies in {count} triangles, expected 2")
        elif degree == 3 and count != 1:
            reasons.append(f"degree-3 vertex {vertex} lies in {count} triangles, expected 1")

    incidence = nx.Graph()
    incidence.add_nodes_from(("v", vertex) for vertex in graph.nodes)
    inside_edges: set[frozenset[int]] = set()
    for index, triple in enumerate(triangles):
        for vertex in triple:
            incidence.add_edge(("t", index), ("v", vertex))
        inside_edges.update(frozenset(pair) for pair in combinations(triple, 2))
    for u, v in graph.edges:
        if frozenset((u, v)) not in inside_edges:
            incidence.add_edge(("v", u), ("v", v))
    if not nx.is_forest(incidence):
        reasons.append("triangles do not form a tree (shared edge or cycle of cycles)")

    outside = tuple(vertex for vertex in sorted(graph.nodes) if membership[vertex] == 0)
    return TypeAnReport(
        n=b.n,
        accepted=not reasons,
        reasons=tuple(reasons),
        triangles=tuple(triangles),
        outside=outside,
    )


def is_path_orientation(b: QuiverMatrix) -> bool:
    """True iff the underlying graph of ``b`` is a path with single arrows."""

    if not b.is_simply_laced():
        return False
    graph = underlying_graph(b)
    if graph.number_of_edges() != b.n - 1 or not nx.is_connected(graph):
        return False
    return all(degree <= 2 for _, degree in graph.degree)


def an_membership_oracle(
    b: QuiverMatrix,
    n_max: int = DEFAULT_ORACLE_N_MAX,
    *,
    budget: int = DEFAULT_CLASS_BUDGET,
    cache: dict[bytes, bool] | None = None,
) -> bool:
    """Search the mutation class of ``b`` for an orientation of the Aₙ path.

    Every quiver in the Aₙ class has entries in ``{-1, 0, 1}``, so the
    search stops with ``False`` at the first member with a larger entry.
    Verdicts are written to ``cache`` for every visited member.
    """

    if b.n > n_max:
        raise BudgetExceededError(f"membership oracle limited to n ≤ {n_max}, got n={b.n}")
    if cache is not None and b.key() in cache:
        return cache[b.key()]
    seen: set[bytes] = {b.key()}
    queue: deque[QuiverMatrix] = deque([b])
    verdict = False
    while queue:
        current = queue.popleft()
        if not current.is_simply_laced():
            verdict = False
            break
        if is_path_orientation(current):
            verdict = True
            break
        for k in range(1, current.n + 1):
            child = mutate_quiver(current, k)
            key = child.key()
            if key in seen:
                continue
            if cache is not None and key in cache:
                verdict = cache[key]
                queue.clear()
                break
            seen.add(key)
            if len(seen) > budget:
                raise BudgetExceededError(
                    f"mutation class exceeds the node budget of {budget}"
                )
            queue.append(child)
        else:
            continue
        break
    if cache is not None:
        for key in seen:
            cache[key] = verdict
    return verdict
