"""Overflow-checked integer matrices on top of numpy int64 storage.

Every public helper returns a read-only ``int64`` array. Products are
computed natively when a conservative bound proves int64 cannot overflow,
and exactly over Python integers otherwise; a result outside the signed
64-bit range raises :class:`IntegerOverflowError` instead of wrapping.
"""

from __future__ import annotations

from collections.abc import Sequence
from functools import lru_cache
from typing import Any

import numpy as np
import numpy.typing as npt

from .config import INT64_MAX
from .utils import IntegerOverflowError, QuiverParseError

IntArray = npt.NDArray[np.int64]


def freeze(array: IntArray) -> IntArray:
    array.setflags(write=False)
    return array


def max_abs(array: IntArray) -> int:
    """Largest absolute entry as a Python int (0 for empty arrays).

    >>> max_abs(as_int_matrix([[1, -7], [3, 0]]))
    7
    """

    if array.size == 0:
        return 0
    return int(np.abs(array).max())


def from_exact_values(values: npt.NDArray[Any], *, context: str) -> IntArray:
    flat = [int(value) for value in values.ravel().tolist()]
    for value in flat:
        if value > INT64_MAX or value < -INT64_MAX:
            raise IntegerOverflowError(
                f"{context}: entry {value} leaves the signed 64-bit range"
            )
    result = np.array(flat, dtype=np.int64).reshape(values.shape)
    return freeze(result)


def as_int_matrix(rows: Sequence[Sequence[int]] | IntArray) -> IntArray:
    """Copy ``rows`` into a frozen 2-D int64 array, rejecting non-integers.

    >>> as_int_matrix([[0, 1], [-1, 0]]).tolist()
    [[0, 1], [-1, 0]]
    """

    if isinstance(rows, np.ndarray) and rows.dtype == np.int64:
        if rows.ndim != 2:
            raise QuiverParseError(f"expected a 2-D matrix, got {rows.ndim}-D")
        if rows.size and int(rows.min()) < -INT64_MAX:
            raise IntegerOverflowError("matrix entry leaves the signed 64-bit range")
        return freeze(rows.copy())
    raw = np.array(rows, dtype=object)
    if raw.ndim != 2:
        if raw.size == 0:
            return freeze(np.zeros((0, 0), dtype=np.int64))
        raise QuiverParseError("expected a rectangular 2-D matrix")
    for value in raw.ravel().tolist():
        if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
            raise QuiverParseError(f"matrix entry {value!r} is not an integer")
    return from_exact_values(raw, context="matrix literal")


@lru_cache(maxsize=None)
def identity(n: int) -> IntArray:
    return freeze(np.eye(n, dtype=np.int64))


def is_identity(array: IntArray) -> bool:
    """True for a square identity matrix; stacks compare every slice."""

    rows, cols = array.shape[-2:]
    return rows == cols and bool((array == identity(rows)).all())


def checked_matmul(left: IntArray, right: IntArray) -> IntArray:
    """Exact product ``left @ right``; raises on int64 overflow.

    Stacks of matrices broadcast as in ``numpy.matmul``.

    >>> checked_matmul(as_int_matrix([[1, 1], [0, 1]]), identity(2)).tolist()
    [[1, 1], [0, 1]]
    """

    inner = left.shape[-1]
    bound = inner * max_abs(left) * max_abs(right)
    if bound <= INT64_MAX:
        return freeze(left @ right)
    exact = left.astype(object) @ right.astype(object)
    return from_exact_values(exact, context="matrix product")


def checked_product(factors: Sequence[IntArray], n: int) -> IntArray:
    result = identity(n)
    for factor in factors:
        result = checked_matmul(result, factor)
    return result


def checked_power(matrix: IntArray, exponent: int) -> IntArray:
    if exponent == 0:
        return identity(matrix.shape[-1])
    result = matrix
    for _ in range(exponent - 1):
        result = checked_matmul(result, matrix)
    return result


def matrix_key(array: IntArray) -> bytes:
    """Row-major byte serialisation used as a dictionary key."""

    return np.ascontiguousarray(array, dtype=np.int64).tobytes()


def to_rows(array: IntArray) -> list[list[int]]:
    return [[int(value) for value in row] for row in array.tolist()]


def format_matrix(array: IntArray) -> str:
    """Rows of space-separated integers.

    >>> print(format_matrix(as_int_matrix([[0, 1], [-1, 0]])))
    0 1
    -1 0
    """

    return "\n".join(" ".join(str(value) for value in row) for row in to_rows(array))


def bareiss_determinant(rows: Sequence[Sequence[int]]) -> int:
    """Exact determinant by fraction-free elimination over Python ints.

    >>> bareiss_determinant([[0, 1], [1, 0]])
    -1
    >>> bareiss_determinant([])
    1
    """

    matrix = [[int(value) for value in row] for row in rows]
    size = len(matrix)
    if size == 0:
        return 1
    sign = 1
    previous = 1
    for pivot in range(size - 1):
        if matrix[pivot][pivot] == 0:
            swap = next(
                (row for row in range(pivot + 1, size) if matrix[row][pivot] != 0),
                None,
            )
            if swap is None:
                return 0
            matrix[pivot], matrix[swap] = matrix[swap], matrix[pivot]
            sign = -sign
        for row in range(pivot + 1, size):
            for col in range(pivot + 1, size):
                matrix[row][col] = (
                    matrix[row][col] * matrix[pivot][pivot]
                    - matrix[row][pivot] * matrix[pivot][col]
                ) // previous
        previous = matrix[pivot][pivot]
    return sign * matrix[size - 1][size - 1]
