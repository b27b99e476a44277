"""Shared utilities and the error hierarchy for the pseudo-acyclic toolkit."""

from __future__ import annotations

import json
import os
import tempfile
from collections.abc import Sequence
from pathlib import Path


class PseudoAcyclicError(RuntimeError):
    """Raised when a command should exit with a non-zero status."""

    exit_code = 2


class QuiverParseError(PseudoAcyclicError, ValueError):
    """Raised when a quiver file or matrix literal cannot be parsed."""

    def __init__(
        self,
        message: str,
        *,
        line: int | None = None,
        column: int | None = None,
        entry: tuple[int, int] | None = None,
    ) -> None:
        location = ""
        if line is not None:
            location = f"line {line}"
            if column is not None:
                location += f", column {column}"
            location += ": "
        super().__init__(f"{location}{message}")
        self.line = line
        self.column = column
        self.entry = entry


class IndexOutOfRangeError(PseudoAcyclicError, IndexError):
    """Raised when a vertex label falls outside ``1..n``."""


class IntegerOverflowError(PseudoAcyclicError, OverflowError):
    """Raised when an entry would leave the signed 64-bit range."""


class InvariantViolation(PseudoAcyclicError, AssertionError):
    """Raised when a runtime invariant fails; this always signals a bug."""


class BudgetExceededError(PseudoAcyclicError):
    """Raised when a search outgrows its node budget or enumeration bound."""


class PreconditionError(PseudoAcyclicError, ValueError):
    """Raised when an operation is called outside its precondition."""


class ConstructionError(PseudoAcyclicError):
    """Raised when the ordering builder cannot splice a triangle."""


def ensure_dir(path: Path) -> Path:
    path.mkdir(parents=True, exist_ok=True)
    return path


def _atomic_write(path: Path, text: str) -> None:
    """Persist ``text`` to ``path`` atomically."""

    ensure_dir(path.parent)
    with tempfile.NamedTemporaryFile(
        mode="w",
        encoding="utf-8",
        dir=path.parent,
        delete=False,
        prefix=f".{path.name}.",
    ) as handle:
        handle.write(text)
        handle.flush()
        os.fsync(handle.fileno())
        temp_path = Path(handle.name)
    try:
        os.replace(temp_path, path)
    except Exception:
        temp_path.unlink(missing_ok=True)
        raise


def dump_json(
    path: Path,
    data: object,
    *,
    sort_keys: bool = True,
    ensure_ascii: bool = True,
) -> None:
    text = json.dumps(data, indent=2, sort_keys=sort_keys, ensure_ascii=ensure_ascii)
    _atomic_write(path, f"{text}\n")


def parse_label_list(raw: str, *, what: str = "list") -> list[int]:
    """Parse ``"2,1,2"`` into ``[2, 1, 2]``.

    Blank input and the literal ``e`` both denote the empty list.

    >>> parse_label_list("3, 5,2")
    [3, 5, 2]
    >>> parse_label_list("e")
    []
    """

    text = raw.strip()
    if not text or text == "e":
        return []
    labels: list[int] = []
    for position, chunk in enumerate(text.split(","), start=1):
        token = chunk.strip()
        try:
            labels.append(int(token))
        except ValueError as exc:
            raise QuiverParseError(
                f"{what} entry {position} is not an integer: {token!r}",
                column=position,
            ) from exc
    return labels


def format_label_list(labels: Sequence[int], *, empty: str = "") -> str:
    """Inverse of :func:`parse_label_list`.

    >>> format_label_list([2, 1, 2])
    '2,1,2'
    >>> format_label_list([], empty="e")
    'e'
    """

    if not labels:
        return empty
    return ",".join(str(label) for label in labels)
