"""Declarative verification suites read from YAML manifests."""

from __future__ import annotations

import time
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import yaml

from .config import DEFAULT_FUZZ_LENGTH, DEFAULT_FUZZ_TRIALS, DEFAULT_NODE_BUDGET
from .events import emit_event
from .gim_rep import LinearOrdering
from .ordering_builder import build_pseudo_acyclic_ordering
from .quiver_core import (
    MutationSequence,
    QuiverMatrix,
    load_quiver,
    oriented_cycle_quiver,
    path_quiver,
)
from .utils import PseudoAcyclicError, parse_label_list
from .walk_explorer import (
    bfs_verify,
    check_stable_walk,
    check_swap_effect,
    check_swap_lemma_forms,
    random_walk_fuzz,
    reproduce_counterexample,
)


class SuiteError(PseudoAcyclicError):
    """Raised when a suite manifest is malformed."""


SUPPORTED_SCHEMA_VERSIONS = {"verify-suite.v1"}
CASE_KINDS = ("verify", "counterexample", "fuzz", "swap", "stable-walk")
EXPECTED_COUNTEREXAMPLE_PASSES = frozenset({"1,3,2", "2,1,3", "3,2,1"})


@dataclass(slots=True)
class SuiteCase:
    """Single verification case."""

    name: str
    kind: str
    quiver: Path | None = None
    builtin: str | None = None
    ordering: str | None = None
    expect: str = "pass"
    budget: int = DEFAULT_NODE_BUDGET
    seq: str = ""
    pair: tuple[int, int] | None = None
    u: str = ""
    w: str = ""
    trials: int = DEFAULT_FUZZ_TRIALS
    length: int = DEFAULT_FUZZ_LENGTH
    token: int | None = None
    description: str = ""
    tags: list[str] = field(default_factory=list)

    @property
    def task_name(self) -> str:
        return f"suite:{self.name}"


@dataclass(slots=True)
class SuiteManifest:
    schema_version: str
    default_fail_fast: bool = False
    notes: list[str] = field(default_factory=list)
    cases: list[SuiteCase] = field(default_factory=list)
    path: Path | None = None

    def select(self, names: Iterable[str] | None = None) -> list[SuiteCase]:
        if not names:
            return list(self.cases)
        lookup = {case.name: case for case in self.cases}
        selected: list[SuiteCase] = []
        for name in names:
            if name not in lookup:
                raise SuiteError(f"Case '{name}' not found in manifest.")
            selected.append(lookup[name])
        return selected


@dataclass(slots=True)
class CaseResult:
    case: SuiteCase
    status: str
    verdict: str | None
    duration_seconds: float
    reason: str | None = None
    payload: dict[str, Any] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.status == "passed"

    @property
    def failed(self) -> bool:
        return self.status == "failed"

    @property
    def errored(self) -> bool:
        return self.status == "error"


def load_suite(path: Path) -> SuiteManifest:
    try:
        payload = yaml.safe_load(path.read_text(encoding="utf-8")) or {}
    except FileNotFoundError as exc:
        raise SuiteError(f"Suite manifest not found: {path}") from exc
    except yaml.YAMLError as exc:
        raise SuiteError(f"Failed to parse suite manifest: {exc}") from exc
    if not isinstance(payload, Mapping):
        raise SuiteError("Suite manifest must contain a mapping at the top level.")
    schema_version = str(payload.get("schema_version", "")).strip()
    if schema_version not in SUPPORTED_SCHEMA_VERSIONS:
        raise SuiteError(
            f"Unsupported suite manifest schema '{schema_version}' "
            f"(expected one of: {', '.join(sorted(SUPPORTED_SCHEMA_VERSIONS))})"
        )
    notes = payload.get("notes", [])
    if notes is None:
        notes = []
    if not isinstance(notes, list):
        raise SuiteError("Manifest field 'notes' must be a list when present.")
    raw_cases = payload.get("cases", [])
    if raw_cases is None:
        raw_cases = []
    if not isinstance(raw_cases, list):
        raise SuiteError("Manifest field 'cases' must be a list.")
    base = path.parent
    cases: list[SuiteCase] = []
    for entry in raw_cases:
        if not isinstance(entry, Mapping):
            raise SuiteError("Each case entry must be a mapping.")
        try:
            case = SuiteCase(
                name=str(entry["name"]),
                kind=_normalize_kind(entry["kind"]),
                quiver=_resolve_optional_path(entry.get("quiver"), base),
                builtin=_normalize_optional_str(entry.get("builtin")),
                ordering=_normalize_optional_str(entry.get("ordering")),
                expect=_normalize_expect(entry.get("expect", "pass")),
                budget=_normalize_int(entry.get("budget"), DEFAULT_NODE_BUDGET, "budget"),
                seq=str(entry.get("seq") or ""),
                pair=_normalize_pair(entry.get("pair")),
                u=str(entry.get("u") or ""),
                w=str(entry.get("w") or ""),
                trials=_normalize_int(entry.get("trials"), DEFAULT_FUZZ_TRIALS, "trials"),
                length=_normalize_int(entry.get("length"), DEFAULT_FUZZ_LENGTH, "length"),
                token=_normalize_optional_int(entry.get("token"), "token"),
                description=str(entry.get("description", "")),
                tags=_normalize_str_list(entry.get("tags")),
            )
        except KeyError as exc:
            raise SuiteError(f"Missing required key in case entry: {exc}") from exc
        if case.kind != "counterexample" and (case.quiver is None) == (case.builtin is None):
            raise SuiteError(f"Case '{case.name}' needs exactly one of 'quiver' or 'builtin'.")
        if case.kind in {"swap", "stable-walk"} and case.pair is None:
            raise SuiteError(f"Case '{case.name}' of kind {case.kind} needs 'pair'.")
        cases.append(case)
    return SuiteManifest(
        schema_version=schema_version,
        default_fail_fast=bool(payload.get("default_fail_fast", False)),
        notes=[str(note) for note in notes if note],
        cases=cases,
        path=path,
    )


def _normalize_kind(value: Any) -> str:
    kind = str(value).strip()
    if kind not in CASE_KINDS:
        raise SuiteError(f"Case kind must be one of {', '.join(CASE_KINDS)}, got {kind!r}")
    return kind


def _normalize_expect(value: Any) -> str:
    expect = str(value).strip().lower()
    if expect not in {"pass", "fail"}:
        raise SuiteError(f"Case 'expect' must be pass or fail, got {value!r}")
    return expect


def _normalize_optional_str(value: Any) -> str | None:
    if value in (None, ""):
        return None
    return str(value)


def _normalize_optional_int(value: Any, what: str) -> int | None:
    if value in (None, ""):
        return None
    try:
        return int(value)
    except (TypeError, ValueError) as exc:
        raise SuiteError(f"Case {what} must be an integer, got {value!r}") from exc


def _normalize_int(value: Any, default: int, what: str) -> int:
    parsed = _normalize_optional_int(value, what)
    return default if parsed is None else parsed


def _normalize_pair(value: Any) -> tuple[int, int] | None:
    if value in (None, ""):
        return None
    labels = parse_label_list(value, what="pair") if isinstance(value, str) else list(value)
    if len(labels) != 2:
        raise SuiteError(f"Case 'pair' must hold two labels, got {value!r}")
    return int(labels[0]), int(labels[1])


def _normalize_str_list(value: Any) -> list[str]:
    if not value:
        return []
    if isinstance(value, str):
        return [value]
    if isinstance(value, Sequence):
        return [str(item) for item in value]
    raise SuiteError("Case 'tags' must be a sequence.")


def _resolve_optional_path(value: Any, base: Path) -> Path | None:
    if not value:
        return None
    candidate = Path(str(value))
    return candidate if candidate.is_absolute() else base / candidate


def resolve_builtin(name: str) -> QuiverMatrix:
    """``triangle`` or ``path:<n>``."""

    if name == "triangle":
        return oriented_cycle_quiver()
    kind, _, size = name.partition(":")
    if kind == "path" and size.isdigit():
        return path_quiver(int(size))
    raise SuiteError(f"Unknown builtin quiver {name!r} (expected triangle or path:<n>)")


def _case_quiver(case: SuiteCase) -> QuiverMatrix:
    if case.builtin is not None:
        return resolve_builtin(case.builtin)
    assert case.quiver is not None
    return load_quiver(case.quiver)


def _case_ordering(case: SuiteCase, b: QuiverMatrix) -> LinearOrdering:
    if case.ordering:
        return LinearOrdering.parse(case.ordering)
    return build_pseudo_acyclic_ordering(b)


def evaluate_case(case: SuiteCase) -> tuple[str, dict[str, Any]]:
    """Run one case and return its verdict with the report payload."""

    if case.kind == "counterexample":
        cases = reproduce_counterexample()
        holding = {item.ordering.format() for item in cases if item.holds}
        bfs_passing = {
            item.ordering.format() for item in cases if item.bfs is not None and item.bfs.passed
        }
        matches = holding == bfs_passing == EXPECTED_COUNTEREXAMPLE_PASSES
        return ("pass" if matches else "fail"), {"cases": [item.to_dict() for item in cases]}
    b = _case_quiver(case)
    ordering = _case_ordering(case, b)
    if case.kind == "verify":
        report = bfs_verify(b, ordering, case.budget)
        return report.verdict, report.to_dict()
    if case.kind == "fuzz":
        fuzz = random_walk_fuzz(b, ordering, case.length, case.trials, case.token)
        return fuzz.verdict, fuzz.to_dict()
    assert case.pair is not None
    i, j = case.pair
    p = MutationSequence.parse(case.seq)
    if case.kind == "swap":
        effect = check_swap_effect(b, ordering, p, i, j)
        forms = check_swap_lemma_forms(b, ordering, p, i, j)
        verdict = "pass" if effect.passed and forms.passed else "fail"
        return verdict, {"effect": effect.to_dict(), "forms": forms.to_dict()}
    stable = check_stable_walk(
        b, ordering, p, i, j, MutationSequence.parse(case.u), MutationSequence.parse(case.w)
    )
    return ("pass" if stable.passed else "fail"), stable.to_dict()


def run_suite(
    manifest: SuiteManifest,
    *,
    names: Iterable[str] | None = None,
    fail_fast: bool | None = None,
    verbose: bool = False,
) -> tuple[int, list[CaseResult]]:
    selected = manifest.select(names)
    if not selected:
        return 0, []
    fail_fast = manifest.default_fail_fast if fail_fast is None else fail_fast
    results: list[CaseResult] = []
    exit_code = 0
    for case in selected:
        result = _run_single_case(case, verbose=verbose)
        results.append(result)
        if result.errored:
            exit_code = exit_code or 2
        elif result.failed:
            exit_code = exit_code or 1
        if fail_fast and not result.passed:
            break
    return exit_code, results


def _run_single_case(case: SuiteCase, *, verbose: bool) -> CaseResult:
    emit_event(
        "suite",
        "case_started",
        task=case.task_name,
        name=case.name,
        kind=case.kind,
        expect=case.expect,
        tags=case.tags,
    )
    if verbose:
        print(f"[suite] {case.name}: running {case.kind} (expect {case.expect})")
    start = time.perf_counter()
    verdict: str | None = None
    payload: dict[str, Any] = {}
    reason: str | None = None
    try:
        verdict, payload = evaluate_case(case)
        status = "passed" if verdict == case.expect else "failed"
        if status == "failed":
            reason = f"verdict {verdict}, expected {case.expect}"
    except PseudoAcyclicError as exc:
        status = "error"
        reason = str(exc)
    duration = time.perf_counter() - start
    emit_event(
        "suite",
        "case_completed",
        task=case.task_name,
        name=case.name,
        kind=case.kind,
        status=status,
        verdict=verdict,
        reason=reason,
        duration_ms=round(duration * 1000, 2),
    )
    return CaseResult(
        case=case,
        status=status,
        verdict=verdict,
        duration_seconds=duration,
        reason=reason,
        payload=payload,
    )


def format_results_table(results: Sequence[CaseResult]) -> str:
    if not results:
        return ""
    header = f"{'Case':<28} {'Kind':<14} {'Status':<9} {'Duration':>9}  Details"
    lines = [header, "-" * len(header)]
    for result in results:
        duration_display = f"{result.duration_seconds:0.2f}s"
        lines.append(
            f"{result.case.name:<28} "
            f"{result.case.kind:<14} "
            f"{result.status.upper():<9} "
            f"{duration_display:>9}  {result.reason or ''}"
        )
    return "\n".join(lines)


def summarize_results(results: Sequence[CaseResult]) -> Mapping[str, Any]:
    return {
        "total": len(results),
        "passed": sum(1 for result in results if result.passed),
        "failed": sum(1 for result in results if result.failed),
        "errors": sum(1 for result in results if result.errored),
        "results": [
            {
                "name": result.case.name,
                "kind": result.case.kind,
                "status": result.status,
                "verdict": result.verdict,
                "expect": result.case.expect,
                "duration_seconds": round(result.duration_seconds, 3),
                "reason": result.reason,
            }
            for result in results
        ],
    }
