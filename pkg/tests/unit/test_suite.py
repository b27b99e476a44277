from __future__ import annotations

from pathlib import Path

import pytest

from pseudo_acyclic import suite
from pseudo_acyclic.quiver_core import path_quiver
from pseudo_acyclic.suite import (
    CaseResult,
    SuiteCase,
    SuiteError,
    SuiteManifest,
    format_results_table,
    load_suite,
    resolve_builtin,
    run_suite,
    summarize_results,
)


def _write_manifest(path: Path, payload: str) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(payload, encoding="utf-8")
    return path


def test_load_suite_roundtrip(tmp_path: Path, write_quiver) -> None:
    write_quiver(path_quiver(3), "a3.txt")
    manifest_path = _write_manifest(
        tmp_path / "suite.yaml",
        """
schema_version: verify-suite.v1
default_fail_fast: true
notes:
  - quivers live next to the manifest
cases:
  - name: a3-verify
    kind: verify
    quiver: a3.txt
    budget: 500
    tags: [smoke]
  - name: a3-swap
    kind: swap
    builtin: path:3
    seq: "3"
    pair: "1,2"
""",
    )
    manifest = load_suite(manifest_path)
    assert manifest.schema_version == "verify-suite.v1"
    assert manifest.default_fail_fast is True
    first, second = manifest.cases
    assert first.quiver == tmp_path / "a3.txt"
    assert first.budget == 500
    assert first.tags == ["smoke"]
    assert first.task_name == "suite:a3-verify"
    assert second.pair == (1, 2)
    assert second.seq == "3"


@pytest.mark.parametrize(
    ("payload", "fragment"),
    [
        ("schema_version: other.v0\ncases: []\n", "Unsupported suite manifest schema"),
        ("- just\n- a list\n", "mapping at the top level"),
        ("schema_version: verify-suite.v1\ncases: {}\n", "'cases' must be a list"),
        ("schema_version: verify-suite.v1\ncases: \"\"\n", "'cases' must be a list"),
        ("schema_version: verify-suite.v1\ncases: 0\n", "'cases' must be a list"),
        ("schema_version: verify-suite.v1\nnotes: {}\ncases: []\n", "'notes' must be a list"),
        (
            "schema_version: verify-suite.v1\ncases:\n  - name: x\n    kind: bogus\n    builtin: triangle\n",
            "Case kind must be one of",
        ),
        (
            "schema_version: verify-suite.v1\ncases:\n  - name: x\n    kind: verify\n",
            "exactly one of 'quiver' or 'builtin'",
        ),
        (
            "schema_version: verify-suite.v1\ncases:\n  - name: x\n    kind: swap\n    builtin: triangle\n",
            "needs 'pair'",
        ),
        (
            "schema_version: verify-suite.v1\ncases:\n  - kind: verify\n    builtin: triangle\n",
            "Missing required key",
        ),
        (
            "schema_version: verify-suite.v1\ncases:\n  - name: x\n    kind: verify\n    builtin: triangle\n    expect: maybe\n",
            "pass or fail",
        ),
    ],
)
def test_load_suite_rejects_malformed_manifests(
    tmp_path: Path, payload: str, fragment: str
) -> None:
    manifest_path = _write_manifest(tmp_path / "suite.yaml", payload)
    with pytest.raises(SuiteError, match=fragment):
        load_suite(manifest_path)


def test_load_suite_missing_file(tmp_path: Path) -> None:
    with pytest.raises(SuiteError, match="not found"):
        load_suite(tmp_path / "absent.yaml")


def test_resolve_builtin() -> None:
    assert resolve_builtin("path:4") == path_quiver(4)
    assert resolve_builtin("triangle").n == 3
    with pytest.raises(SuiteError):
        resolve_builtin("cycle:4")


def test_select_unknown_case() -> None:
    manifest = SuiteManifest(schema_version="verify-suite.v1", cases=[])
    with pytest.raises(SuiteError, match="Case 'nope' not found"):
        manifest.select(["nope"])


def test_run_suite_pass_and_expected_failure() -> None:
    manifest = SuiteManifest(
        schema_version="verify-suite.v1",
        cases=[
            SuiteCase(name="a2", kind="verify", builtin="path:2"),
            SuiteCase(name="bad", kind="verify", builtin="triangle", ordering="1,2,3", expect="fail"),
            SuiteCase(name="stable", kind="stable-walk", builtin="path:4", pair=(1, 4), u="2", w="3"),
        ],
    )
    code, results = run_suite(manifest)
    assert code == 0
    assert [result.status for result in results] == ["passed", "passed", "passed"]
    assert results[0].payload["seeds"] == 10
    assert results[1].verdict == "fail"


def test_run_suite_failure_and_error_codes() -> None:
    manifest = SuiteManifest(
        schema_version="verify-suite.v1",
        cases=[
            SuiteCase(name="wrong-expect", kind="verify", builtin="triangle", ordering="2,3,1"),
            SuiteCase(name="no-arrow", kind="swap", builtin="path:3", pair=(1, 3)),
        ],
    )
    code, results = run_suite(manifest)
    assert code == 1
    assert results[0].failed
    assert results[0].reason == "verdict fail, expected pass"
    assert results[1].errored
    assert "|b_13|" in (results[1].reason or "")


def test_run_suite_error_dominates_failure() -> None:
    manifest = SuiteManifest(
        schema_version="verify-suite.v1",
        cases=[
            SuiteCase(name="over-budget", kind="verify", builtin="path:3", budget=2),
            SuiteCase(name="wrong-expect", kind="verify", builtin="path:2", expect="fail"),
        ],
    )
    code, results = run_suite(manifest)
    assert code == 2
    assert [result.status for result in results] == ["error", "failed"]


def test_run_suite_fail_fast_stops_early() -> None:
    manifest = SuiteManifest(
        schema_version="verify-suite.v1",
        default_fail_fast=True,
        cases=[
            SuiteCase(name="wrong-expect", kind="verify", builtin="path:2", expect="fail"),
            SuiteCase(name="never-run", kind="verify", builtin="path:2"),
        ],
    )
    code, results = run_suite(manifest)
    assert code == 1
    assert len(results) == 1
    _, both = run_suite(manifest, fail_fast=False)
    assert len(both) == 2


def test_fuzz_case_echoes_token() -> None:
    case = SuiteCase(name="fuzz", kind="fuzz", builtin="path:2", length=12, trials=3, token=17)
    verdict, payload = suite.evaluate_case(case)
    assert verdict == "pass"
    assert payload["token"] == 17
    assert payload["hits"] > 0


def test_results_table_and_summary() -> None:
    case = SuiteCase(name="a2", kind="verify", builtin="path:2")
    results = [CaseResult(case=case, status="passed", verdict="pass", duration_seconds=0.25)]
    table = format_results_table(results)
    assert table.splitlines()[0].startswith("Case")
    assert "PASSED" in table
    assert "0.25s" in table
    summary = summarize_results(results)
    assert summary["total"] == 1
    assert summary["passed"] == 1
    assert summary["results"][0]["expect"] == "pass"
    assert format_results_table([]) == ""
