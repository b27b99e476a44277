from __future__ import annotations

import pytest

from pseudo_acyclic.config import (
    DEFAULT_FUZZ_LENGTH,
    DEFAULT_FUZZ_TRIALS,
    DEFAULT_NODE_BUDGET,
    DEFAULT_WORKERS,
    RunSettings,
)


def test_defaults_without_environment() -> None:
    settings = RunSettings.from_env()
    assert settings == RunSettings(
        budget=DEFAULT_NODE_BUDGET,
        workers=DEFAULT_WORKERS,
        fuzz_length=DEFAULT_FUZZ_LENGTH,
        fuzz_trials=DEFAULT_FUZZ_TRIALS,
    )
    assert set(settings.sources().values()) == {"default"}


def test_environment_overrides(monkeypatch: pytest.MonkeyPatch) -> None:
    monkeypatch.setenv("PSEUDO_ACYCLIC_BUDGET", "500")
    monkeypatch.setenv("PSEUDO_ACYCLIC_WORKERS", "4")
    monkeypatch.setenv("PSEUDO_ACYCLIC_FUZZ_TRIALS", "0")
    settings = RunSettings.from_env()
    assert settings.budget == 500
    assert settings.workers == 4
    assert settings.fuzz_trials == 0
    assert settings.sources()["budget"] == "env:PSEUDO_ACYCLIC_BUDGET"
    assert settings.sources()["fuzz_length"] == "default"


@pytest.mark.parametrize("raw", ["", "  ", "lots", "0", "-3"])
def test_invalid_budget_values_are_ignored(monkeypatch: pytest.MonkeyPatch, raw: str) -> None:
    monkeypatch.setenv("PSEUDO_ACYCLIC_BUDGET", raw)
    assert RunSettings.from_env().budget == DEFAULT_NODE_BUDGET
