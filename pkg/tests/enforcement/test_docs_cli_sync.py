from __future__ import annotations

import argparse
from pathlib import Path

import pytest

from pseudo_acyclic.cli import build_parser

ROOT = Path(__file__).resolve().parents[2]
README = ROOT / "README.md"


def _subcommands() -> list[str]:
    parser = build_parser()
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            return sorted(action.choices)
    return []


@pytest.mark.unit
def test_readme_mentions_every_subcommand() -> None:
    text = README.read_text(encoding="utf-8", errors="replace")
    missing = [name for name in _subcommands() if f"pseudo-acyclic {name}" not in text]
    assert missing == []


@pytest.mark.unit
def test_readme_documents_exit_codes_and_env() -> None:
    text = README.read_text(encoding="utf-8", errors="replace")
    for needle in ("PSEUDO_ACYCLIC_EVENTS_FILE", "PSEUDO_ACYCLIC_BUDGET", "exit code"):
        assert needle in text
