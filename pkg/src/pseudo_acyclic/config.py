"""Centralised configuration defaults for pseudo-acyclic verification runs."""

from __future__ import annotations

import os
from dataclasses import dataclass

CODENAME = "pseudo-acyclic"
INT64_MAX = 2**63 - 1
DEFAULT_NODE_BUDGET = 1_000_000
DEFAULT_CLASS_BUDGET = 200_000
DEFAULT_ORACLE_N_MAX = 8
DEFAULT_ENUMERATION_N_MAX = 7
DEFAULT_FUZZ_LENGTH = 40
DEFAULT_FUZZ_TRIALS = 200
DEFAULT_WORKERS = 1
DEFAULT_MAX_VIOLATIONS = 100

_ENV_OVERRIDES: dict[str, tuple[str, int]] = {
    "budget": ("PSEUDO_ACYCLIC_BUDGET", 1),
    "workers": ("PSEUDO_ACYCLIC_WORKERS", 1),
    "fuzz_length": ("PSEUDO_ACYCLIC_FUZZ_LENGTH", 0),
    "fuzz_trials": ("PSEUDO_ACYCLIC_FUZZ_TRIALS", 0),
}


def _env_int(name: str, *, minimum: int = 0) -> int | None:
    raw = os.environ.get(name)
    if raw is None:
        return None
    text = raw.strip()
    if not text:
        return None
    try:
        value = int(text)
    except (TypeError, ValueError):
        return None
    if value < minimum:
        return None
    return value


@dataclass(frozen=True)
class RunSettings:
    """Defaults after applying ``PSEUDO_ACYCLIC_*`` environment overrides.

    >>> RunSettings().budget == DEFAULT_NODE_BUDGET
    True
    """

    budget: int = DEFAULT_NODE_BUDGET
    workers: int = DEFAULT_WORKERS
    fuzz_length: int = DEFAULT_FUZZ_LENGTH
    fuzz_trials: int = DEFAULT_FUZZ_TRIALS

    @classmethod
    def from_env(cls) -> RunSettings:
        values: dict[str, int] = {}
        for key, (env_var, minimum) in _ENV_OVERRIDES.items():
            parsed = _env_int(env_var, minimum=minimum)
            if parsed is not None:
                values[key] = parsed
        return cls(**values)

    def sources(self) -> dict[str, str]:
        """Report where each setting came from (``env:<VAR>`` or ``default``)."""

        mapping: dict[str, str] = {}
        for key, (env_var, minimum) in _ENV_OVERRIDES.items():
            parsed = _env_int(env_var, minimum=minimum)
            mapping[key] = f"env:{env_var}" if parsed is not None else "default"
        return mapping
