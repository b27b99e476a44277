"""Event stream helpers for verification progress."""

from __future__ import annotations

import itertools
import json
import os
import time
from collections.abc import Mapping
from pathlib import Path
from typing import Any

from .utils import ensure_dir

_EVENTS_PATH_CACHE: Path | None = None
_DEFAULT_SINK_ENABLED = False
EVENT_SCHEMA_VERSION = "event.v1"
EVENT_SOURCE = "pseudo_acyclic"
_EVENT_COUNTER = itertools.count()


def _event_identifier() -> str:
    """Return a stable-ish unique event id without relying on randomness."""

    millis = int(time.time() * 1000)
    pid = os.getpid()
    counter = next(_EVENT_COUNTER)
    return f"{millis:x}-{pid:x}-{counter:x}"


def _default_events_path() -> Path:
    return Path.cwd() / ".pseudo_acyclic" / "events.jsonl"


def _resolve_events_path() -> Path | None:
    global _EVENTS_PATH_CACHE
    if _EVENTS_PATH_CACHE is not None:
        return _EVENTS_PATH_CACHE
    raw = os.environ.get("PSEUDO_ACYCLIC_EVENTS_FILE")
    if raw:
        candidate = Path(raw).expanduser()
    elif _DEFAULT_SINK_ENABLED:
        candidate = _default_events_path()
    else:
        return None
    ensure_dir(candidate.parent)
    _EVENTS_PATH_CACHE = candidate
    return candidate


def events_enabled() -> bool:
    flag = os.environ.get("PSEUDO_ACYCLIC_EVENTS", "").strip().lower()
    return flag not in {"0", "false", "no", "off"}


def events_path() -> Path | None:
    """Return the resolved events log path (creates the directory if needed).

    ``None`` means no sink: the variable is unset and the CLI has not enabled
    the default file.
    """

    return _resolve_events_path()


def enable_default_sink() -> None:
    """Log to ``.pseudo_acyclic/events.jsonl`` when no file is configured."""

    global _DEFAULT_SINK_ENABLED, _EVENTS_PATH_CACHE
    _DEFAULT_SINK_ENABLED = True
    _EVENTS_PATH_CACHE = None


def reset_events_cache() -> None:
    """Clear the cached events path and the default sink (mostly for tests)."""

    global _DEFAULT_SINK_ENABLED, _EVENTS_PATH_CACHE
    _EVENTS_PATH_CACHE = None
    _DEFAULT_SINK_ENABLED = False


def _json_default(value: Any) -> Any:
    if isinstance(value, Path):
        return value.as_posix()
    if isinstance(value, (set, frozenset)):
        return sorted(value)
    if isinstance(value, tuple):
        return list(value)
    tolist = getattr(value, "tolist", None)
    if callable(tolist):
        return tolist()
    return repr(value)


def emit_event(phase: str, type_: str, **data: Any) -> None:
    """Append a structured event to the JSONL log.

    Best-effort: failures to serialise or write are swallowed so that progress
    reporting never interferes with a verification run.
    """

    if not events_enabled():
        return
    record: Mapping[str, Any] = {
        "schema_version": EVENT_SCHEMA_VERSION,
        "event_id": _event_identifier(),
        "ts": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
        "phase": phase,
        "type": type_,
        "source": EVENT_SOURCE,
        "data": data,
    }
    try:
        payload = json.dumps(record, ensure_ascii=False, default=_json_default)
    except Exception:
        return
    try:
        path = _resolve_events_path()
        if path is None:
            return
        with path.open("a", encoding="utf-8") as fh:
            fh.write(payload)
            fh.write("\n")
    except Exception:
        return
