import sys
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

ROOT = Path(__file__).resolve().parents[1]
if str(ROOT) not in sys.path:
    sys.path.insert(0, str(ROOT))
SRC_ROOT = ROOT / "src"
if SRC_ROOT.exists() and str(SRC_ROOT) not in sys.path:
    sys.path.insert(0, str(SRC_ROOT))

from pseudo_acyclic.quiver_core import (  # noqa: E402
    QuiverMatrix,
    format_quiver,
    oriented_cycle_quiver,
    path_quiver,
)


# Generated examples share the per-test event file of the autouse fixtures.
settings.register_profile(
    "fast",
    max_examples=60,
    deadline=None,
    suppress_health_check=[HealthCheck.function_scoped_fixture],
)
settings.register_profile(
    "acceptance",
    max_examples=10_000,
    deadline=None,
    suppress_health_check=[HealthCheck.function_scoped_fixture, HealthCheck.too_slow],
)
settings.load_profile("fast")


@pytest.fixture()
def a2() -> QuiverMatrix:
    return path_quiver(2)


@pytest.fixture()
def triangle() -> QuiverMatrix:
    return oriented_cycle_quiver()


@pytest.fixture()
def write_quiver(tmp_path: Path):
    def _write(b: QuiverMatrix, name: str = "quiver.txt") -> Path:
        target = tmp_path / name
        target.write_text(format_quiver(b, comment=name), encoding="utf-8")
        return target

    return _write
