from __future__ import annotations

import json
import sys
from functools import lru_cache
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from restql.executor import FixtureBackend, Gateway  # noqa: E402
from restql.pipeline import PipelineResult, convert, corpus_config, corpus_dir, corpus_files  # noqa: E402

REPO = Path(__file__).resolve().parents[1]

# criterion name -> (passed, detail); filled by test_acceptance.py
ACCEPTANCE: dict[str, tuple[bool, str]] = {}


@lru_cache(maxsize=None)
def pipeline(name: str, mode: str = "non-strict") -> PipelineResult:
    return convert(corpus_dir() / name, None, corpus_config(mode))


def gateway(name: str) -> tuple[Gateway, FixtureBackend]:
    """In-process gateway for a corpus file over its backend fixture."""
    stem = name.split(".")[0]
    backend = FixtureBackend(json.loads((corpus_dir() / "backend" / f"{stem}.backend.json").read_text()))
    result = pipeline(name)
    return Gateway(result.schema, result.manifest, backend), backend


@pytest.fixture(scope="session")
def corpus_names() -> list[str]:
    return [p.name for p in corpus_files()]


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, (ok, detail) in ACCEPTANCE.items():
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
