from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from stockdesk import fixtures  # noqa: E402
from stockdesk.orchestrator import AnalyzeRequest, analyze  # noqa: E402


@pytest.fixture(scope="session")
def reference_store():
    return fixtures.reference_store()


@pytest.fixture(scope="session")
def tf_response(reference_store):
    return analyze(reference_store, AnalyzeRequest(fixtures.REFERENCE_QUERY, fixtures.REFERENCE_DATE.isoformat()))


# one line per acceptance criterion, filled in by test_acceptance.py
ACCEPTANCE: dict[str, list[tuple[bool, str]]] = {}


def record(criterion: str, ok: bool, detail: str) -> bool:
    ACCEPTANCE.setdefault(criterion, []).append((ok, detail))
    return ok


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for criterion in sorted(ACCEPTANCE, key=lambda c: int(c[1:])):
        checks = ACCEPTANCE[criterion]
        ok = all(passed for passed, _ in checks)
        failed = [d for passed, d in checks if not passed]
        line = f"{criterion} {'PASS' if ok else 'FAIL'} ({len(checks) - len(failed)}/{len(checks)} checks)"
        if failed:
            line += ": " + "; ".join(failed)
        terminalreporter.write_line(line)
