"""Per-criterion verdict lines for the acceptance suite.

Every test in test_acceptance.py stands for one shipping criterion; this hook
prints a single [PASS]/[FAIL]/[SKIP] line per criterion so the log reads as a
checklist no matter how pytest's own progress output is formatted.
"""

from __future__ import annotations

import sys


def _criterion_name(nodeid: str) -> str:
    name = nodeid.rsplit("::", 1)[-1]
    name = name.split("[", 1)[0]
    if name.startswith("test_"):
        name = name[5:]
    return name.replace("_", "-")


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    name = _criterion_name(report.nodeid)
    if report.skipped:
        reason = ""
        if isinstance(report.longrepr, tuple):
            reason = f": {report.longrepr[2]}"
        sys.stdout.write(f"\n[SKIP] acceptance {name}{reason}\n")
        sys.stdout.flush()
    elif report.when == "call":
        verdict = "PASS" if report.passed else "FAIL"
        sys.stdout.write(f"\n[{verdict}] acceptance {name}\n")
        sys.stdout.flush()
