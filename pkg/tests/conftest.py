"""Shared plumbing: acceptance criteria record their outcome here and a
terminal-summary hook prints one PASS/FAIL line per criterion."""

from collections import OrderedDict

CRITERIA = OrderedDict()


def record(criterion, part, ok, detail):
    """Store the outcome of one part of an acceptance criterion."""
    CRITERIA.setdefault(criterion, []).append((part, bool(ok), detail))
    return ok


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for crit in sorted(CRITERIA, key=int):
        parts = CRITERIA[crit]
        status = "PASS" if all(ok for _, ok, _ in parts) else "FAIL"
        detail = "; ".join(f"{p}: {'ok' if ok else 'FAIL'} ({d})" for p, ok, d in parts)
        tr.write_line(f"criterion {crit}: {status} | {detail}")
