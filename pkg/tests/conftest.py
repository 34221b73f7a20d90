import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

# criterion -> list of (part, passed, detail), filled by test_acceptance.py
ACCEPTANCE: dict[str, list[tuple[str, bool, str]]] = {}


def record(criterion: str, part: str, passed: bool, detail: str) -> None:
    ACCEPTANCE.setdefault(criterion, []).append((part, bool(passed), detail))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for crit in sorted(ACCEPTANCE, key=lambda c: int(c.split()[0])):
        parts = ACCEPTANCE[crit]
        ok = all(p[1] for p in parts)
        details = "; ".join(f"{name}: {'pass' if good else 'FAIL'} ({detail})" for name, good, detail in parts)
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  criterion {crit}  {details}")
