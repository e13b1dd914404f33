"""Collects one verdict line per acceptance criterion for the run summary."""

LINES: list[str] = []


def verdict(number: int, ok: bool, detail: str) -> None:
    line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    LINES.append(line)
    print(line)
    assert ok, line


def skipped(number: int, reason: str) -> None:
    line = f"criterion {number:>2}: SKIP  {reason}"
    LINES.append(line)
    print(line)
