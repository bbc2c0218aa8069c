"""Collects one PASS/FAIL line per acceptance criterion for the terminal summary."""

LINES: dict = {}


def record(number: int, title: str, ok: bool, detail: str) -> None:
    line = f"criterion {number:2d} {'PASS' if ok else 'FAIL'}: {title} | {detail}"
    LINES[number] = line
    print(line)
