"""Collects one verdict line per acceptance criterion for the terminal summary."""
LINES: dict[int, str] = {}


def report(k: int, ok: bool, detail: str) -> None:
    LINES[k] = f"criterion {k}: {'PASS' if ok else 'FAIL'}  {detail}"
    print(LINES[k])
    assert ok, LINES[k]
