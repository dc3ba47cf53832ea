"""Per-criterion verdict lines collected by test_acceptance and printed at the end."""

import sys

RESULTS: dict[int, str] = {}


def report(n: int, title: str, checks: list[tuple[str, bool]]) -> bool:
    ok = all(v for _, v in checks)
    failed = [name for name, v in checks if not v]
    line = f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {title}"
    if failed:
        line += "  [failed: " + "; ".join(failed) + "]"
    RESULTS[n] = line
    print(line, file=sys.__stdout__, flush=True)
    return ok
