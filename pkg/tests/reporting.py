"""Collects one PASS/FAIL line per acceptance criterion for the terminal summary."""
import time

RESULTS = {}
STARTED = time.perf_counter()
BUDGET = 600.0  # seconds for the full default suite


def record(k, title, ok, detail=""):
    line = f"criterion {k:2d} {'PASS' if ok else 'FAIL'}  {title}"
    if detail:
        line += f"  [{detail}]"
    RESULTS[k] = line
    print(line)
    return ok


def elapsed():
    return time.perf_counter() - STARTED
