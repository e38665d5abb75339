"""Acceptance criteria 1-10, each at its stated tolerance.

Every criterion prints one ``PASS``/``FAIL`` line (also repeated in the pytest
terminal summary). Run directly with ``python3 tests/test_acceptance.py`` for
just the lines.
"""

import sys

import pytest

from tfv import suite

RESULTS: dict = {}


def criterion_line(number, checks) -> str:
    title = suite.CRITERIA[number][0]
    ok = all(c.met for c in checks)
    worst = [c for c in checks if not c.met]
    tail = f"{len(checks)} checks" if ok else "failing: " + ", ".join(
        f"{c.id} ({c.value!r} vs {c.tolerance!r})" for c in worst
    )
    return f"criterion {number:2d} [{'PASS' if ok else 'FAIL'}] {title}: {tail}"


@pytest.mark.parametrize("number", sorted(suite.CRITERIA))
def test_criterion(number, suite_checks):
    checks = [c for c in suite_checks if c.criterion == number]
    assert checks, f"criterion {number} produced no checks"
    line = criterion_line(number, checks)
    RESULTS[number] = line
    print(line)
    for c in checks:
        assert c.met, f"{c.id}: value {c.value!r}, tolerance {c.tolerance!r}"


def test_negative_controls_are_flagged(suite_checks):
    negatives = [c for c in suite_checks if c.expected_negative]
    assert {c.id for c in negatives} == {
        "negative/rot2d-torse-forming", "negative/euclidean-curvature-identity",
    }
    assert all(c.passed is False and c.met for c in negatives)


if __name__ == "__main__":
    checks = suite.run_suite()
    lines = [criterion_line(n, [c for c in checks if c.criterion == n]) for n in sorted(suite.CRITERIA)]
    print("\n".join(lines))
    sys.exit(0 if all("[PASS]" in line for line in lines) else 1)
