from __future__ import annotations

from collections import defaultdict

import pytest

# criterion number -> list of (check name, passed, detail)
_ACCEPTANCE: dict[int, list[tuple[str, bool, str]]] = defaultdict(list)

CRITERIA = {
    1: "trace family: monotone traces, endpoints, time rescaling",
    2: "Landau-Zener agreement of numeric excitation",
    3: "Kibble-Zurek exponent and numeric spot-check",
    4: "exact-diagonalization loop phase equivalence",
    5: "summation identities and closed-form audit",
    6: "property-tested invariants",
}


@pytest.fixture
def verdict():
    """Record one acceptance sub-check, then assert it."""

    def _record(criterion: int, name: str, ok: bool, detail: str = "") -> None:
        _ACCEPTANCE[criterion].append((name, bool(ok), detail))
        assert ok, f"criterion {criterion} / {name}: {detail}"

    return _record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for c in sorted(CRITERIA):
        checks = _ACCEPTANCE.get(c, [])
        if not checks:
            tr.write_line(f"criterion {c}: NOT RUN  {CRITERIA[c]}")
            continue
        failed = [(n, d) for n, ok, d in checks if not ok]
        status = "PASS" if not failed else "FAIL"
        tr.write_line(f"criterion {c}: {status}  {CRITERIA[c]} ({len(checks) - len(failed)}/{len(checks)} checks)")
        for n, d in failed:
            tr.write_line(f"    failed: {n}: {d}")
