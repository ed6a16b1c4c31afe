import math

import pytest

from efxmulti.instance import BIPARTITE, BOUNDED, GIRTH6, REGIMES, generate
from efxmulti.valuation import make_additive, make_seeded_monotone

ACCEPTANCE_LINES: dict[str, str] = {}


def family_instance(family, seed, n_max=8, m_max=14):
    """Seeded acceptance-style instance for one regime family.

    Bounded instances alternate between multiplicity caps 3 and 2 so both
    neighbor bounds are exercised; the other families cycle caps 1 to 3.
    """
    if family == BOUNDED:
        n = 5 + seed % (n_max - 4) if n_max >= 5 else n_max
        mult = 2 if seed % 2 else 3
    else:
        n = 3 + seed % (n_max - 2)
        mult = 1 + (seed // (n_max - 2)) % 3
    return generate(family, n, mult=mult, max_edges=m_max, density=0.6, seed=seed)


def valuation_for(inst, kind, seed):
    return make_additive(inst, seed) if kind == "additive" else make_seeded_monotone(inst, seed)


def ceil_half(x):
    return math.ceil(x / 2)


def record(criterion: str, ok: bool, detail: str) -> str:
    line = f"criterion {criterion}: {'PASS' if ok else 'FAIL'} ({detail})"
    ACCEPTANCE_LINES[criterion] = line
    print(line)
    return line


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for key in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[key])


@pytest.fixture
def families():
    return REGIMES


__all__ = ["BIPARTITE", "BOUNDED", "GIRTH6", "family_instance", "valuation_for", "record"]
