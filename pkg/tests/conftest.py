import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from hetlab.cauchy import solve_cauchy
from hetlab.kernels import p_power
from hetlab.potentials import p_double_well

settings.register_profile(
    "hetlab", deadline=None, max_examples=60,
    suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("hetlab")


@pytest.fixture(scope="session")
def p2():
    return p_power(2.0), p_double_well(2.0, 1.0)


@pytest.fixture(scope="session")
def p2_profile(p2):
    k, P = p2
    return solve_cauchy(k, P)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# one line per acceptance criterion, printed after the run
_ACCEPTANCE = {}


@pytest.fixture
def acceptance():
    def record(criterion, part, passed, detail=""):
        _ACCEPTANCE.setdefault(criterion, []).append((part, bool(passed), detail))
        return passed
    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for crit in sorted(_ACCEPTANCE, key=lambda c: (int(c.split()[0]), c)):
        parts = _ACCEPTANCE[crit]
        ok = all(p for _, p, _ in parts)
        body = "; ".join(f"{name}: {'pass' if p else 'FAIL'}"
                         + (f" ({d})" if d else "") for name, p, d in parts)
        tr.write_line(f"[{'PASS' if ok else 'FAIL'}] criterion {crit} -- {body}")
