import numpy as np
import pytest

from selective_dd.linalg import random_hermitian, trial_rng
from selective_dd.system import LevelSystem, pulse_operator

# criterion number -> [(part, passed, detail)]
ACCEPTANCE = {}


def record(criterion, part, passed, detail):
    ACCEPTANCE.setdefault(criterion, []).append((part, bool(passed), detail))


@pytest.fixture
def plan():
    return pulse_operator(LevelSystem())


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_h(seed, trial=0, dim=3):
    return random_hermitian(dim, trial_rng(seed, trial))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE):
        parts = ACCEPTANCE[num]
        status = "PASS" if all(ok for _, ok, _ in parts) else "FAIL"
        failed = [f"{p}: {d}" for p, ok, d in parts if not ok]
        note = "; ".join(failed) if failed else "; ".join(p for p, _, _ in parts)
        terminalreporter.write_line(f"criterion {num}: {status}  ({note})")
