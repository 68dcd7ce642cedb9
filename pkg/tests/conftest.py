import numpy as np
import pytest

from rislab.geometry import Scene

_ACCEPTANCE = {}


class AcceptanceRecorder:
    def check(self, number: int, title: str, ok: bool, detail: str = "") -> None:
        _ACCEPTANCE[number] = (title, bool(ok), detail)
        assert ok, f"criterion {number} ({title}) failed: {detail}"


@pytest.fixture
def acceptance():
    return AcceptanceRecorder()


@pytest.fixture
def scene():
    return Scene()


@pytest.fixture
def rng():
    return np.random.default_rng(20241015)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        title, ok, detail = _ACCEPTANCE[number]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {number:2d}. {title}: {detail}")
