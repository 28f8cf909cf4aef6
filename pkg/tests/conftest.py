import pytest

from labelpart import _backend

ACCEPTANCE_RESULTS: list[tuple[str, bool, str]] = []


@pytest.fixture(params=sorted(_backend.BACKENDS))
def kernels(request):
    """Every available kernel backend."""
    return _backend.get_kernels(request.param)


@pytest.fixture
def record_criterion():
    def record(name: str, ok: bool, detail: str = ""):
        ACCEPTANCE_RESULTS.append((name, ok, detail))
        print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in ACCEPTANCE_RESULTS:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}  {detail}")
