import pytest
from hypothesis import settings

# reproducible property tests: fixed example generation, no wall-clock deadline
settings.register_profile("agt", derandomize=True, deadline=None)
settings.load_profile("agt")


# one PASS/FAIL line per acceptance criterion, repeated in the terminal summary
_VERDICTS: dict[int, str] = {}


@pytest.fixture
def verdict(capsys):
    def record(num: int, ok: bool, detail: str):
        line = f"{'PASS' if ok else 'FAIL'} criterion {num}: {detail}"
        _VERDICTS[num] = line
        with capsys.disabled():
            print(f"\n{line}")
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _VERDICTS:
        terminalreporter.section("acceptance criteria")
        for num in sorted(_VERDICTS):
            terminalreporter.write_line(_VERDICTS[num])
