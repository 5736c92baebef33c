import pytest

_CRITERIA: dict[int, tuple[str, bool, str]] = {}


class _Recorder:
    def __init__(self, number: int, title: str):
        self.number, self.title, self.detail = number, title, ""

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        ok = exc_type is None
        detail = self.detail if ok else f"{exc_type.__name__}: {exc}"
        _CRITERIA[self.number] = (self.title, ok, detail)
        line = f"criterion {self.number:>2} {'PASS' if ok else 'FAIL'}: {self.title}"
        print(f"{line} ({detail})" if detail else line)
        return False


@pytest.fixture
def criterion():
    return _Recorder


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        title, ok, detail = _CRITERIA[n]
        line = f"criterion {n:>2} {'PASS' if ok else 'FAIL'}: {title}"
        terminalreporter.write_line(f"{line} ({detail})" if detail else line)
