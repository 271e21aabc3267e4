import pytest

_ACCEPTANCE: dict[str, tuple[bool | None, str]] = {}


@pytest.fixture
def acceptance():
    """Record one pass/fail line per acceptance criterion (``ok=None`` marks a skip)."""

    def record(name: str, ok: bool | None, detail: str = ""):
        _ACCEPTANCE[name] = (None if ok is None else bool(ok), detail)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_ACCEPTANCE):
        ok, detail = _ACCEPTANCE[name]
        status = "SKIP" if ok is None else "PASS" if ok else "FAIL"
        terminalreporter.write_line(f"{status}  {name}  {detail}".rstrip())
