import pytest

ACCEPTANCE = pytest.StashKey()


@pytest.fixture
def acceptance(request):
    """Record one summary line per criterion; printed at the end of the run."""
    lines = request.config.stash.setdefault(ACCEPTANCE, {})

    def record(number, title, ok, detail):
        line = f"criterion {number:2d} {'PASS' if ok else 'FAIL'}  {title}: {detail}"
        lines[number] = line
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(ACCEPTANCE, {})
    if lines:
        terminalreporter.section("acceptance criteria")
        for k in sorted(lines):
            terminalreporter.write_line(lines[k])
