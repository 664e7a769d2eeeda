"""Shared pytest hooks: acceptance-criterion verdicts are echoed in the terminal summary."""

ACCEPTANCE_RESULTS: dict[int, tuple[str, str]] = {}


def pytest_runtest_makereport(item, call):
    criterion = getattr(item.function, "criterion", None)
    if criterion is None or call.when != "call":
        return
    number, title = criterion
    ok = call.excinfo is None
    ACCEPTANCE_RESULTS[number] = ("PASS" if ok else "FAIL", title)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_RESULTS):
        verdict, title = ACCEPTANCE_RESULTS[number]
        terminalreporter.write_line(f"criterion {number:>2}: {verdict}  {title}")
