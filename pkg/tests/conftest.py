import pytest

_CRITERIA: list[tuple[str, str, str]] = []


@pytest.fixture
def criterion(request):
    """Attach a criterion id and detail text; the outcome is printed at the end of the run."""

    def record(cid: str, detail: str = "") -> None:
        request.node.user_properties.append(("criterion", cid))
        request.node.user_properties.append(("detail", detail))

    return record


def pytest_runtest_logreport(report):
    if report.when != "call":
        return
    props = dict(report.user_properties)
    if "criterion" in props:
        _CRITERIA.append((props["criterion"], "PASS" if report.passed else "FAIL", props.get("detail", "")))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for cid, outcome, detail in sorted(_CRITERIA, key=lambda r: int(r[0][1:])):
        terminalreporter.write_line(f"{cid:<4} {outcome}  {detail}")
