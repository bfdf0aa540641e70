import collections

import mpmath
import pytest

CRITERIA = {
    1: "determinant closed form at nu = 1/2",
    2: "three-route agreement on z'(0)",
    3: "Bessel zeta residues at s = 1 and s = -1",
    4: "z(0) = -(nu + 1/2)/2",
    5: "homogeneous limit of the Bessel zeta derivative",
    6: "fitted heat coefficients a_0, a_1, a_2",
    7: "resolvent trace identity",
    8: "product constant C",
    9: "sign convention of the product comparison",
}

_outcomes = collections.defaultdict(list)


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")


def pytest_runtest_logreport(report):
    crit = dict(report.user_properties).get("criterion")
    if crit is None:
        return
    if report.when == "call" or report.outcome != "passed":
        # xfail(strict) counts as a pass: the failure is the documented behaviour
        ok = report.outcome == "passed" or (report.outcome == "skipped"
                                            and hasattr(report, "wasxfail"))
        _outcomes[crit].append(ok)


def pytest_runtest_setup(item):
    marker = item.get_closest_marker("criterion")
    if marker is not None:
        item.user_properties.append(("criterion", marker.args[0]))


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for crit in sorted(CRITERIA):
        results = _outcomes.get(crit)
        if not results:
            status = "NOT RUN"
        else:
            status = "PASS" if all(results) else "FAIL"
        terminalreporter.write_line(f"criterion {crit}: {status}  {CRITERIA[crit]}"
                                    f"  ({sum(results or [])}/{len(results or [])} tests)")


@pytest.fixture
def mp50():
    with mpmath.workdps(50):
        yield mpmath
