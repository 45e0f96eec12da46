import math

import pytest

from bellmc import ArmGeometry, Lattice, RunConfig, SourceDistribution, build_model

# quad that maximizes the equal-outcome statistic for the entangled reference
CANONICAL_QUAD = (0.0, math.pi / 4, math.pi / 8, -math.pi / 8)
# quad that maximizes the standard Clauser-Horn combination
CH_QUAD = (0.0, math.pi / 4, math.pi / 8, 3 * math.pi / 8)


def make_run(
    model_1,
    model_2=None,
    distribution=None,
    n_events=100_000,
    seed=1,
    alpha=0.0,
    beta=0.0,
    label="test",
    workers=1,
    arms=None,
    lattice=None,
):
    """RunConfig with the catalog defaults filled in."""
    if isinstance(model_1, str):
        model_1 = build_model(model_1, {})
    if model_2 is None:
        model_2 = model_1
    elif isinstance(model_2, str):
        model_2 = build_model(model_2, {})
    return RunConfig(
        distribution=distribution if distribution is not None else SourceDistribution(),
        arms=arms if arms is not None else ArmGeometry(),
        lattice=lattice if lattice is not None else Lattice(),
        model_1=model_1,
        model_2=model_2,
        alpha=alpha,
        beta=beta,
        n_events=n_events,
        seed=seed,
        label=label,
        workers=workers,
    )


# ---------------------------------------------------------------------------
# acceptance-criteria reporting: one PASS/FAIL line per criterion, driven by
# the real test outcomes

_criteria: dict[int, tuple[str, str]] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    number, description = marker.args
    if report.when == "call":
        _criteria[number] = ("PASS" if report.passed else "FAIL", description)
    elif report.when == "setup" and not report.passed:
        _criteria[number] = ("FAIL", description)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        status, description = _criteria[number]
        terminalreporter.write_line(f"[criterion {number:2d}] {status}: {description}")
