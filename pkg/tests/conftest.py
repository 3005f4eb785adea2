import os

import hypothesis
import numpy as np
import pytest

from stochleray.spectral import GridSpec, random_field

hypothesis.settings.register_profile("default", max_examples=30, deadline=None)
hypothesis.settings.register_profile("fast", max_examples=5, deadline=None)
hypothesis.settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

_ACCEPTANCE = []


@pytest.fixture
def grid8():
    return GridSpec(N=8)


@pytest.fixture
def grid32():
    return GridSpec(N=32)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def field_from_seed(grid, seed, **kw):
    return random_field(grid, np.random.default_rng(seed), **kw)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("acceptance")
    if mark is None or not (rep.when == "call" or (rep.when == "setup" and not rep.passed)):
        return
    status = "PASS" if rep.passed else "SKIP" if rep.skipped else "FAIL"
    detail = dict(item.user_properties).get("detail", "")
    number, title = mark.args
    _ACCEPTANCE.append((number, f"[{status}] criterion {number:>2}: {title}" + (f" | {detail}" if detail else "")))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(_ACCEPTANCE, key=lambda x: x[0]):
        terminalreporter.write_line(line)
