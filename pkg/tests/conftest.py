from __future__ import annotations

import os
import time
from datetime import datetime, timedelta, timezone
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

from agilesim import data_path
from agilesim.agent_config import load_agent_definition
from agilesim.metrics import SentimentLexicon
from agilesim.scenario import load_scenario
from agilesim.transcript import Message

DATA = data_path()
EPOCH = datetime(2024, 1, 1, tzinfo=timezone.utc)

# property suites run at >= 1000 examples; derandomized so failures reproduce
settings.register_profile(
    "agilesim",
    max_examples=1000,
    deadline=None,
    derandomize=True,
    database=None,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large],
)
settings.register_profile("quick", settings.get_profile("agilesim"), max_examples=50)
settings.load_profile(os.environ.get("AGILESIM_HYPOTHESIS_PROFILE", "agilesim"))


def msgs(*texts: str, names: tuple[str, ...] = ("A", "B")) -> list[Message]:
    """Transcript with alternating authors and one-second timestamps."""
    return [
        Message(i, names[i % len(names)], t, EPOCH + timedelta(seconds=i)) for i, t in enumerate(texts)
    ]


@pytest.fixture
def data() -> Path:
    return DATA


@pytest.fixture(scope="session")
def pm():
    return load_agent_definition(DATA / "agents" / "pm.agent.json")


@pytest.fixture(scope="session")
def architect():
    return load_agent_definition(DATA / "agents" / "architect.agent.json")


@pytest.fixture(scope="session")
def pi_planning():
    return load_scenario(DATA / "scenarios" / "pi_planning.scenario.json")


@pytest.fixture(scope="session")
def lexicon():
    return SentimentLexicon.default()


# --- acceptance report ------------------------------------------------------------

_ACCEPTANCE: dict[int, tuple[str, str, float]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(n, title): acceptance criterion n")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_call(item):
    start = time.perf_counter()
    yield
    item._elapsed = time.perf_counter() - start


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None or report.when != "call":
        return
    n, title = marker.args
    _ACCEPTANCE[n] = (title, "PASS" if report.passed else "FAIL", getattr(item, "_elapsed", 0.0))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_ACCEPTANCE):
        title, status, elapsed = _ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n}: {status}  {title}  ({elapsed:.2f}s)")
