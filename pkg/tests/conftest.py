import pytest

from junctionsim.scenario import ScenarioConfig
from junctionsim.vehicles import DIRECTIONS, KINDS


def make_scenario(weights=(0.25, 0.25, 0.25, 0.25), **kw) -> ScenarioConfig:
    kw.setdefault("name", "test")
    return ScenarioConfig(arrival_weights=dict(zip(DIRECTIONS, weights)), **kw).validate()


def zero_counts(**overrides):
    counts = dict.fromkeys(KINDS, 0)
    for k in KINDS:
        if k.name.lower() in overrides:
            counts[k] = overrides[k.name.lower()]
    return counts


@pytest.fixture
def scenario():
    return make_scenario(seed=42)


def pytest_terminal_summary(terminalreporter):
    verdicts = getattr(__import__("sys").modules.get("test_acceptance"), "VERDICTS", None)
    if verdicts:
        terminalreporter.section("acceptance criteria")
        for n in sorted(verdicts):
            terminalreporter.write_line(verdicts[n])
