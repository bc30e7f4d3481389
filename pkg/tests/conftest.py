import math

import pytest
from hypothesis import HealthCheck, settings

from passive_qkd.detection import ChannelConfig
from passive_qkd.source import SourceConfig

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def ref_channel():
    return ChannelConfig(alpha=0.2, distance=0.0, eta_B=0.045, epsilon_B=3.2e-7, q_eff=0.5, f_ec=1.22)


@pytest.fixture
def ref_source():
    return SourceConfig.from_mu_t(0.175, 0.393, math.pi / 2)


def pytest_terminal_summary(terminalreporter):
    rows = {}
    for outcome in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(outcome, []):
            if "test_acceptance.py" not in getattr(rep, "nodeid", "") or rep.when not in ("call", "setup"):
                continue
            name = rep.nodeid.split("::")[-1]
            summary = dict(getattr(rep, "user_properties", ())).get("summary", "")
            rows[name] = ("PASS" if outcome == "passed" else "FAIL", summary)
    if not rows:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(rows):
        verdict, summary = rows[name]
        terminalreporter.write_line(f"{verdict} {name}: {summary}")
