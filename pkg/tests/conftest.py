import numpy as np
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from qmlab.instances import SHAPE_MENU

settings.register_profile(
    "qmlab", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("qmlab")

shapes = st.sampled_from(SHAPE_MENU)
seeds = st.integers(min_value=0, max_value=2 ** 32 - 1)


def dense_close(a, b, atol=1e-10):
    return np.allclose(np.asarray(a), np.asarray(b), atol=atol)


def pytest_terminal_summary(terminalreporter):
    import sys

    module = sys.modules.get("test_acceptance")
    lines = getattr(module, "RESULTS", None)
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(lines, key=lambda s: int(s.split()[1])):
        terminalreporter.write_line(line)
