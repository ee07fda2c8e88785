import numpy as np
import pytest
from hypothesis import HealthCheck, settings

# numba kernels compile on first call, so per-example deadlines are meaningless
settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def vertical_step(h=32, w=32, k=16, lo=0, hi=255):
    img = np.full((h, w), lo, dtype=np.float64)
    img[:, k:] = hi
    return img


ACCEPTANCE = {}


def record_acceptance(number, name, passed, detail=""):
    ACCEPTANCE[number] = (name, passed, detail)
    line = f"criterion {number} {'PASS' if passed else 'FAIL'}: {name}" + (f" ({detail})" if detail else "")
    print(line)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        name, passed, detail = ACCEPTANCE[number]
        terminalreporter.write_line(
            f"criterion {number} {'PASS' if passed else 'FAIL'}: {name}" + (f" ({detail})" if detail else "")
        )
