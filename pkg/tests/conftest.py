import time

import numpy as np
import pytest

from integral_indicators import Dataset

_ACCEPTANCE = {}


def random_dataset(seed, t_max, n, loc=0.0, scale=1.0):
    rng = np.random.default_rng(seed)
    return Dataset(loc + scale * rng.standard_normal((t_max, n)))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def timer():
    class Timer:
        def __enter__(self):
            self.start = time.perf_counter()
            return self

        def __exit__(self, *exc):
            self.elapsed = time.perf_counter() - self.start

    return Timer


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


def pytest_runtest_makereport(item, call):
    marker = item.get_closest_marker("criterion")
    if marker is None or call.when != "call":
        return
    number, title = marker.args
    entry = _ACCEPTANCE.setdefault(number, {"title": title, "ok": True, "seconds": 0.0})
    entry["ok"] &= call.excinfo is None
    entry["seconds"] += call.duration


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        e = _ACCEPTANCE[number]
        status = "PASS" if e["ok"] else "FAIL"
        terminalreporter.write_line(f"[{status}] criterion {number}: {e['title']} ({e['seconds']:.1f} s)")


def adversarial_values(seed, t_max, n, period=1):
    """Rows alternate (every ``period`` rows) between ~1e6 and ~1e-6 magnitudes."""
    rng = np.random.default_rng(seed)
    big = (np.arange(t_max) // period) % 2 == 0
    mag = np.where(big, 1e6, 1e-6)[:, None]
    sign = rng.choice([-1.0, 1.0], size=(t_max, n))
    return sign * mag * rng.uniform(0.5, 1.5, size=(t_max, n))
