import os

import numpy as np
import pytest

FULL_SCALE = os.environ.get("SPARSECAUSAL_FULL_SCALE") == "1"


def pytest_collection_modifyitems(config, items):
    if FULL_SCALE:
        return
    skip = pytest.mark.skip(reason="set SPARSECAUSAL_FULL_SCALE=1 to run p=100 criteria")
    for item in items:
        if "fullscale" in item.keywords:
            item.add_marker(skip)


def random_spd(rng, n, cond=None):
    X = rng.standard_normal((n + 3, n))
    S = X.T @ X / (n + 3) + 0.1 * np.eye(n)
    return 0.5 * (S + S.T)


def random_correlation(rng, n, q=None):
    q = q or 3 * n
    X = rng.standard_normal((q, n)) @ rng.standard_normal((n, n)) * 0.3 + rng.standard_normal((q, n))
    X = (X - X.mean(0)) / X.std(0)
    return X.T @ X / q


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for key in range(1, 15):
        if key in lines:
            terminalreporter.write_line(lines[key])
        else:
            why = ("needs SPARSECAUSAL_FULL_SCALE=1" if key <= 4 and not FULL_SCALE
                   else "not selected in this session")
            terminalreporter.write_line(f"[SKIP] criterion {key:>2}: {why}")
