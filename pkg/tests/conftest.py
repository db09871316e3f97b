import numpy as np
import pytest

_CRITERIA = []


@pytest.fixture
def report():
    """Record a one-line PASS/FAIL verdict that is echoed in the terminal summary."""

    def _report(number, ok, detail):
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'} | {detail}"
        _CRITERIA.append(line)
        print(line)
        return ok

    return _report


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_CRITERIA, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def separated_tensor(rng, dims, min_gap=0.05):
    """Gaussian tensor whose mode spectra have relative gaps above ``min_gap``."""
    from hose import mode_singular_values

    while True:
        x = rng.standard_normal(dims)
        ok = True
        for s in mode_singular_values(x):
            if s.size > 1 and np.min(-np.diff(s)) < min_gap * s[0]:
                ok = False
        if ok:
            return x


def midpoints(s, i):
    """Threshold halfway between the ``i``-th and ``i+1``-th singular values."""
    return 0.5 * (s[i] + s[i + 1])
