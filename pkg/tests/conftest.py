import numpy as np
import pytest

from uistop.model import ModelParams, derive, optimal_threshold

EX51 = dict(r=0.0004, lambda0=0.01, mu=0.0004, sigma=0.04, premium=9000.0, beta=30.0, x=346.0)
EX52 = dict(EX51, sigma=0.02)

_ACCEPTANCE_LINES = []


@pytest.fixture
def ex51():
    return ModelParams(**EX51)


@pytest.fixture
def ex52():
    return ModelParams(**EX52)


def random_params(rng, x_fraction=None, sigma_range=(0.015, 0.08)):
    """A valid parameter draw in weekly units.

    With ``x_fraction`` the wage is placed at that fraction of b*.
    """
    r = rng.uniform(0.0, 0.002)
    lam = rng.uniform(0.002, 0.05)
    sigma = rng.uniform(*sigma_range)
    mu = rng.uniform(-0.003, 0.98 * (r + lam))
    p = ModelParams(r=r, lambda0=lam, mu=mu, sigma=sigma,
                    premium=rng.uniform(1000, 20000), beta=rng.uniform(5, 60), x=1.0)
    if x_fraction is not None:
        b = optimal_threshold(derive(p), p.premium)
        p = p.replace(x=b * x_fraction)
    return p


@pytest.fixture
def acceptance():
    """Record one pass/fail line per acceptance criterion."""

    def record(number, passed, detail):
        line = f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}"
        _ACCEPTANCE_LINES.append(line)
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(_ACCEPTANCE_LINES):
        terminalreporter.write_line(line)
