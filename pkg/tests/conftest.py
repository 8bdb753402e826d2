import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from rejectlab import FiniteDistribution, HypothesisClass

settings.register_profile(
    "default", max_examples=200, deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture
def uniform4():
    """Uniform on 4 atoms, deterministic labels 1110."""
    return FiniteDistribution.uniform([1.0, 1.0, 1.0, 0.0])


@pytest.fixture
def antipodal4():
    return HypothesisClass.from_strings(["0000", "1111"])


def random_class(rng, m, k):
    rows = rng.integers(0, 2, size=(k, m))
    return HypothesisClass(rows)


def random_dist(rng, m, zero_prob=0.0):
    w = rng.dirichlet(np.ones(m))
    if zero_prob:
        w[rng.random(m) < zero_prob] = 0.0
        if w.sum() == 0:
            w[0] = 1.0
        w = w / w.sum()
    eta = rng.random(m)
    return FiniteDistribution(w, eta)


@pytest.fixture
def massart4():
    """Well-specified 4-atom fixture: labels follow 1100 with probability 3/4."""
    from rejectlab import Hypothesis, make_wellspecified_massart

    cls = HypothesisClass.from_strings(["0000", "0011", "1100", "1111"])
    return make_wellspecified_massart(cls, cls.index_of(Hypothesis.from_string("1100")), 0.5,
                                      np.full(4, 0.25))


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])
