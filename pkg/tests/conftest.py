import random

import pytest

from algebroidkit.algebroid import construct_example
from algebroidkit.cli import gallery_path, load_algebroid, load_rep

ALGEBROID_GALLERY = (
    "tangent2",
    "poisson_x0",
    "nijenhuis_tangent2",
    "aff1_action",
    "heisenberg",
    "sl2_standard",
    "abelian_commuting",
)
REP_GALLERY = ("heisenberg", "sl2_standard", "abelian_commuting", "abelian_trivial")


@pytest.fixture
def rng():
    return random.Random(12345)


@pytest.fixture(scope="session")
def poisson():
    return construct_example("poisson", n=2, pi={(0, 1): "x0"})


def gallery_algebroid(name):
    return load_algebroid(str(gallery_path(name)), 12)


def gallery_rep(name):
    return load_rep(str(gallery_path(name)), 12)


# lines appended by the acceptance suite, echoed at the end of the run
ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
