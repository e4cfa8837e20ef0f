import pathlib
import sys

import pytest

sys.path.insert(0, str(pathlib.Path(__file__).parent))

from freealg.dsl import parse_theory
from freealg.engine import Budget

THEORY_DIR = pathlib.Path(__file__).parent.parent / "theories"


def load(name):
    return parse_theory((THEORY_DIR / name).read_text())


@pytest.fixture(scope="session")
def groups():
    return load("groups.th")


@pytest.fixture(scope="session")
def abelian():
    return load("abelian.th")


@pytest.fixture(scope="session")
def semilattice():
    return load("semilattice.th")


@pytest.fixture(scope="session")
def malcev_theory():
    return load("malcev.th")


@pytest.fixture(scope="session")
def lattice():
    return load("lattice.th")


@pytest.fixture(scope="session")
def empty_theory():
    return load("empty.th")


@pytest.fixture(scope="session")
def small_budget():
    # enough for every bounded search in the unit tests, small enough that
    # exhausting a dimension stays cheap
    return Budget(max_term_size=9, max_steps=20_000, max_model_size=2)
