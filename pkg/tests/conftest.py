import functools

import pytest

from finhall.catalog import Catalog
from finhall.hall import HallAlgebra
from finhall.quiver import a2_model, a3_model, model_from_dict


@functools.lru_cache(maxsize=None)
def algebra_for(kind: str, q: int, size=None) -> HallAlgebra:
    if kind == "A2":
        data = a2_model(q, total_max=size or 5)
    else:
        data = a3_model(q, comp_max=size or 2)
    return HallAlgebra(Catalog(model_from_dict(data)))


@pytest.fixture(scope="session")
def a2():
    return algebra_for("A2", 2)


@pytest.fixture(scope="session")
def a2q3():
    return algebra_for("A2", 3)


@pytest.fixture(scope="session")
def a3():
    return algebra_for("A3", 2)


@pytest.fixture(scope="session")
def a3q3():
    return algebra_for("A3", 3)


MODELS = [("A2", 2), ("A2", 3), ("A3", 2), ("A3", 3)]


@pytest.fixture(scope="session", params=MODELS, ids=[f"{k}-q{q}" for k, q in MODELS])
def model(request):
    return algebra_for(*request.param)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
