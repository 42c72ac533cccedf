import sys

import pytest
from hypothesis import settings

from twistlab.algebra import build_zigzag, path_graph
from twistlab.complexes import projective
from twistlab.linalg import QQ, FieldSpec

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")

GF = FieldSpec.prime(32003)


@pytest.fixture(scope="session")
def a2():
    return build_zigzag(path_graph(2), QQ, 2)


@pytest.fixture(scope="session")
def a3():
    return build_zigzag(path_graph(3), QQ, 2)


@pytest.fixture(scope="session")
def a3_gf():
    return build_zigzag(path_graph(3), GF, 2)


@pytest.fixture(scope="session")
def a2_d3():
    return build_zigzag(path_graph(2, d=3, forward_degree=1), QQ, 3)


@pytest.fixture(scope="session")
def p3(a3):
    return {v: projective(a3, v) for v in a3.vertices}


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[num])
