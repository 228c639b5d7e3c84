import pytest

from netbargain.instance import Instance


@pytest.fixture(scope="session")
def e2():
    # path 0-1-2 with weights 2, 1: the workhorse micro-instance
    return Instance(3, ((0, 1, 2.0), (1, 2, 1.0)))


@pytest.fixture(scope="session")
def e4():
    # 4-node path with two slack levels (0.4 and 0.45)
    return Instance(4, ((0, 1, 2.0), (1, 2, 1.5), (2, 3, 0.8)))


@pytest.fixture(scope="session")
def t1():
    # unit triangle: pointed but not tight, no stable outcome
    return Instance(3, ((0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)))


@pytest.fixture(scope="session")
def b1():
    # 4-cycle 10/9/10/9: a one-parameter family of outcomes
    return Instance(4, ((0, 1, 10.0), (1, 2, 9.0), (2, 3, 10.0), (3, 0, 9.0)))


@pytest.fixture(scope="session")
def e3():
    # 4-cycle 3/1/3/1: unique outcome, two single-edge structures
    return Instance(4, ((0, 1, 3.0), (1, 2, 1.0), (2, 3, 3.0), (3, 0, 1.0)))


@pytest.fixture(scope="session")
def single_edge():
    return Instance(2, ((0, 1, 1.0),))


@pytest.fixture(scope="session")
def p9():
    # 10-node path forming a single length-9 structure with slack 0.5
    weights = [2.1, 2.2, 2.35, 1.65, 2.25, 1.9, 1.9, 1.8, 1.95]
    return Instance(10, tuple((i, i + 1, w) for i, w in enumerate(weights)))
