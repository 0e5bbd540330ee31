import numpy as np
import pytest

from sl2lab.app import configure_logging, create_lab
from sl2lab.sl2 import sl2_group


@pytest.fixture(scope="session", autouse=True)
def logging_on_stderr():
    """Keep log lines out of the record stream on stdout."""
    configure_logging("debug")


@pytest.fixture(scope="session")
def group5():
    return sl2_group(5)


@pytest.fixture(scope="session")
def group7():
    return sl2_group(7)


@pytest.fixture(scope="session")
def group11():
    return sl2_group(11)


@pytest.fixture
def rng():
    """Seeded generator, fresh for every test."""
    return np.random.default_rng(1234)


@pytest.fixture
def offdiag1(group5):
    return list(group5.named_pair("offdiag1"))


@pytest.fixture
def lab():
    return create_lab()


def run_lab(lab, capsys, *argv):
    """Exit code and captured stdout of one command line."""
    code = lab.run(list(argv))
    return code, capsys.readouterr().out
