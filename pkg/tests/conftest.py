import numpy as np
import pytest

from robust_rl import TabularMdp


def chain_mdp(gamma=0.5):
    """s0 -> s1 (absorbing); reward 1 only at s1."""
    kernel = np.zeros((2, 1, 2))
    kernel[0, 0, 1] = 1.0
    kernel[1, 0, 1] = 1.0
    reward = np.array([[0.0], [1.0]])
    return TabularMdp(kernel, reward, gamma, np.array([0.5, 0.5]))


def random_mdp(rng, S, A, gamma=0.9):
    kernel = rng.dirichlet(np.ones(S), size=(S, A))
    reward = rng.uniform(size=(S, A))
    rho = rng.dirichlet(np.ones(S))
    return TabularMdp(kernel, reward, gamma, rho)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def chain():
    return chain_mdp()


_ACCEPTANCE = []


@pytest.fixture
def criterion(request):
    """Record one acceptance line; the outcome is taken from the test result."""
    entry = {"name": request.node.name, "detail": ""}
    _ACCEPTANCE.append(entry)
    yield entry
    entry.setdefault("passed", False)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call" and "criterion" in item.fixturenames:
        entry = item.funcargs["criterion"]
        entry["passed"] = rep.passed


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for e in _ACCEPTANCE:
        status = "PASS" if e.get("passed") else "FAIL"
        terminalreporter.write_line(f"{status}  {e['name']}: {e['detail']}")
