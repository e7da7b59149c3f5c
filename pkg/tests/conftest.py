import pytest

from shuttlebus.chain_graph import build_chain_dag, chains_for
from shuttlebus.code_model import code_for

ACCEPTANCE: list[str] = []


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long-running statistical checks")
    config.addinivalue_line("markers", "acceptance: end-to-end acceptance criteria")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)


@pytest.fixture
def verdict():
    """Record and print one PASS/FAIL line; returns the boolean."""

    def record(number, ok: bool, text: str) -> bool:
        line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {text}"
        ACCEPTANCE.append(line)
        print(line)
        return ok

    return record


@pytest.fixture(scope="session")
def d3():
    code = code_for(3)
    chains = chains_for(code)
    return code, chains, build_chain_dag(chains)
