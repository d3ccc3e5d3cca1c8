import pytest

from ggqtree import InductionParams, Matcher, build_fixture, induce


@pytest.fixture(scope="session")
def social():
    return build_fixture("social")


@pytest.fixture(scope="session")
def G(social):
    return social.graph


@pytest.fixture(scope="session")
def social_tree(social):
    return induce(social.graph, social.training, refs=social.refinements())


@pytest.fixture(scope="session")
def matcher(G):
    return Matcher(G)


_ACCEPTANCE: list[str] = []


class _Recorder:
    def __init__(self, number: int, title: str):
        self.number, self.title, self.detail = number, title, ""

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        status = "PASS" if exc_type is None else "FAIL"
        line = f"criterion {self.number} {status}: {self.title}"
        if self.detail:
            line += f" ({self.detail})"
        _ACCEPTANCE.append(line)
        print(line)
        return False


@pytest.fixture
def criterion():
    """``with criterion(n, title) as rec:`` records one pass/fail line."""
    return _Recorder


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
