import pytest

from cascademorph.cascade import ActionEvent, FollowerGraph, build_cascade

# Follower graph of the toy example: B and D follow A, D and C follow B, E follows D.
# E -> A (A follows E) is irrelevant to the cascade because A acts first.
TOY_FOLLOWS = [("A", "B"), ("A", "D"), ("B", "D"), ("B", "C"), ("D", "E"), ("E", "A")]
TOY_ACTIONS = [("A", 1), ("B", 2), ("D", 3), ("C", 4), ("E", 5)]


@pytest.fixture
def toy_fg():
    return FollowerGraph.from_edges(TOY_FOLLOWS)


@pytest.fixture
def toy_events():
    return [ActionEvent("toy", u, t) for u, t in TOY_ACTIONS]


@pytest.fixture
def toy_cascade(toy_fg, toy_events):
    return build_cascade(toy_fg, toy_events)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import REPORT
    except ImportError:
        return
    if REPORT:
        terminalreporter.section("acceptance criteria")
        for line in REPORT:
            terminalreporter.write_line(line)
