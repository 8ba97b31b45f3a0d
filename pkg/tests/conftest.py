import itertools
import random

import pytest

from latdeck.ballot_model import BallotStyle, Contest, Deck, is_feasible


@pytest.fixture
def fig2():
    """President {1,2,3} v=1 and senate {4,5} v=1."""
    return BallotStyle(
        "fig2",
        (Contest("president", (1, 2, 3), 1), Contest("senate", (4, 5), 1)),
        5,
        ("Adams", "Jefferson", "Burr", "Pinckney", "Clay"),
    )


@pytest.fixture
def fig2_deck():
    return Deck.of([[1, 4], [2, 5], [2, 5], [3], [3], [3]])


@pytest.fixture
def example1():
    return BallotStyle.from_shapes([(1, 1), (2, 2)], "example1")


def random_style(rng: random.Random, max_n: int = 7) -> BallotStyle:
    n = rng.randint(2, max_n)
    shapes, left = [], n
    while left:
        size = rng.randint(1, left)
        shapes.append((size, rng.randint(1, size)))
        left -= size
    return BallotStyle.from_shapes(shapes, "rand")


def random_feasible_ballot(rng: random.Random, style: BallotStyle) -> list[int]:
    marks = []
    for contest in style.contests:
        k = rng.randint(0, contest.max_votes)
        marks.extend(rng.sample(contest.candidates, k))
    return marks


def random_deck(rng: random.Random, style: BallotStyle, max_len: int = 6) -> Deck:
    return Deck.of(random_feasible_ballot(rng, style) for _ in range(rng.randint(0, max_len)))


def all_feasible_ballots(style: BallotStyle) -> list[frozenset]:
    n = style.n_candidates
    out = []
    for r in range(n + 1):
        for combo in itertools.combinations(range(1, n + 1), r):
            if is_feasible(style, combo):
                out.append(frozenset(combo))
    return out


def pytest_terminal_summary(terminalreporter):
    import sys

    for name, module in list(sys.modules.items()):
        if name.endswith("test_acceptance") and getattr(module, "RESULTS", None):
            terminalreporter.section("acceptance criteria")
            for line in module.RESULTS:
                terminalreporter.write_line(line)
