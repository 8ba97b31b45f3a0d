import itertools
import math

import pytest

from latdeck.ballot_model import BallotStyle, is_feasible, mark_counts
from latdeck.bounds import distinct_votes_deck, pack_round_robin, triangular_deck
from latdeck.cut_finder import brute_force_check
from latdeck.errors import InternalConsistencyError

from conftest import random_style
import random


def partition_length(style: BallotStyle) -> int:
    """Shortest all-distinct deck by trying every assignment of 1..N to candidates."""
    n = style.n_candidates
    best = math.inf
    for perm in itertools.permutations(range(1, n + 1)):
        need = n
        for contest in style.contests:
            total = sum(perm[i - 1] for i in contest.candidates)
            need = max(need, math.ceil(total / contest.max_votes))
        best = min(best, need)
    return best


def test_triangular(fig2):
    deck = triangular_deck(fig2)
    assert len(deck) == 15
    assert mark_counts(fig2, deck) == (1, 2, 3, 4, 5)
    assert len(triangular_deck(BallotStyle.from_shapes([(1, 1)]))) == 1


def test_distinct_votes_length_two_contests(fig2):
    deck = distinct_votes_deck(fig2)
    assert len(deck) == 8 == partition_length(fig2)
    assert sorted(mark_counts(fig2, deck)) == [1, 2, 3, 4, 5]


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_single_plurality_contest(n):
    style = BallotStyle.from_shapes([(n, 1)])
    assert len(distinct_votes_deck(style)) == n * (n + 1) // 2


@pytest.mark.parametrize("seed", range(25))
def test_heuristic_decks_random(seed):
    rng = random.Random(seed)
    style = random_style(rng, max_n=6)
    tri, dv = triangular_deck(style), distinct_votes_deck(style)
    assert len(dv) == partition_length(style)
    assert len(dv) <= len(tri)
    for deck in (tri, dv):
        assert all(is_feasible(style, b) for b in deck)
        assert sorted(mark_counts(style, deck)) == list(range(1, style.n_candidates + 1))
        assert brute_force_check(style, deck).secure


def test_packing_guards_against_overvotes():
    style = BallotStyle.from_shapes([(2, 1)])
    with pytest.raises(InternalConsistencyError):
        pack_round_robin(style, {1: 1, 2: 2}, 2)
