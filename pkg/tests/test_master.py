import itertools
import random

import pytest

from latdeck import milp
from latdeck.ballot_model import BallotStyle, Deck, detects, mark_counts, overvote_alert
from latdeck.errors import CapacityError, InvalidSwapError, PreconditionError
from latdeck.master import (
    Improvements,
    RuleSet,
    build_master,
    dedupe_cuts,
    extract_deck,
    precompute_overvotable_contests,
    rule_violations,
    sequential_equivalent_pairs,
    solve_feasibility,
)
from latdeck.swaps import Swap

from conftest import all_feasible_ballots, random_style

MERGED = BallotStyle.from_shapes([(3, 3)], "merged")


def test_census_without_cuts(fig2):
    mm = build_master(fig2, [], 3, RuleSet.michigan())
    assert mm.census == {"beta": 15, "gamma": 20, "y": 0, "p": 0, "lambda": 0}


def test_census_with_one_cut(fig2):
    sigma = Swap.transposition(5, 2, 5)
    assert precompute_overvotable_contests(fig2, sigma) == {0, 1}
    mm = build_master(fig2, [sigma, sigma], 3, RuleSet.michigan())
    assert set(mm.y) == {(2, 5), (5, 2)}
    assert len(mm.p) == 3 * 2
    assert sum(c.name.startswith("detect_") for c in mm.model.constraints) == 1


def test_census_without_reduction(fig2):
    mm = build_master(fig2, [Swap.transposition(5, 2, 5)], 3, improvements=Improvements().without(1))
    assert len(mm.y) == 25
    assert len(mm.p) == 3 * 2


def test_noncompetitive_permutation_never_overvotes():
    style = BallotStyle.from_shapes([(3, 3), (2, 1)])
    assert precompute_overvotable_contests(style, Swap.from_cycles(5, [(1, 2, 3)])) == frozenset()


@pytest.mark.parametrize("seed", range(12))
def test_overvotable_contests_exact(seed):
    rng = random.Random(seed)
    style = random_style(rng, max_n=6)
    n = style.n_candidates
    ballots = all_feasible_ballots(style)
    for _ in range(15):
        perm = list(range(1, n + 1))
        rng.shuffle(perm)
        sigma = Swap(tuple(perm))
        if sigma.is_identity:
            continue
        predicted = precompute_overvotable_contests(style, sigma)
        for c, contest in enumerate(style.contests):
            targets = [sigma(i) for i in contest.candidates]
            reachable = any(sum(t in b for t in targets) > contest.max_votes for b in ballots)
            assert (c in predicted) == reachable


def test_guards(fig2):
    with pytest.raises(PreconditionError):
        build_master(fig2, [], 0)
    with pytest.raises(CapacityError):
        build_master(fig2, [], 501)
    with pytest.raises(InvalidSwapError):
        build_master(fig2, [Swap.identity(5)], 2)
    with pytest.raises(PreconditionError):
        RuleSet(append_exact_overvote_ballot=True)
    with pytest.raises(PreconditionError):
        RuleSet.named("texas")
    with pytest.raises(ValueError):
        Improvements().without(6)


def test_improvements_toggle():
    assert Improvements().enabled() == (1, 2, 3, 4, 5)
    assert Improvements().without(2, 5).enabled() == (1, 3, 4)


def test_within_contest_order(fig2):
    deck = solve_feasibility(build_master(fig2, [], 3))
    counts = mark_counts(fig2, deck)
    assert counts[0] < counts[1] < counts[2] and counts[3] < counts[4]


def test_merged_example_two_ballots():
    deck = solve_feasibility(build_master(MERGED, [], 2))
    assert sorted(deck.as_lists()) in ([[2, 3], [3]], [[3], [2, 3]])


def test_merged_example_one_ballot_infeasible():
    assert solve_feasibility(build_master(MERGED, [], 1, RuleSet.one_vote())) is None


def test_empty_cut_set_single_ballot(fig2):
    assert solve_feasibility(build_master(fig2, [], 1, improvements=Improvements().without(2))) is not None


def test_distinct_rule_adds_order_without_improvement(fig2):
    with_rule = build_master(fig2, [], 3, RuleSet.michigan(), Improvements().without(2))
    without = build_master(fig2, [], 3, RuleSet.one_vote(), Improvements().without(2))
    names = lambda mm: {c.name for c in mm.model.constraints if c.name.startswith("order_")}
    assert len(names(with_rule)) == 3 and not names(without)


def test_sequential_pairs():
    style = BallotStyle.from_shapes([(2, 1), (3, 1), (2, 1), (2, 1), (3, 1)])
    assert sequential_equivalent_pairs(style) == [(0, 2), (2, 3), (1, 4)]


def test_dedupe():
    a, b = Swap.transposition(3, 1, 2), Swap.transposition(3, 2, 3)
    assert dedupe_cuts([a, b, Swap.transposition(3, 1, 2)]) == [a, b]


def _check_lambda_relation(style, deck):
    counts = mark_counts(style, deck)
    for c, c2 in sequential_equivalent_pairs(style):
        first = [counts[i - 1] for i in style.contests[c].candidates]
        second = [counts[i - 1] for i in style.contests[c2].candidates]
        assert any(a < b for a, b in zip(first, second))


@pytest.mark.parametrize("shapes", [[(2, 1)] * 3, [(2, 1), (3, 2), (2, 1)], [(3, 1), (3, 1)]])
def test_lambda_chain_and_gamma_consistency(shapes):
    style = BallotStyle.from_shapes(shapes)
    cuts = []
    for B in range(1, 12):
        mm = build_master(style, cuts, B, RuleSet.michigan())
        outcome = milp.solve(mm.model)
        if outcome.status is milp.Status.INFEASIBLE:
            continue
        deck = extract_deck(mm, outcome)
        counts = mark_counts(style, deck)
        for (i, g), idx in mm.gamma.items():
            assert (outcome.value(idx) == 1.0) == (counts[i - 1] == g)
        _check_lambda_relation(style, deck)
        return
    pytest.fail("no feasible length found")


@pytest.mark.parametrize("seed", range(15))
def test_returned_decks_expose_cuts(seed):
    rng = random.Random(seed)
    style = random_style(rng, max_n=5)
    n = style.n_candidates
    cuts = []
    for _ in range(4):
        perm = list(range(1, n + 1))
        rng.shuffle(perm)
        if perm != list(range(1, n + 1)):
            cuts.append(Swap(tuple(perm)))
    for B in range(1, 16):
        deck = solve_feasibility(build_master(style, cuts, B, RuleSet.one_vote()))
        if deck is not None:
            assert all(detects(style, deck, s) for s in cuts)
            assert not rule_violations(style, deck, RuleSet.one_vote())
            break


def test_rule_violations(fig2):
    deck = Deck.of([[1, 4], [2, 4]])
    assert rule_violations(fig2, deck, RuleSet.none()) == []
    problems = rule_violations(fig2, deck, RuleSet.michigan())
    assert any("without a vote" in p for p in problems)
    assert any("repeats" in p for p in problems)
