"""Decks built to look diligent while hiding a chosen swap.

These constructions show that common legal requirements on test decks do
not by themselves make a deck expose misconfigurations.
"""
from __future__ import annotations

from .ballot_model import BallotStyle, Deck
from .errors import ConstructionInapplicable, InvalidSwapError
from .master import RuleSet, rule_violations
from .swaps import Swap, cycle_decomposition


def hide_any_swap(style: BallotStyle, sigma: Swap) -> Deck:
    """One singleton ballot per candidate.

    Every candidate gets exactly one vote and no ballot can be read as an
    overvote, so every swap, ``sigma`` included, leaves the tallies intact.
    """
    if sigma.is_identity:
        raise InvalidSwapError("a swap to hide must move some candidate")
    return Deck.of([[i] for i in range(1, style.n_candidates + 1)])


def hide_cross_contest_swap(style: BallotStyle, sigma: Swap) -> Deck:
    """Hide ``sigma`` while giving candidates of one contest different totals.

    Requires every cycle of ``sigma`` to touch each contest at most once. The
    ``k``-th cycle (ordered by smallest member, fixed points included) is cast
    as a ballot ``k`` times, so a cycle's members share a total and ``sigma``
    only permutes candidates with equal totals.
    """
    if sigma.is_identity:
        raise InvalidSwapError("a swap to hide must move some candidate")
    cycles = cycle_decomposition(sigma)
    for cycle in cycles:
        contests = [style.contest_of(i) for i in cycle]
        if len(set(contests)) != len(contests):
            raise ConstructionInapplicable(
                f"cycle {cycle} visits contest "
                f"{style.contests[max(contests, key=contests.count)].contest_id!r} twice"
            )
    ballots = []
    for k, cycle in enumerate(cycles, start=1):
        ballots.extend([list(cycle)] * k)
    return Deck.of(ballots)


def rule_report(style: BallotStyle, deck: Deck) -> dict[str, bool]:
    """Which of the common deck rules ``deck`` satisfies."""
    return {
        "one-vote": not rule_violations(style, deck, RuleSet.one_vote()),
        "distinct": not rule_violations(style, deck, RuleSet(distinct_within_contest=True)),
        "michigan": not rule_violations(style, deck, RuleSet.michigan()),
    }
