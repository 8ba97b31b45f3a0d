"""Easy secure decks that give every candidate a different positive total.

When all totals differ, any swap changes some total, so these decks are
always secure. Their lengths are upper bounds on the optimum.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from . import milp
from .ballot_model import BallotStyle, Deck
from .errors import InternalConsistencyError, SolverFailure


def triangular_deck(style: BallotStyle) -> Deck:
    """Candidate ``i`` alone on ``i`` ballots, for ``N (N + 1) / 2`` ballots in total."""
    return Deck.of([[i] for i in range(1, style.n_candidates + 1) for _ in range(i)])


@dataclass
class DistinctVotesModel:
    """Assign the values ``1..N`` to contests, minimising the ballots needed."""

    style: BallotStyle
    model: milp.Model
    gamma: dict[tuple[int, int], int] = field(default_factory=dict)
    length: int = -1


def build_distinct_votes_model(style: BallotStyle) -> DistinctVotesModel:
    n = style.n_candidates
    model = milp.Model(name="distinct_votes")
    dv = DistinctVotesModel(style, model)
    for c in range(style.n_contests):
        for g in range(1, n + 1):
            dv.gamma[c, g] = model.binary(f"gamma_{c}_{g}")
    dv.length = model.integer("B", lb=n)
    for c, contest in enumerate(style.contests):
        model.add_constraint({dv.gamma[c, g]: 1 for g in range(1, n + 1)}, "==", contest.size)
        # v_c B >= sum of the values handed to contest c
        coeffs = {dv.length: contest.max_votes}
        coeffs.update({dv.gamma[c, g]: -g for g in range(1, n + 1)})
        model.add_constraint(coeffs, ">=", 0)
    for g in range(1, n + 1):
        model.add_constraint({dv.gamma[c, g]: 1 for c in range(style.n_contests)}, "==", 1)
    model.minimize({dv.length: 1})
    return dv


def pack_round_robin(style: BallotStyle, votes: dict[int, int], length: int) -> Deck:
    """Spread each contest's votes over ``length`` ballots cyclically.

    Within a contest, candidates are visited in increasing order of their
    vote count; each vote goes to the next ballot in a cycle that restarts
    at ballot 1 for every contest.
    """
    ballots: list[set[int]] = [set() for _ in range(length)]
    for contest in style.contests:
        b = 0
        for i in sorted(contest.candidates, key=lambda i: (votes[i], i)):
            for _ in range(votes[i]):
                if i in ballots[b]:
                    raise InternalConsistencyError(f"candidate {i} placed twice on ballot {b + 1}")
                ballots[b].add(i)
                b = (b + 1) % length
        for ballot in ballots:
            if len(ballot.intersection(contest.candidates)) > contest.max_votes:
                raise InternalConsistencyError(f"packing overvoted {contest.contest_id!r}")
    return Deck.of(ballots)


def distinct_votes_deck(
    style: BallotStyle, time_limit: float | None = None, backend: str | None = None
) -> Deck:
    """Shortest deck in which the totals are exactly a permutation of ``1..N``."""
    dv = build_distinct_votes_model(style)
    dv.model.time_limit = time_limit
    outcome = milp.solve(dv.model, backend)
    if outcome.status is not milp.Status.OPTIMAL:
        raise SolverFailure(outcome.status.value, outcome.message)
    length = int(outcome.value(dv.length))
    votes: dict[int, int] = {}
    for c, contest in enumerate(style.contests):
        values = sorted(g for g in range(1, style.n_candidates + 1) if outcome.value(dv.gamma[c, g]) > 0.5)
        votes.update(zip(contest.candidates, values))
    return pack_round_robin(style, votes, length)
