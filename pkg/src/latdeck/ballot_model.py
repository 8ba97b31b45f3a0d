"""Ballot styles, decks, and how a correct or misconfigured machine tallies them.

Candidates carry dense one-based global indices. A ballot is the set of
targets marked on it. A contest is overvoted on a ballot when more than
``max_votes`` of its targets are read as marked, and then it contributes
nothing to any tally.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import InvalidInputError, InvalidSwapError, PreconditionError
from .swaps import Swap

Ballot = frozenset
"""A filled-out ballot: the frozenset of marked candidate indices."""

Tally = tuple
"""Per-candidate vote totals; position ``i - 1`` holds candidate ``i``."""


@dataclass(frozen=True)
class Contest:
    contest_id: str
    candidates: tuple[int, ...]
    max_votes: int

    def __post_init__(self) -> None:
        cands = tuple(int(i) for i in self.candidates)
        object.__setattr__(self, "candidates", cands)
        if not cands:
            raise InvalidInputError(f"contest {self.contest_id!r} has no candidates")
        if any(a >= b for a, b in zip(cands, cands[1:])):
            raise InvalidInputError(
                f"contest {self.contest_id!r}: candidates must be strictly increasing"
            )
        if not 1 <= self.max_votes <= len(cands):
            raise InvalidInputError(
                f"contest {self.contest_id!r}: need 1 <= max_votes <= {len(cands)}"
            )

    @property
    def size(self) -> int:
        return len(self.candidates)

    @property
    def noncompetitive(self) -> bool:
        return self.size == self.max_votes

    @property
    def shape(self) -> tuple[int, int]:
        return (self.size, self.max_votes)


@dataclass(frozen=True)
class BallotStyle:
    """Contests partitioning candidates ``1..n_candidates``."""

    style_id: str
    contests: tuple[Contest, ...]
    n_candidates: int
    labels: tuple[str, ...] = ()
    _contest_of: tuple[int, ...] = field(default=(), repr=False, compare=False)

    def __post_init__(self) -> None:
        contests = tuple(self.contests)
        object.__setattr__(self, "contests", contests)
        owner = [-1] * self.n_candidates
        for pos, contest in enumerate(contests):
            for i in contest.candidates:
                if not 1 <= i <= self.n_candidates:
                    raise InvalidInputError(f"candidate {i} outside 1..{self.n_candidates}")
                if owner[i - 1] != -1:
                    raise InvalidInputError(f"candidate {i} appears in two contests")
                owner[i - 1] = pos
        if -1 in owner:
            raise InvalidInputError(f"candidate {owner.index(-1) + 1} belongs to no contest")
        object.__setattr__(self, "_contest_of", tuple(owner))
        labels = tuple(self.labels) or tuple(f"cand{i}" for i in range(1, self.n_candidates + 1))
        if len(labels) != self.n_candidates:
            raise InvalidInputError("one label per candidate is required")
        object.__setattr__(self, "labels", labels)

    @classmethod
    def from_shapes(
        cls, shapes: Sequence[tuple[int, int]], style_id: str = "style"
    ) -> "BallotStyle":
        """Build a style from ``(size, max_votes)`` pairs, numbering candidates in order."""
        contests = []
        nxt = 1
        for k, (size, votes) in enumerate(shapes):
            contests.append(Contest(f"c{k + 1}", tuple(range(nxt, nxt + size)), votes))
            nxt += size
        return cls(style_id, tuple(contests), nxt - 1)

    def contest_of(self, i: int) -> int:
        """Zero-based position of the contest holding candidate ``i``."""
        return self._contest_of[i - 1]

    @property
    def n_contests(self) -> int:
        return len(self.contests)

    def validate_ballot(self, ballot: Iterable[int]) -> None:
        for i in ballot:
            if not 1 <= i <= self.n_candidates:
                raise InvalidInputError(f"unknown candidate index {i}")


@dataclass(frozen=True)
class Deck:
    """An ordered sequence of ballots."""

    ballots: tuple[frozenset, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "ballots", tuple(frozenset(b) for b in self.ballots))

    @classmethod
    def of(cls, ballots: Iterable[Iterable[int]]) -> "Deck":
        return cls(tuple(frozenset(int(i) for i in b) for b in ballots))

    def __len__(self) -> int:
        return len(self.ballots)

    def __iter__(self):
        return iter(self.ballots)

    def __add__(self, other: "Deck") -> "Deck":
        return Deck(self.ballots + other.ballots)

    def as_lists(self) -> list[list[int]]:
        return [sorted(b) for b in self.ballots]


def _check_deck(style: BallotStyle, deck: Deck) -> None:
    for ballot in deck:
        style.validate_ballot(ballot)


def _check_swap(style: BallotStyle, sigma: Swap) -> None:
    if sigma.n != style.n_candidates:
        raise InvalidSwapError(
            f"swap acts on {sigma.n} candidates, style has {style.n_candidates}"
        )


def is_feasible(style: BallotStyle, ballot: Iterable[int]) -> bool:
    """True iff the ballot overvotes no contest."""
    ballot = frozenset(ballot)
    style.validate_ballot(ballot)
    return all(len(ballot.intersection(c.candidates)) <= c.max_votes for c in style.contests)


def mark_counts(style: BallotStyle, deck: Deck) -> tuple[int, ...]:
    """Number of ballots marking each candidate, ignoring overvotes."""
    counts = [0] * style.n_candidates
    for ballot in deck:
        for i in ballot:
            counts[i - 1] += 1
    return tuple(counts)


def tabulate_swapped(style: BallotStyle, deck: Deck, sigma: Swap) -> tuple[int, ...]:
    """Totals reported by a machine that reads candidate ``i`` from target ``sigma(i)``."""
    _check_deck(style, deck)
    _check_swap(style, sigma)
    totals = [0] * style.n_candidates
    mapped = [[sigma(j) for j in c.candidates] for c in style.contests]
    for ballot in deck:
        for contest, targets in zip(style.contests, mapped):
            read = [t in ballot for t in targets]
            if sum(read) > contest.max_votes:
                continue
            for i, hit in zip(contest.candidates, read):
                if hit:
                    totals[i - 1] += 1
    return tuple(totals)


def tabulate_correct(style: BallotStyle, deck: Deck) -> tuple[int, ...]:
    """Totals reported by a correctly configured machine."""
    return tabulate_swapped(style, deck, Swap.identity(style.n_candidates))


def overvote_alert(style: BallotStyle, deck: Deck, sigma: Swap) -> bool:
    """True iff some ballot has a contest read as overvoted under ``sigma``."""
    _check_deck(style, deck)
    _check_swap(style, sigma)
    for contest in style.contests:
        targets = [sigma(j) for j in contest.candidates]
        for ballot in deck:
            if sum(t in ballot for t in targets) > contest.max_votes:
                return True
    return False


def require_feasible_deck(style: BallotStyle, deck: Deck) -> None:
    for b, ballot in enumerate(deck, start=1):
        if not is_feasible(style, ballot):
            raise PreconditionError(f"ballot {b} overvotes a contest")


def detects(style: BallotStyle, deck: Deck, sigma: Swap) -> bool:
    """Whether ``deck`` exposes the misconfiguration ``sigma``.

    For a deck of feasible ballots this holds iff some candidate is marked a
    different number of times than its swapped target, or some ballot is
    read as overvoting a contest.
    """
    require_feasible_deck(style, deck)
    _check_swap(style, sigma)
    if sigma.is_identity:
        raise InvalidSwapError("detection is defined for non-identity swaps")
    counts = mark_counts(style, deck)
    if any(counts[i - 1] != counts[sigma(i) - 1] for i in range(1, style.n_candidates + 1)):
        return True
    return overvote_alert(style, deck, sigma)


class FastDetector:
    """Bitmask form of the detection test for enumerating many swaps on one deck.

    Construction validates the deck once; ``undetected(mapping)`` takes a raw
    zero-based target tuple and skips per-call validation.
    """

    def __init__(self, style: BallotStyle, deck: Deck) -> None:
        require_feasible_deck(style, deck)
        self.n = style.n_candidates
        self.counts = mark_counts(style, deck)
        self.masks = [sum(1 << (i - 1) for i in ballot) for ballot in deck]
        self.masks = [m for m in self.masks if m]
        # a contest with no more candidates than votes can never read as overvoted
        self.contests = [
            ([i - 1 for i in c.candidates], c.max_votes)
            for c in style.contests
            if c.size > c.max_votes
        ]

    def undetected(self, mapping: Sequence[int]) -> bool:
        """``mapping[i] = sigma(i + 1) - 1``; True iff tallies match and no overvote."""
        counts = self.counts
        for i, t in enumerate(mapping):
            if counts[i] != counts[t]:
                return False
        for members, cap in self.contests:
            mapped = 0
            for i in members:
                mapped |= 1 << mapping[i]
            for mask in self.masks:
                if (mask & mapped).bit_count() > cap:
                    return False
        return True
