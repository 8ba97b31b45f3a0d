"""Exact combinatorial search, independent of any MILP.

``search_undetected_swap`` finds a hidden swap by backtracking over targets
with equal mark counts, so it scales past the literal ``N!`` walk.
``find_secure_deck`` decides whether any rule-abiding deck of a given length
exposes every swap. It enumerates vote totals and then deck columns contest
by contest, pruning with three facts:

* relabelling candidates inside a contest, or permuting contests of the same
  shape, maps secure decks to secure decks, so canonical orderings suffice;
* a transposition that no feasible ballot can read as an overvote is hidden
  whenever the two candidates have equal totals;
* a swap hidden by the contests placed so far stays hidden however the
  remaining contests are filled in, since it fixes their candidates.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterator, Sequence

from .ballot_model import BallotStyle, Deck, mark_counts, require_feasible_deck
from .master import RuleSet
from .swaps import Swap


def _bit_count(x: int) -> int:
    return bin(x).count("1")


class _SwapSearch:
    """Backtracking search for a non-identity swap hidden by a fixed deck."""

    def __init__(self, style: BallotStyle, masks: Sequence[int], counts: Sequence[int]) -> None:
        self.style = style
        self.masks = [m for m in masks if m]
        self.counts = counts
        self.order = [i - 1 for c in style.contests for i in c.candidates]
        self.owner = [style.contest_of(i) for i in range(1, style.n_candidates + 1)]
        self.caps = [c.max_votes for c in style.contests]
        self.competitive = [c.size > c.max_votes for c in style.contests]

    def run(self, movable: set[int] | None = None) -> list[int] | None:
        n = self.style.n_candidates
        movable = set(range(n)) if movable is None else movable
        order = [i for i in self.order if i in movable]
        mapping = list(range(n))
        used = [i not in movable for i in range(n)]
        mapped_mask = [0] * self.style.n_contests

        def rec(pos: int, moved: bool) -> bool:
            if pos == len(order):
                return moved
            i = order[pos]
            c = self.owner[i]
            for j in order:
                if used[j] or self.counts[j] != self.counts[i]:
                    continue
                new_mask = mapped_mask[c] | (1 << j)
                if self.competitive[c] and any(
                    _bit_count(m & new_mask) > self.caps[c] for m in self.masks
                ):
                    continue
                used[j] = True
                mapping[i] = j
                old = mapped_mask[c]
                mapped_mask[c] = new_mask
                if rec(pos + 1, moved or j != i):
                    return True
                mapped_mask[c] = old
                used[j] = False
                mapping[i] = i
            return False

        return mapping if rec(0, False) else None


def search_undetected_swap(style: BallotStyle, deck: Deck) -> Swap | None:
    """A non-identity swap hidden by ``deck``, or ``None`` if ``deck`` is secure."""
    require_feasible_deck(style, deck)
    masks = [sum(1 << (i - 1) for i in ballot) for ballot in deck]
    found = _SwapSearch(style, masks, mark_counts(style, deck)).run()
    return None if found is None else Swap(tuple(t + 1 for t in found))


def never_overvotable_pair(style: BallotStyle, i: int, j: int) -> bool:
    """True iff no feasible ballot is read as an overvote when ``i`` and ``j`` trade targets.

    Inside one contest the contest reads its own targets. Across contests,
    contest ``c`` reads ``|N_c| - 1`` own targets plus one foreign target, which
    can exceed ``v_c`` exactly when ``c`` is competitive.
    """
    a, b = style.contests[style.contest_of(i)], style.contests[style.contest_of(j)]
    return a is b or (a.noncompetitive and b.noncompetitive)


@dataclass
class SearchStats:
    tally_vectors: int = 0
    columns: int = 0
    prefix_prunes: int = 0


@dataclass
class SecureDeckSearch:
    style: BallotStyle
    length: int
    rules: RuleSet
    stats: SearchStats = field(default_factory=SearchStats)

    def contest_order(self) -> list[int]:
        """Contests with more candidates first, so infeasible totals fail early."""
        shapes = [c.shape for c in self.style.contests]
        return sorted(range(len(shapes)), key=lambda k: (-shapes[k][0], -shapes[k][1], k))

    def _trivially_impossible(self, low: int) -> bool:
        L = self.length
        for contest in self.style.contests:
            smallest = sum(range(low, low + contest.size))
            if low + contest.size - 1 > L or smallest > contest.max_votes * L:
                return True
        free = sum(c.size for c in self.style.contests if c.noncompetitive)
        return free > L - low + 1

    def tally_vectors(self) -> Iterator[list[int]]:
        """Canonical per-candidate totals that could belong to a secure deck."""
        style, L = self.style, self.length
        low = 1 if self.rules.at_least_one_vote else 0
        if self._trivially_impossible(low):
            return
        order = self.contest_order()
        totals = [0] * style.n_candidates
        # candidates of noncompetitive contests may trade targets freely, so
        # their totals must all differ
        used_free: set[int] = set()
        previous_of_shape: dict[tuple[int, int], int] = {}
        prev_index: dict[int, int | None] = {}
        for k in order:
            shape = style.contests[k].shape
            prev_index[k] = previous_of_shape.get(shape)
            previous_of_shape[shape] = k

        def rec(pos: int) -> Iterator[list[int]]:
            if pos == len(order):
                yield list(totals)
                return
            k = order[pos]
            contest = style.contests[k]
            floor = None
            if prev_index[k] is not None:
                floor = tuple(totals[i - 1] for i in style.contests[prev_index[k]].candidates)
            # strictly increasing: equal totals inside a contest are always hidden
            for combo in itertools.combinations(range(low, L + 1), contest.size):
                if sum(combo) > contest.max_votes * L:
                    continue
                if floor is not None and combo < floor:
                    continue
                if contest.noncompetitive and used_free.intersection(combo):
                    continue
                for i, t in zip(contest.candidates, combo):
                    totals[i - 1] = t
                if contest.noncompetitive:
                    used_free.update(combo)
                yield from rec(pos + 1)
                if contest.noncompetitive:
                    used_free.difference_update(combo)
            for i in contest.candidates:
                totals[i - 1] = 0

        yield from rec(0)

    def _columns(
        self, contest, totals: Sequence[int], groups: list[list[int]]
    ) -> Iterator[list[int]]:
        """Assign each ballot a subset (bitmask over global indices) of the contest.

        Ballots in one group agree on all earlier contests, so their entries
        are taken in non-decreasing mask order to skip reordered duplicates.
        """
        L = self.length
        cands = list(contest.candidates)
        subsets = []
        for r in range(contest.max_votes + 1):
            for combo in itertools.combinations(cands, r):
                subsets.append((sum(1 << (i - 1) for i in combo), combo))
        subsets.sort()
        remaining = {i: totals[i - 1] for i in cands}
        rows = [r for group in groups for r in group]
        first_in_group = set(group[0] for group in groups)
        column = [0] * L
        choice_idx = [0] * L

        def rec(pos: int) -> Iterator[list[int]]:
            if pos == len(rows):
                if all(v == 0 for v in remaining.values()):
                    yield list(column)
                return
            rows_left = len(rows) - pos
            if any(v > rows_left for v in remaining.values()):
                return
            row = rows[pos]
            start = 0 if row in first_in_group else choice_idx[rows[pos - 1]]
            for s in range(start, len(subsets)):
                mask, combo = subsets[s]
                if any(remaining[i] == 0 for i in combo):
                    continue
                for i in combo:
                    remaining[i] -= 1
                column[row] = mask
                choice_idx[row] = s
                yield from rec(pos + 1)
                for i in combo:
                    remaining[i] += 1
            column[row] = 0

        yield from rec(0)

    def decks_for(self, totals: Sequence[int]) -> Deck | None:
        style, L = self.style, self.length
        search = _SwapSearch(style, [], totals)

        order = self.contest_order()

        def rec(pos: int, rows: list[int], groups: list[list[int]], movable: set[int]) -> list[int] | None:
            if pos == len(order):
                return rows
            contest = style.contests[order[pos]]
            now_movable = movable | {i - 1 for i in contest.candidates}
            for column in self._columns(contest, totals, groups):
                self.stats.columns += 1
                new_rows = [rows[r] | column[r] for r in range(L)]
                search.masks = [m for m in new_rows if m]
                if search.run(now_movable) is not None:
                    self.stats.prefix_prunes += 1
                    continue
                new_groups = []
                for group in groups:
                    for _, members in itertools.groupby(group, key=lambda r: column[r]):
                        new_groups.append(list(members))
                found = rec(pos + 1, new_rows, new_groups, now_movable)
                if found is not None:
                    return found
            return None

        rows = rec(0, [0] * L, [list(range(L))], set())
        if rows is None:
            return None
        return Deck.of([[i for i in range(1, style.n_candidates + 1) if m >> (i - 1) & 1] for m in rows])

    def run(self) -> Deck | None:
        for totals in self.tally_vectors():
            self.stats.tally_vectors += 1
            deck = self.decks_for(totals)
            if deck is not None:
                return deck
        return None


def find_secure_deck(
    style: BallotStyle, length: int, rules: RuleSet = RuleSet.michigan()
) -> tuple[Deck | None, SearchStats]:
    """A secure rule-abiding deck of exactly ``length`` ballots, if one exists.

    Shorter secure decks extend to this length with blank ballots, so ``None``
    also rules out every shorter deck.
    """
    search = SecureDeckSearch(style, length, rules)
    return search.run(), search.stats
