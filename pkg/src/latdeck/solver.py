"""Cutting-plane driver for minimum-length decks that expose every swap.

The loop alternates a restricted master solve (find a deck of length B that
exposes the current cut set, raising B when none exists) with a deck check
that either certifies the deck or returns a new swap to cut.
"""
from __future__ import annotations

import enum
import logging
import math
import time
from dataclasses import dataclass, field

from .ballot_model import BallotStyle, Contest, Deck
from .cut_finder import find_undetected_swap
from .errors import LatDeckError, SolverFailure
from .master import Improvements, RuleSet, build_master, solve_feasibility
from .swaps import Swap

log = logging.getLogger(__name__)

MAX_ITERATIONS = 10_000


class Certificate(enum.Enum):
    CERTIFIED_OPTIMAL = "CERTIFIED_OPTIMAL"
    TIME_LIMIT_PARTIAL = "TIME_LIMIT_PARTIAL"


@dataclass(frozen=True)
class NormalizedStyle:
    """A rewritten style plus the candidate renumbering back to the original.

    ``to_original[k - 1]`` is the original index of rewritten candidate ``k``.
    Original candidates without a rewritten counterpart map to 0.
    """

    style: BallotStyle
    original: BallotStyle
    to_original: tuple[int, ...]

    @property
    def from_original(self) -> tuple[int, ...]:
        inv = [0] * self.original.n_candidates
        for k, i in enumerate(self.to_original, start=1):
            inv[i - 1] = k
        return tuple(inv)

    def deck_to_original(self, deck: Deck) -> Deck:
        return Deck.of([[self.to_original[k - 1] for k in ballot] for ballot in deck])

    def deck_from_original(self, deck: Deck) -> Deck:
        fwd = self.from_original
        return Deck.of([[fwd[i - 1] for i in ballot] for ballot in deck])

    def swap_to_original(self, sigma: Swap) -> Swap:
        fwd = self.from_original
        return Swap(tuple(self.to_original[sigma(fwd[i - 1]) - 1] for i in range(1, sigma.n + 1)))


MERGED_CONTEST_ID = "noncompetitive"


def merge_noncompetitive(style: BallotStyle) -> NormalizedStyle:
    """Fuse every noncompetitive contest into one leading contest.

    Candidate indices are kept, so the renumbering is the identity. The merged
    contest lets all its candidates be marked together, exactly like the
    originals it replaces.
    """
    merged = sorted(i for c in style.contests if c.noncompetitive for i in c.candidates)
    others = tuple(c for c in style.contests if not c.noncompetitive)
    contests = others
    if merged:
        contests = (Contest(MERGED_CONTEST_ID, tuple(merged), len(merged)),) + others
    new = BallotStyle(style.style_id, contests, style.n_candidates, style.labels)
    return NormalizedStyle(new, style, tuple(range(1, style.n_candidates + 1)))


@dataclass
class IterationRecord:
    B: int
    master_status: str
    master_seconds: float
    cut_found: tuple[int, ...] | None = None
    cut_seconds: float = 0.0


@dataclass
class SolveResult:
    style: BallotStyle
    deck: Deck
    deck_length: int
    cut_set: list[Swap]
    iterations: int
    certificate: Certificate
    trace: list[IterationRecord] = field(default_factory=list)
    wall_seconds: float = 0.0
    lower_bound: int = 0
    halted_early: bool = False
    appended: Deck = field(default_factory=Deck)

    @property
    def certified(self) -> bool:
        return self.certificate is Certificate.CERTIFIED_OPTIMAL

    def trace_json(self) -> list[dict]:
        return [
            {
                "B": r.B,
                "master_status": r.master_status,
                "master_seconds": round(r.master_seconds, 6),
                "cut": list(r.cut_found) if r.cut_found else None,
                "cut_seconds": round(r.cut_seconds, 6),
            }
            for r in self.trace
        ]


def full_overvote_ballot(style: BallotStyle) -> frozenset[int]:
    """A ballot marking every candidate in every contest."""
    return frozenset(range(1, style.n_candidates + 1))


def exact_overvote_ballot(style: BallotStyle) -> frozenset[int]:
    """A ballot with ``v_c + 1`` marks in each competitive contest and none elsewhere.

    The lowest-indexed candidates of each contest are chosen.
    """
    marks: set[int] = set()
    for contest in style.contests:
        if contest.size > contest.max_votes:
            marks.update(contest.candidates[: contest.max_votes + 1])
    return frozenset(marks)


def rule_mandated_ballots(style: BallotStyle, rules: RuleSet) -> Deck:
    ballots = []
    if rules.append_full_overvote_ballot:
        ballots.append(full_overvote_ballot(style))
    if rules.append_exact_overvote_ballot:
        ballots.append(exact_overvote_ballot(style))
    return Deck(tuple(ballots))


def solve_style(
    style: BallotStyle,
    rules: RuleSet = RuleSet.michigan(),
    improvements: Improvements = Improvements(),
    time_limit: float | None = None,
    stop_at_length: int | None = None,
    max_iterations: int = MAX_ITERATIONS,
    backend: str | None = None,
) -> SolveResult:
    """Compute a shortest deck exposing every swap, with an optimality certificate.

    When ``stop_at_length`` is given and the lower bound reaches it, the loop
    halts with ``halted_early`` set and an empty deck: the caller already owns
    a deck of that length, which is then optimal.
    """
    start = time.perf_counter()
    deadline = None if time_limit is None else start + time_limit
    norm = (
        merge_noncompetitive(style)
        if improvements.merge_noncompetitive
        else NormalizedStyle(style, style, tuple(range(1, style.n_candidates + 1)))
    )
    work = norm.style
    cuts: list[Swap] = []
    trace: list[IterationRecord] = []
    B = 1
    iterations = 0

    def remaining() -> float | None:
        if deadline is None:
            return None
        return max(deadline - time.perf_counter(), 1e-3)

    def partial(lower: int) -> SolveResult:
        return SolveResult(
            style, Deck(), 0, [norm.swap_to_original(s) for s in cuts], iterations,
            Certificate.TIME_LIMIT_PARTIAL, trace, time.perf_counter() - start, lower,
        )

    while True:
        if stop_at_length is not None and B >= stop_at_length:
            result = partial(B)
            result.halted_early = True
            result.deck_length = stop_at_length
            result.certificate = Certificate.CERTIFIED_OPTIMAL
            return result
        if deadline is not None and time.perf_counter() >= deadline:
            return partial(B)
        master = build_master(work, cuts, B, rules, improvements)
        t0 = time.perf_counter()
        try:
            deck = solve_feasibility(master, remaining(), backend)
        except SolverFailure:
            if deadline is not None and time.perf_counter() >= deadline - 1e-3:
                return partial(B)
            raise
        master_seconds = time.perf_counter() - t0
        if deck is None:
            trace.append(IterationRecord(B, "INFEASIBLE", master_seconds))
            log.debug("master infeasible at B=%d", B)
            B += 1
            continue
        record = IterationRecord(B, "FEASIBLE", master_seconds)
        trace.append(record)
        t0 = time.perf_counter()
        try:
            report = find_undetected_swap(
                work, deck, minimal=improvements.minimal_cuts, time_limit=remaining(), backend=backend
            )
        except SolverFailure:
            if deadline is not None and time.perf_counter() >= deadline - 1e-3:
                return partial(B)
            raise
        record.cut_seconds = time.perf_counter() - t0
        iterations += 1
        if report.secure:
            original_deck = norm.deck_to_original(deck)
            return SolveResult(
                style,
                original_deck,
                len(original_deck),
                [norm.swap_to_original(s) for s in cuts],
                iterations,
                Certificate.CERTIFIED_OPTIMAL,
                trace,
                time.perf_counter() - start,
                B,
                appended=rule_mandated_ballots(style, rules),
            )
        sigma = report.witness
        if any(sigma.mapping == s.mapping for s in cuts):
            raise LatDeckError("deck check returned a swap already in the cut set")
        record.cut_found = sigma.mapping
        cuts.append(sigma)
        log.debug("B=%d cut %s", B, sigma.mapping)
        if iterations >= max_iterations:
            raise LatDeckError(f"iteration cap {max_iterations} reached without a certificate")


@dataclass(frozen=True)
class FormulaCheck:
    H: int
    NC: int
    predicted: int


def optimal_length_formula_check(style: BallotStyle) -> FormulaCheck:
    """Closed-form guess ``max(H, NC)`` for the optimal length under Michigan rules.

    ``H`` is the largest per-contest requirement ``max(n, ceil(n (n + 1) / (2 v)))``
    and ``NC`` counts candidates in noncompetitive contests. The guess is not
    always right, so callers compare it with a real solve.
    """
    H = max(
        max(c.size, math.ceil(c.size * (c.size + 1) / (2 * c.max_votes))) for c in style.contests
    )
    NC = sum(c.size for c in style.contests if c.noncompetitive)
    return FormulaCheck(H, NC, max(H, NC))
