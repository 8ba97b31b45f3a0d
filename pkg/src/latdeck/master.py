"""Restricted deck-design problem: find a B-ballot deck exposing every swap in a cut set.

The model has binary ``beta[b, i]`` (ballot ``b`` marks ``i``), one-hot vote
counts ``gamma[i, g]``, tie indicators ``y[i, j]``, "contest not overvoted"
indicators ``p[s, b, c]`` for each cut ``s``, and lexicographic chain
variables ``lam[c, c2, k]`` between interchangeable contests.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

from . import milp
from .ballot_model import BallotStyle, Deck, detects, is_feasible, mark_counts
from .errors import CapacityError, InternalConsistencyError, InvalidSwapError, PreconditionError, SolverFailure
from .swaps import Swap

MAX_DECK_LENGTH = 500


@dataclass(frozen=True)
class RuleSet:
    """Legal requirements a deck must meet on top of exposing every swap."""

    at_least_one_vote: bool = False
    distinct_within_contest: bool = False
    append_full_overvote_ballot: bool = False
    append_exact_overvote_ballot: bool = False
    assume_overvote_alerts: bool = False

    def __post_init__(self) -> None:
        if self.append_exact_overvote_ballot and not self.assume_overvote_alerts:
            raise PreconditionError(
                "the exact-overvote ballot is only sound when machines raise per-ballot "
                "overvote alerts; set assume_overvote_alerts=True to acknowledge this"
            )

    @classmethod
    def none(cls) -> "RuleSet":
        return cls()

    @classmethod
    def one_vote(cls) -> "RuleSet":
        return cls(at_least_one_vote=True)

    @classmethod
    def michigan(cls) -> "RuleSet":
        return cls(at_least_one_vote=True, distinct_within_contest=True)

    @classmethod
    def named(cls, name: str) -> "RuleSet":
        table = {
            "none": cls.none,
            "one-vote": cls.one_vote,
            "distinct": lambda: cls(distinct_within_contest=True),
            "michigan": cls.michigan,
        }
        if name not in table:
            raise PreconditionError(f"unknown rule set {name!r}; choose from {sorted(table)}")
        return table[name]()


@dataclass(frozen=True)
class Improvements:
    """Toggles for the five solver accelerations, all on by default.

    1: reduced tie and overvote variables; 2: increasing totals inside a
    contest; 3: lexicographic order between interchangeable contests;
    4: minimal cuts; 5: merging noncompetitive contests.
    """

    reduced_variables: bool = True
    within_contest_order: bool = True
    across_contest_order: bool = True
    minimal_cuts: bool = True
    merge_noncompetitive: bool = True

    _FIELDS = (
        "reduced_variables",
        "within_contest_order",
        "across_contest_order",
        "minimal_cuts",
        "merge_noncompetitive",
    )

    def without(self, *numbers: int) -> "Improvements":
        changes = {}
        for k in numbers:
            if not 1 <= k <= 5:
                raise ValueError(f"improvements are numbered 1..5, got {k}")
            changes[self._FIELDS[k - 1]] = False
        return replace(self, **changes)

    def enabled(self) -> tuple[int, ...]:
        return tuple(k + 1 for k, name in enumerate(self._FIELDS) if getattr(self, name))


def rule_violations(style: BallotStyle, deck: Deck, rules: RuleSet) -> list[str]:
    """Human-readable reasons ``deck`` breaks ``rules`` (empty when compliant)."""
    problems = []
    counts = mark_counts(style, deck)
    if rules.at_least_one_vote:
        zero = [i for i, t in enumerate(counts, start=1) if t == 0]
        if zero:
            problems.append(f"candidates without a vote: {zero}")
    if rules.distinct_within_contest:
        for contest in style.contests:
            totals = [counts[i - 1] for i in contest.candidates]
            if len(set(totals)) != len(totals):
                problems.append(f"contest {contest.contest_id!r} repeats a vote total")
    return problems


def precompute_overvotable_contests(style: BallotStyle, sigma: Swap) -> frozenset[int]:
    """Contests (zero-based) that some feasible ballot can read as overvoted under ``sigma``.

    Contest ``c`` qualifies when the targets of its candidates, capped by the
    vote limit of the contest each target belongs to, can reach ``v_c + 1``.
    """
    if sigma.is_identity:
        raise InvalidSwapError("overvotable contests are defined for non-identity swaps")
    m = style.n_contests
    hits = [[0] * m for _ in range(m)]
    for c, contest in enumerate(style.contests):
        for i in contest.candidates:
            hits[c][style.contest_of(sigma(i))] += 1
    caps = [contest.max_votes for contest in style.contests]
    return frozenset(
        c
        for c, contest in enumerate(style.contests)
        if sum(min(hits[c][d], caps[d]) for d in range(m)) >= contest.max_votes + 1
    )


def sequential_equivalent_pairs(style: BallotStyle) -> list[tuple[int, int]]:
    """Adjacent pairs ``(c, c2)`` of same-shape contests, in contest order."""
    last_seen: dict[tuple[int, int], int] = {}
    pairs = []
    for c, contest in enumerate(style.contests):
        if contest.shape in last_seen:
            pairs.append((last_seen[contest.shape], c))
        last_seen[contest.shape] = c
    return pairs


def dedupe_cuts(cuts: Iterable[Swap]) -> list[Swap]:
    out, seen = [], set()
    for sigma in cuts:
        if sigma.mapping not in seen:
            seen.add(sigma.mapping)
            out.append(sigma)
    return out


@dataclass
class MasterModel:
    style: BallotStyle
    B: int
    cuts: list[Swap]
    rules: RuleSet
    improvements: Improvements
    model: milp.Model
    beta: dict[tuple[int, int], int] = field(default_factory=dict)
    gamma: dict[tuple[int, int], int] = field(default_factory=dict)
    y: dict[tuple[int, int], int] = field(default_factory=dict)
    p: dict[tuple[int, int, int], int] = field(default_factory=dict)
    lam: dict[tuple[int, int, int], int] = field(default_factory=dict)

    @property
    def census(self) -> dict[str, int]:
        return {
            "beta": len(self.beta),
            "gamma": len(self.gamma),
            "y": len(self.y),
            "p": len(self.p),
            "lambda": len(self.lam),
        }


def build_master(
    style: BallotStyle,
    cuts: Sequence[Swap],
    B: int,
    rules: RuleSet = RuleSet(),
    improvements: Improvements = Improvements(),
    max_length: int = MAX_DECK_LENGTH,
) -> MasterModel:
    if B < 1:
        raise PreconditionError("the deck length B must be at least 1")
    if B > max_length:
        raise CapacityError(f"deck length {B} exceeds the configured maximum {max_length}")
    cuts = dedupe_cuts(cuts)
    for sigma in cuts:
        if sigma.is_identity or sigma.n != style.n_candidates:
            raise InvalidSwapError("cuts must be non-identity swaps on the style's candidates")
    n = style.n_candidates
    candidates = range(1, n + 1)
    ballots = range(1, B + 1)
    values = range(0, B + 1)
    model = milp.Model(name=f"master_B{B}")
    mm = MasterModel(style, B, cuts, rules, improvements, model)

    for b in ballots:
        for i in candidates:
            mm.beta[b, i] = model.binary(f"beta_{b}_{i}")
    for i in candidates:
        for g in values:
            mm.gamma[i, g] = model.binary(f"gamma_{i}_{g}")
        if rules.at_least_one_vote:
            model.fix(mm.gamma[i, 0], 0)

    # ballots may not overvote
    for b in ballots:
        for c, contest in enumerate(style.contests):
            if contest.size > contest.max_votes:
                model.add_constraint(
                    {mm.beta[b, i]: 1 for i in contest.candidates}, "<=", contest.max_votes,
                    f"feas_{b}_{c}",
                )
    # gamma is a one-hot encoding of each candidate's vote total
    for i in candidates:
        model.add_constraint({mm.gamma[i, g]: 1 for g in values}, "==", 1, f"onehot_{i}")
        coeffs = {mm.beta[b, i]: 1 for b in ballots}
        for g in values:
            if g:
                coeffs[mm.gamma[i, g]] = -g
        model.add_constraint(coeffs, "==", 0, f"count_{i}")

    reduced = improvements.reduced_variables
    if reduced:
        pairs = sorted({(i, sigma(i)) for sigma in cuts for i in sigma.moved()})
    else:
        pairs = [(i, j) for i in candidates for j in candidates] if cuts else []
    for i, j in pairs:
        mm.y[i, j] = model.continuous(f"y_{i}_{j}")
        for g in values:
            if rules.at_least_one_vote and g == 0:
                continue
            if i == j:
                coeffs = {mm.y[i, j]: 1, mm.gamma[i, g]: -2}
            else:
                coeffs = {mm.y[i, j]: 1, mm.gamma[i, g]: -1, mm.gamma[j, g]: -1}
            model.add_constraint(coeffs, ">=", -1, f"tie_{i}_{j}_{g}")

    for s, sigma in enumerate(cuts):
        if reduced:
            contests = sorted(precompute_overvotable_contests(style, sigma))
            moved = sigma.moved()
        else:
            contests = list(range(style.n_contests))
            moved = tuple(candidates)
        disjunction: dict[int, float] = {}
        constant = 0.0
        for i in moved:
            disjunction[mm.y[i, sigma(i)]] = disjunction.get(mm.y[i, sigma(i)], 0.0) - 1
            constant += 1
        for b in ballots:
            for c in contests:
                contest = style.contests[c]
                var = model.binary(f"p_{s}_{b}_{c}")
                mm.p[s, b, c] = var
                # (v + 1) p + sum of marks read for contest c >= v + 1
                coeffs = {var: contest.max_votes + 1}
                for i in contest.candidates:
                    key = mm.beta[b, sigma(i)]
                    coeffs[key] = coeffs.get(key, 0) + 1
                model.add_constraint(coeffs, ">=", contest.max_votes + 1, f"ov_{s}_{b}_{c}")
                disjunction[var] = -1
                constant += 1
        model.add_constraint(disjunction, ">=", 1 - constant, f"detect_{s}")

    if improvements.within_contest_order or rules.distinct_within_contest:
        for c, contest in enumerate(style.contests):
            for lo, hi in zip(contest.candidates, contest.candidates[1:]):
                coeffs = {mm.beta[b, hi]: 1 for b in ballots}
                coeffs.update({mm.beta[b, lo]: -1 for b in ballots})
                model.add_constraint(coeffs, ">=", 1, f"order_{c}_{lo}")

    if improvements.across_contest_order:
        for c, c2 in sequential_equivalent_pairs(style):
            first, second = style.contests[c], style.contests[c2]
            size = first.size
            for k in range(1, size + 1):
                mm.lam[c, c2, k] = model.binary(f"lam_{c}_{c2}_{k}")
            for k in range(1, size + 1):
                coeffs = {mm.lam[c, c2, k]: 1}
                for b in ballots:
                    coeffs[mm.beta[b, second.candidates[k - 1]]] = -1
                    coeffs[mm.beta[b, first.candidates[k - 1]]] = 1
                if k < size:
                    coeffs[mm.lam[c, c2, k + 1]] = -B
                model.add_constraint(coeffs, "<=", 0, f"lex_{c}_{c2}_{k}")
            model.fix(mm.lam[c, c2, 1], 1)
    return mm


def extract_deck(master: MasterModel, outcome: milp.SolveOutcome) -> Deck:
    ballots = []
    for b in range(1, master.B + 1):
        ballots.append(
            [i for i in range(1, master.style.n_candidates + 1) if outcome.value(master.beta[b, i]) > 0.5]
        )
    return Deck.of(ballots)


def solve_feasibility(
    master: MasterModel, time_limit: float | None = None, backend: str | None = None
) -> Deck | None:
    """Solve the restricted problem; ``None`` certifies that no such deck exists.

    A returned deck is re-verified exactly: every ballot is feasible, every
    cut is exposed, the vote-count encoding is consistent and the active
    rules hold.
    """
    master.model.time_limit = time_limit
    outcome = milp.solve(master.model, backend)
    if outcome.status is milp.Status.INFEASIBLE:
        return None
    if outcome.status is not milp.Status.OPTIMAL:
        raise SolverFailure(outcome.status.value, outcome.message)
    deck = extract_deck(master, outcome)
    style = master.style
    for ballot in deck:
        if not is_feasible(style, ballot):
            raise InternalConsistencyError("master returned an overvoted ballot")
    counts = mark_counts(style, deck)
    for (i, g), idx in master.gamma.items():
        if outcome.value(idx) > 0.5 and counts[i - 1] != g:
            raise InternalConsistencyError(f"vote-count encoding broken for candidate {i}")
    for sigma in master.cuts:
        if not detects(style, deck, sigma):
            raise InternalConsistencyError(f"master deck misses cut {sigma.mapping}")
    problems = rule_violations(style, deck, master.rules)
    if problems:
        raise InternalConsistencyError("; ".join(problems))
    return deck
