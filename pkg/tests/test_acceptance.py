"""Acceptance suite: one PASS/FAIL line per criterion.

Run ``python tests/test_acceptance.py`` for the bare report, or collect it
with pytest, which prints the same lines in its terminal summary.
"""
from __future__ import annotations

import itertools
import math
import random
import sys
import time
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))

from conftest import random_deck, random_style  # noqa: E402
from latdeck.ballot_model import (  # noqa: E402
    BallotStyle,
    Contest,
    Deck,
    detects,
    mark_counts,
    overvote_alert,
    tabulate_correct,
    tabulate_swapped,
)
from latdeck.bounds import distinct_votes_deck, triangular_deck  # noqa: E402
from latdeck.cut_finder import brute_force_check, find_undetected_swap  # noqa: E402
from latdeck.master import Improvements, RuleSet, rule_violations  # noqa: E402
from latdeck.oracle import find_secure_deck, search_undetected_swap  # noqa: E402
from latdeck.pipeline import batch_solve, generate_experiment, synthetic_styles  # noqa: E402
from latdeck.redteam import hide_any_swap, hide_cross_contest_swap, rule_report  # noqa: E402
from latdeck.solver import full_overvote_ballot, exact_overvote_ballot, solve_style  # noqa: E402
from latdeck.swaps import Swap  # noqa: E402

RESULTS: list[str] = []
BRUTE_FORCE_LIMIT = 7
ABLATION_TIME_LIMIT = 3600.0

FIG2 = BallotStyle(
    "fig2",
    (Contest("president", (1, 2, 3), 1), Contest("senate", (4, 5), 1)),
    5,
    ("Adams", "Jefferson", "Burr", "Pinckney", "Clay"),
)
FIG2_DECK = Deck.of([[1, 4], [2, 5], [2, 5], [3], [3], [3]])
INSTANCES = [(f, C) for f in (1, 2, 3) for C in range(2, 6)]


def record(number: int, ok: bool, detail: str) -> None:
    line = f"CRITERION {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    RESULTS.append(line)
    print(line, flush=True)


def secure_by_enumeration(style: BallotStyle, deck: Deck) -> bool:
    """Literal enumeration for small styles, backtracking search otherwise."""
    if style.n_candidates <= BRUTE_FORCE_LIMIT:
        return brute_force_check(style, deck).secure
    return search_undetected_swap(style, deck) is None


def criterion_1() -> tuple[bool, str]:
    style = generate_experiment(3, 2)
    t0 = time.perf_counter()
    merged = solve_style(style, RuleSet.michigan())
    unmerged = solve_style(style, RuleSet.michigan(), Improvements().without(5))
    seconds = time.perf_counter() - t0
    decks = sorted(merged.deck.as_lists())
    ok = (
        merged.certified
        and merged.deck_length == 2
        and decks in ([[2, 3], [3]], [[3], [2, 3]])
        and unmerged.deck_length == 2
        and unmerged.iterations >= 2
        and seconds < 5
    )
    return ok, (
        f"B*={merged.deck_length} deck={decks} iterations={merged.iterations}; "
        f"unmerged B*={unmerged.deck_length} iterations={unmerged.iterations}; {seconds:.2f}s"
    )


def criterion_2() -> tuple[bool, str]:
    from latdeck.solver import optimal_length_formula_check

    style = BallotStyle.from_shapes([(2, 1), (2, 1)])
    t0 = time.perf_counter()
    result = solve_style(style, RuleSet.michigan())
    seconds = time.perf_counter() - t0
    check = optimal_length_formula_check(style)
    ok = result.certified and result.deck_length == 4 and (check.H, check.NC) == (3, 0) and seconds < 10
    return ok, f"B*={result.deck_length} H={check.H} NC={check.NC}; {seconds:.2f}s"


def criterion_3() -> tuple[bool, str]:
    t0 = time.perf_counter()
    report = find_undetected_swap(FIG2, FIG2_DECK)
    swapped = tabulate_swapped(FIG2, FIG2_DECK, Swap.transposition(5, 2, 5))
    seconds = time.perf_counter() - t0
    witness_ok = (
        not report.secure
        and not detects(FIG2, FIG2_DECK, report.witness)
        and tabulate_swapped(FIG2, FIG2_DECK, report.witness) == tabulate_correct(FIG2, FIG2_DECK)
    )
    ok = witness_ok and swapped == (1, 2, 3, 1, 2) and seconds < 2
    return ok, f"verdict={report.verdict.value} witness={report.witness.mapping} swapped={swapped}; {seconds:.2f}s"


def criterion_4() -> tuple[bool, str]:
    rng = random.Random(20240604)
    agree = witnesses = vulnerable = 0
    for _ in range(200):
        style = random_style(rng, max_n=7)
        deck = random_deck(rng, style, max_len=6)
        milp_report = find_undetected_swap(style, deck)
        brute = brute_force_check(style, deck)
        agree += milp_report.verdict is brute.verdict
        if not milp_report.secure:
            vulnerable += 1
            witnesses += tabulate_swapped(style, deck, milp_report.witness) != tabulate_correct(style, deck)
    ok = agree == 200 and witnesses == 0
    return ok, (
        f"{agree}/200 verdicts agree ({vulnerable} vulnerable); {witnesses} witnesses with unequal tallies"
    )


def criterion_5() -> tuple[bool, str]:
    t0 = time.perf_counter()
    failures, rows = [], []
    for family, C in INSTANCES:
        style = generate_experiment(family, C)
        result = solve_style(style, RuleSet.michigan())
        shorter, _ = find_secure_deck(style, result.deck_length - 1, RuleSet.michigan())
        secure = secure_by_enumeration(style, result.deck)
        compliant = not rule_violations(style, result.deck, RuleSet.michigan())
        rows.append(f"{family}/{C}:{result.deck_length}")
        if not (result.certified and shorter is None and secure and compliant):
            failures.append(style.style_id)
    seconds = time.perf_counter() - t0
    ok = not failures and seconds < 600
    return ok, f"B* {' '.join(rows)}; failures={failures}; {seconds:.1f}s"


def criterion_6() -> tuple[bool, str]:
    mismatches, notes = [], []
    for family, C in INSTANCES:
        style = generate_experiment(family, C)
        base = solve_style(style, RuleSet.one_vote())
        for off in range(1, 6):
            ablated = solve_style(
                style, RuleSet.one_vote(), Improvements().without(off), time_limit=ABLATION_TIME_LIMIT
            )
            if not ablated.certified or ablated.deck_length != base.deck_length:
                mismatches.append(f"{style.style_id}/no{off}")
            ratio = ablated.iterations / max(base.iterations, 1)
            if ratio >= 5:
                notes.append(f"{style.style_id}/no{off} x{ratio:.0f} iterations")
    return not mismatches, f"mismatches={mismatches}; largest iteration gaps: {notes}"


def criterion_7() -> tuple[bool, str]:
    dv, tri = distinct_votes_deck(FIG2), triangular_deck(FIG2)
    partition = min(
        max(FIG2.n_candidates, *(math.ceil(sum(p[i - 1] for i in c.candidates) / c.max_votes) for c in FIG2.contests))
        for p in itertools.permutations(range(1, 6))
    )
    ok = len(dv) == 8 == partition and len(tri) == 15
    ok = ok and brute_force_check(FIG2, dv).secure and brute_force_check(FIG2, tri).secure
    below = []
    for family, C in INSTANCES:
        style = generate_experiment(family, C)
        best = solve_style(style, RuleSet.michigan()).deck_length
        if not len(triangular_deck(style)) >= len(distinct_votes_deck(style)) >= best:
            below.append(style.style_id)
    ok = ok and not below
    return ok, f"distinct={len(dv)} (partition oracle {partition}) triangular={len(tri)}; bound violations={below}"


def criterion_8() -> tuple[bool, str]:
    sigma = Swap.transposition(5, 2, 5)
    singles = hide_any_swap(FIG2, sigma)
    correct = tabulate_correct(FIG2, singles)
    hidden = sum(
        tabulate_swapped(FIG2, singles, Swap(p)) == correct
        for p in itertools.permutations(range(1, 6))
        if p != (1, 2, 3, 4, 5)
    )
    cycles = hide_cross_contest_swap(FIG2, sigma)
    ok = (
        hidden == 119
        and min(mark_counts(FIG2, singles)) >= 1
        and tabulate_swapped(FIG2, cycles, sigma) == tabulate_correct(FIG2, cycles)
        and rule_report(FIG2, cycles)["distinct"]
        and not find_undetected_swap(FIG2, singles).secure
        and not find_undetected_swap(FIG2, cycles).secure
    )
    return ok, f"singletons hide {hidden}/119; cycle deck length {len(cycles)} rules {rule_report(FIG2, cycles)}"


def _exposed(style: BallotStyle, deck: Deck, extra: frozenset, sigma: Swap) -> bool:
    augmented = deck + Deck((extra,))
    return tabulate_swapped(style, augmented, sigma) != tabulate_correct(style, augmented) or overvote_alert(
        style, deck, sigma
    )


def criterion_9() -> tuple[bool, str]:
    rng = random.Random(99)
    styles = [FIG2, generate_experiment(3, 2)]
    styles += [generate_experiment(f, C) for f in (1, 2, 3) for C in (2, 3)]
    styles += [random_style(rng, max_n=7) for _ in range(12)]
    checked, misses = 0, []
    for style in styles:
        result = solve_style(style, RuleSet.michigan())
        if not result.certified:
            misses.append(f"{style.style_id}: uncertified")
            continue
        n = style.n_candidates
        for extra in (full_overvote_ballot(style), exact_overvote_ballot(style)):
            for p in itertools.permutations(range(1, n + 1)):
                if p == tuple(range(1, n + 1)):
                    continue
                checked += 1
                if not _exposed(style, result.deck, extra, Swap(p)):
                    misses.append(f"{style.style_id}:{p}")
    return not misses, f"{len(styles)} styles, {checked} (deck, ballot, swap) checks, misses={misses[:5]}"


def criterion_10() -> tuple[bool, str]:
    styles = synthetic_styles(200, 8, seed=0)
    t0 = time.perf_counter()
    result = batch_solve(styles, RuleSet.michigan())
    seconds = time.perf_counter() - t0
    summary = result.summary
    shared = (summary["reuse"] + summary["translate"]) / summary["styles"]
    secure = sum(find_undetected_swap(s, o.deck).secure for s, o in zip(styles, result.outcomes) if o.ok)
    ok = result.all_solved and secure == 200 and seconds < 1800 and shared >= 0.30
    return ok, f"{summary}; secure={secure}/200; reused or translated {shared:.0%}; {seconds:.0f}s"


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
            criterion_6, criterion_7, criterion_8, criterion_9, criterion_10]


@pytest.mark.parametrize("number", range(1, 11))
def test_criterion(number):
    ok, detail = CRITERIA[number - 1]()
    record(number, ok, detail)
    assert ok, detail


if __name__ == "__main__":
    failed = 0
    for k, fn in enumerate(CRITERIA, start=1):
        ok, detail = fn()
        record(k, ok, detail)
        failed += not ok
    sys.exit(1 if failed else 0)
