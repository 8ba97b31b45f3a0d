"""Many-style batches: normal forms, reuse, translation, and synthetic benchmark styles."""
from __future__ import annotations

import concurrent.futures
import csv
import io
import random
import time
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .ballot_model import BallotStyle, Contest, Deck, is_feasible
from .cut_finder import find_undetected_swap
from .errors import InvalidInputError, LatDeckError, PreconditionError
from .master import Improvements, RuleSet, rule_violations
from .solver import (
    Certificate,
    NormalizedStyle,
    SolveResult,
    merge_noncompetitive,
    optimal_length_formula_check,
    solve_style,
)

# ---------------------------------------------------------------------------
# normal forms
# ---------------------------------------------------------------------------


def normalize(style: BallotStyle) -> NormalizedStyle:
    """Merge noncompetitive contests, sort contests by shape, renumber candidates.

    Contests are ordered by decreasing size, then decreasing vote limit
    (stable otherwise). Candidates are renumbered consecutively in that
    order, so styles with equal shape lists get identical normal forms.
    """
    merged = merge_noncompetitive(style).style
    ordered = sorted(merged.contests, key=lambda c: (-c.size, -c.max_votes))
    contests, to_original = [], []
    nxt = 1
    for contest in ordered:
        contests.append(Contest(contest.contest_id, tuple(range(nxt, nxt + contest.size)), contest.max_votes))
        to_original.extend(contest.candidates)
        nxt += contest.size
    labels = tuple(style.labels[i - 1] for i in to_original)
    normal = BallotStyle(style.style_id, tuple(contests), style.n_candidates, labels)
    return NormalizedStyle(normal, style, tuple(to_original))


# after merging, the only noncompetitive contest left is the merged one
def _merged_size(norm: NormalizedStyle) -> int:
    return sum(c.size for c in norm.style.contests if c.noncompetitive)


def _competitive_shapes(norm: NormalizedStyle) -> tuple[tuple[int, int], ...]:
    return tuple(c.shape for c in norm.style.contests if not c.noncompetitive)


def dedup_key(norm: NormalizedStyle) -> tuple:
    """Shape list of the competitive contests plus the merged-contest size."""
    return (_competitive_shapes(norm), _merged_size(norm))


def translation_map(source: NormalizedStyle, target: NormalizedStyle) -> list[int] | None:
    """Match each target normal-form candidate to a source normal-form candidate.

    Applies when the target's competitive contests form a sub-multiset of the
    source's and the source has at least as many noncompetitive candidates.
    Returns ``None`` otherwise.
    """
    if _merged_size(target) > _merged_size(source):
        return None
    pools: dict[tuple[int, int], list[Contest]] = defaultdict(list)
    merged_source: Contest | None = None
    for contest in source.style.contests:
        if contest.noncompetitive:
            merged_source = contest
        else:
            pools[contest.shape].append(contest)
    mapping = [0] * target.style.n_candidates
    for contest in target.style.contests:
        if contest.noncompetitive:
            assert merged_source is not None
            partner = merged_source.candidates[: contest.size]
        else:
            if not pools[contest.shape]:
                return None
            partner = pools[contest.shape].pop(0).candidates
        for k, i in zip(contest.candidates, partner):
            mapping[k - 1] = i
    return mapping


def translate_between(
    source: NormalizedStyle, source_deck: Deck, target: NormalizedStyle
) -> Deck | None:
    """Carry a secure deck of ``source`` (original indices) over to ``target``'s original indices."""
    mapping = translation_map(source, target)
    if mapping is None:
        return None
    deck_nf = source.deck_from_original(source_deck)
    translated = Deck.of(
        [[k for k in range(1, target.style.n_candidates + 1) if mapping[k - 1] in ballot] for ballot in deck_nf]
    )
    return target.deck_to_original(translated)


def reduce_style(style: BallotStyle, removed_contests: Iterable[int]) -> NormalizedStyle:
    """Drop contests (zero-based positions) and renumber the remaining candidates."""
    removed = set(removed_contests)
    if not removed <= set(range(style.n_contests)):
        raise PreconditionError(f"unknown contest positions {sorted(removed - set(range(style.n_contests)))}")
    if len(removed) == style.n_contests:
        raise PreconditionError("at least one contest must remain")
    contests, to_original = [], []
    nxt = 1
    for pos, contest in enumerate(style.contests):
        if pos in removed:
            continue
        contests.append(Contest(contest.contest_id, tuple(range(nxt, nxt + contest.size)), contest.max_votes))
        to_original.extend(contest.candidates)
        nxt += contest.size
    labels = tuple(style.labels[i - 1] for i in to_original)
    reduced = BallotStyle(f"{style.style_id}-reduced", tuple(contests), nxt - 1, labels)
    return NormalizedStyle(reduced, style, tuple(to_original))


def translate_solution(source_style: BallotStyle, source_deck: Deck, removed_contests: Iterable[int]) -> Deck:
    """Strip the removed contests' candidates from every ballot.

    The result, expressed in the reduced style's numbering (see
    :func:`reduce_style`), is secure whenever ``source_deck`` is, though not
    necessarily shortest.
    """
    for ballot in source_deck:
        if not is_feasible(source_style, ballot):
            raise PreconditionError("source deck overvotes a contest")
    reduced = reduce_style(source_style, removed_contests)
    keep = set(reduced.to_original)
    return reduced.deck_from_original(Deck.of([[i for i in ballot if i in keep] for ballot in source_deck]))


# ---------------------------------------------------------------------------
# benchmark families
# ---------------------------------------------------------------------------


def experiment_shapes(family: int, C: int) -> list[tuple[int, int]]:
    if family == 1:
        return [(c, 1) for c in range(1, C + 1)]
    if family == 2:
        return [(2, 1)] * C
    if family == 3:
        return [(c, c) for c in range(1, C + 1)]
    raise InvalidInputError(f"family must be 1, 2 or 3, got {family}")


def generate_experiment(family: int, C: int) -> BallotStyle:
    """Benchmark styles: sizes ``1..C`` with one vote; ``C`` two-way races; ``v_c = |N_c| = c``."""
    if not 2 <= C <= 12:
        raise InvalidInputError(f"C must lie in 2..12, got {C}")
    return BallotStyle.from_shapes(experiment_shapes(family, C), f"exp{family}-C{C}")


def synthetic_styles(count: int = 200, max_c: int = 8, seed: int = 0) -> list[BallotStyle]:
    """Random styles built from the three benchmark families.

    Each style takes a random subset of one family's contests (at most
    ``max_c`` of them), may gain a few small noncompetitive contests, and is
    shuffled. Overlaps between styles are what batch reuse exploits.
    """
    rng = random.Random(seed)
    styles = []
    for k in range(count):
        family = rng.choice((1, 2, 3))
        C = rng.randint(2, max_c)
        shapes = experiment_shapes(family, C)
        keep = rng.randint(1, len(shapes))
        shapes = rng.sample(shapes, keep)
        if rng.random() < 0.4 and len(shapes) < max_c:
            extra = rng.randint(1, min(2, max_c - len(shapes)))
            shapes += [(s, s) for s in (rng.randint(1, 2) for _ in range(extra))]
        rng.shuffle(shapes)
        styles.append(BallotStyle.from_shapes(shapes, f"syn{k:03d}"))
    return styles


# ---------------------------------------------------------------------------
# batches
# ---------------------------------------------------------------------------


@dataclass
class PlanEntry:
    style: BallotStyle
    norm: NormalizedStyle
    key: tuple
    representative: int  # index of the entry whose solve this one reuses (itself if solved)

    @property
    def competitive_count(self) -> int:
        return len(self.key[0])

    @property
    def nc(self) -> int:
        return self.key[1]


@dataclass
class BatchPlan:
    entries: list[PlanEntry]
    order: list[int]
    waves: list[list[int]]
    reuse_edges: dict[int, list[int]]


def plan_batch(styles: Sequence[BallotStyle]) -> BatchPlan:
    """Deduplicate by normal form and order solves so larger styles come first.

    Representatives are sorted by competitive-contest count (descending),
    then noncompetitive candidate count (descending), then style id. A wave
    holds representatives with equal counts; none can translate into another.
    """
    entries: list[PlanEntry] = []
    first_with_key: dict[tuple, int] = {}
    for idx, style in enumerate(styles):
        norm = normalize(style)
        key = dedup_key(norm)
        rep = first_with_key.setdefault(key, idx)
        entries.append(PlanEntry(style, norm, key, rep))
    reps = [k for k, e in enumerate(entries) if e.representative == k]
    order = sorted(reps, key=lambda k: (-entries[k].competitive_count, -entries[k].nc, entries[k].style.style_id))
    waves: list[list[int]] = []
    for k in order:
        tag = (entries[k].competitive_count, entries[k].nc)
        if waves and (entries[waves[-1][0]].competitive_count, entries[waves[-1][0]].nc) == tag:
            waves[-1].append(k)
        else:
            waves.append([k])
    reuse_edges: dict[int, list[int]] = {}
    for pos, k in enumerate(order):
        reuse_edges[k] = [
            s for s in order[:pos]
            if s not in waves_of(waves, k) and translation_map(entries[s].norm, entries[k].norm) is not None
        ]
    return BatchPlan(entries, order, waves, reuse_edges)


def waves_of(waves: list[list[int]], k: int) -> list[int]:
    for wave in waves:
        if k in wave:
            return wave
    return []


@dataclass
class StyleOutcome:
    style_id: str
    mode: str  # "full", "reuse" or "translate"
    deck: Deck
    deck_length: int
    certificate: str
    iterations: int
    wall_ms: float
    H: int
    NC: int
    predicted: int
    source: str = ""
    error: str = ""

    @property
    def ok(self) -> bool:
        return not self.error and self.certificate == Certificate.CERTIFIED_OPTIMAL.value


@dataclass
class BatchResult:
    outcomes: list[StyleOutcome]
    plan: BatchPlan
    wall_seconds: float = 0.0

    @property
    def summary(self) -> dict:
        modes = Counter(o.mode for o in self.outcomes)
        return {
            "styles": len(self.outcomes),
            "distinct_normal_forms": len(self.plan.order),
            "full": modes.get("full", 0),
            "reuse": modes.get("reuse", 0),
            "translate": modes.get("translate", 0),
            "failed": sum(1 for o in self.outcomes if not o.ok),
            "wall_seconds": round(self.wall_seconds, 3),
        }

    @property
    def all_solved(self) -> bool:
        return all(o.ok for o in self.outcomes)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["style_id", "B*", "H", "NC", "predicted", "iterations", "wall_ms", "mode"])
        for o in self.outcomes:
            writer.writerow([o.style_id, o.deck_length, o.H, o.NC, o.predicted, o.iterations, round(o.wall_ms, 1), o.mode])
        return buf.getvalue()


def _solve_worker(
    style: BallotStyle, rules: RuleSet, improvements: Improvements, time_limit: float | None, stop_at: int | None
) -> SolveResult:
    return solve_style(style, rules, improvements, time_limit=time_limit, stop_at_length=stop_at)


def _verify(style: BallotStyle, deck: Deck, rules: RuleSet) -> str:
    problems = rule_violations(style, deck, rules)
    if problems:
        return "; ".join(problems)
    if not find_undetected_swap(style, deck).secure:
        return "deck failed the security check"
    return ""


def batch_solve(
    styles: Sequence[BallotStyle],
    rules: RuleSet = RuleSet.michigan(),
    jobs: int = 1,
    improvements: Improvements = Improvements(),
    time_limit: float | None = None,
) -> BatchResult:
    """Solve every style, reusing and translating earlier answers where possible.

    Every returned deck is re-checked for security and rule compliance on
    its original style; failures are recorded and the batch continues.
    """
    start = time.perf_counter()
    plan = plan_batch(styles)
    entries = plan.entries
    outcomes: dict[int, StyleOutcome] = {}
    solved: dict[int, Deck] = {}

    def stats(style: BallotStyle):
        return optimal_length_formula_check(style)

    for wave in plan.waves:
        known: dict[int, tuple[int, Deck, int]] = {}
        for k in wave:
            best = None
            for s in plan.reuse_edges[k]:
                if s not in solved:
                    continue
                deck = translate_between(entries[s].norm, solved[s], entries[k].norm)
                if deck is not None and (best is None or len(deck) < best[0]):
                    best = (len(deck), deck, s)
            if best is not None:
                known[k] = best
        jobs_args = {
            k: (entries[k].style, rules, improvements, time_limit, known[k][0] if k in known else None)
            for k in wave
        }
        results: dict[int, SolveResult | Exception] = {}
        if jobs > 1 and len(wave) > 1:
            with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as pool:
                futures = {k: pool.submit(_solve_worker, *args) for k, args in jobs_args.items()}
                for k, fut in futures.items():
                    try:
                        results[k] = fut.result()
                    except Exception as exc:  # recorded per style, batch continues
                        results[k] = exc
        else:
            for k, args in jobs_args.items():
                try:
                    results[k] = _solve_worker(*args)
                except LatDeckError as exc:
                    results[k] = exc
        for k in wave:
            style = entries[k].style
            check = stats(style)
            res = results[k]
            if isinstance(res, Exception):
                outcomes[k] = StyleOutcome(style.style_id, "full", Deck(), 0, "ERROR", 0, 0.0,
                                           check.H, check.NC, check.predicted, error=str(res))
                continue
            mode, source, deck = "full", "", res.deck
            if res.halted_early:
                mode, deck = "translate", known[k][1]
                source = entries[known[k][2]].style.style_id
            error = _verify(style, deck, rules) if res.certified else "time limit reached"
            outcomes[k] = StyleOutcome(
                style.style_id, mode, deck, len(deck) if res.certified else 0, res.certificate.value,
                res.iterations, res.wall_seconds * 1000, check.H, check.NC, check.predicted, source, error,
            )
            if outcomes[k].ok:
                solved[k] = deck

    for k, entry in enumerate(entries):
        if k in outcomes:
            continue
        rep = entry.representative
        t0 = time.perf_counter()
        check = stats(entry.style)
        rep_out = outcomes[rep]
        if not rep_out.ok:
            outcomes[k] = StyleOutcome(entry.style.style_id, "reuse", Deck(), 0, rep_out.certificate, 0, 0.0,
                                       check.H, check.NC, check.predicted, rep_out.style_id, "representative failed")
            continue
        deck_nf = entries[rep].norm.deck_from_original(solved[rep])
        deck = entry.norm.deck_to_original(deck_nf)
        error = _verify(entry.style, deck, rules)
        outcomes[k] = StyleOutcome(
            entry.style.style_id, "reuse", deck, len(deck), rep_out.certificate, 0,
            (time.perf_counter() - t0) * 1000, check.H, check.NC, check.predicted, rep_out.style_id, error,
        )
    ordered = [outcomes[k] for k in range(len(entries))]
    return BatchResult(ordered, plan, time.perf_counter() - start)


# ---------------------------------------------------------------------------
# benchmark table
# ---------------------------------------------------------------------------


def run_experiment_table(
    family: int,
    max_c: int,
    ablate: int | None = None,
    rules: RuleSet = RuleSet.one_vote(),
    time_limit: float | None = None,
    min_c: int = 2,
) -> list[dict]:
    """Solve one benchmark family for ``C = min_c..max_c``, optionally with one improvement off."""
    improvements = Improvements() if ablate is None else Improvements().without(ablate)
    rows = []
    for C in range(min_c, max_c + 1):
        style = generate_experiment(family, C)
        res = solve_style(style, rules, improvements, time_limit=time_limit)
        rows.append(
            {
                "family": family,
                "C": C,
                "N": style.n_candidates,
                "ablated": ablate or "",
                "B*": res.deck_length if res.certified else "",
                "lower_bound": res.lower_bound,
                "iterations": res.iterations,
                "seconds": round(res.wall_seconds, 4),
                "certificate": res.certificate.value,
            }
        )
    return rows


def rows_to_csv(rows: list[dict]) -> str:
    if not rows:
        return ""
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()
