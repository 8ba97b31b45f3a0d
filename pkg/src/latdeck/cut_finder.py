"""Deck checking: search for a swap that a given deck fails to expose.

Two routes share one report type. :func:`find_undetected_swap` solves an
assignment MILP over ``x[i, j] = 1 iff sigma(i) = j``; :func:`brute_force_check`
walks every non-identity bijection for small styles.
"""
from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass

from . import milp
from .ballot_model import BallotStyle, Deck, FastDetector, detects, mark_counts, require_feasible_deck
from .errors import CapacityError, InternalConsistencyError, SolverFailure
from .swaps import Swap, is_minimal

BRUTE_FORCE_CAP = 8


class Verdict(enum.Enum):
    SECURE = "SECURE"
    VULNERABLE = "VULNERABLE"


class Method(enum.Enum):
    MILP = "MILP"
    BRUTE_FORCE = "BRUTE_FORCE"


@dataclass(frozen=True)
class CheckReport:
    verdict: Verdict
    witness: Swap | None
    method: Method
    moved_count: int | None = None
    scanned: int | None = None
    note: str = ""
    seconds: float = 0.0

    @property
    def secure(self) -> bool:
        return self.verdict is Verdict.SECURE


@dataclass
class CutModel:
    model: milp.Model
    x: dict[tuple[int, int], int]


def build_cut_model(style: BallotStyle, deck: Deck, minimal: bool) -> CutModel:
    """Assignment model whose feasible points are exactly the swaps hidden by ``deck``."""
    n = style.n_candidates
    counts = mark_counts(style, deck)
    model = milp.Model(name="cut")
    x: dict[tuple[int, int], int] = {}
    # only pairs with equal mark counts may be linked; every other x[i, j] is 0
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            if counts[i - 1] == counts[j - 1]:
                x[i, j] = model.binary(f"x_{i}_{j}")
    for i in range(1, n + 1):
        model.add_constraint({x[i, j]: 1 for j in range(1, n + 1) if (i, j) in x}, "==", 1, f"row_{i}")
        model.add_constraint({x[j, i]: 1 for j in range(1, n + 1) if (j, i) in x}, "==", 1, f"col_{i}")
    model.add_constraint({x[i, i]: 1 for i in range(1, n + 1)}, "<=", n - 2, "not_identity")
    seen = set()
    for b, ballot in enumerate(deck):
        key = ballot
        for c, contest in enumerate(style.contests):
            if len(ballot) <= contest.max_votes or (key, c) in seen:
                continue
            seen.add((key, c))
            coeffs = {
                x[i, j]: 1 for i in contest.candidates for j in ballot if (i, j) in x
            }
            if len(coeffs) > contest.max_votes:
                model.add_constraint(coeffs, "<=", contest.max_votes, f"ov_{b}_{c}")
    if minimal:
        model.minimize({idx: 1 for (i, j), idx in x.items() if i != j})
    return CutModel(model, x)


def _verify_witness(style: BallotStyle, deck: Deck, sigma: Swap) -> None:
    if sigma.is_identity or detects(style, deck, sigma):
        raise InternalConsistencyError(f"solver witness {sigma.mapping} is not a hidden swap")


def find_undetected_swap(
    style: BallotStyle,
    deck: Deck,
    minimal: bool = True,
    time_limit: float | None = None,
    backend: str | None = None,
) -> CheckReport:
    """Return SECURE if ``deck`` exposes every swap, else a hidden witness.

    With ``minimal=True`` the witness moves as few candidates as possible,
    which makes its contest graph connected.
    """
    require_feasible_deck(style, deck)
    if style.n_candidates < 2:
        return CheckReport(Verdict.SECURE, None, Method.MILP, note="no non-identity swap exists")
    cut = build_cut_model(style, deck, minimal)
    cut.model.time_limit = time_limit
    outcome = milp.solve(cut.model, backend)
    if outcome.status is milp.Status.INFEASIBLE:
        return CheckReport(Verdict.SECURE, None, Method.MILP, seconds=outcome.seconds)
    if outcome.status is not milp.Status.OPTIMAL:
        raise SolverFailure(outcome.status.value, outcome.message)
    mapping = [0] * style.n_candidates
    for (i, j), idx in cut.x.items():
        if outcome.value(idx) > 0.5:
            mapping[i - 1] = j
    sigma = Swap(tuple(mapping))
    _verify_witness(style, deck, sigma)
    moved = len(sigma.moved())
    if minimal and not is_minimal(style, sigma):
        raise InternalConsistencyError("minimal-mode witness has a disconnected contest graph")
    return CheckReport(
        Verdict.VULNERABLE,
        sigma,
        Method.MILP,
        moved_count=moved if minimal else None,
        seconds=outcome.seconds,
    )


def brute_force_check(style: BallotStyle, deck: Deck, cap: int = BRUTE_FORCE_CAP) -> CheckReport:
    """Test every one of the ``N! - 1`` non-identity bijections against ``deck``.

    The reported witness is the first hidden swap in lexicographic order of
    its mapping. ``scanned`` is the number of bijections examined.
    """
    n = style.n_candidates
    if n > cap:
        raise CapacityError(f"brute force is capped at {cap} candidates, style has {n}")
    detector = FastDetector(style, deck)
    identity = tuple(range(n))
    witness = None
    scanned = 0
    for perm in itertools.permutations(range(n)):
        if perm == identity:
            continue
        scanned += 1
        if witness is None and detector.undetected(perm):
            witness = Swap(tuple(t + 1 for t in perm))
    if witness is None:
        note = "no non-identity swap exists" if n < 2 else ""
        return CheckReport(Verdict.SECURE, None, Method.BRUTE_FORCE, scanned=scanned, note=note)
    return CheckReport(
        Verdict.VULNERABLE,
        witness,
        Method.BRUTE_FORCE,
        moved_count=len(witness.moved()),
        scanned=scanned,
    )
