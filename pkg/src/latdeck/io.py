"""JSON and CSV formats for styles, decks and swaps."""
from __future__ import annotations

import csv
import io
import json
from pathlib import Path
from typing import Any

from .ballot_model import BallotStyle, Contest, Deck, tabulate_correct
from .errors import InvalidInputError
from .swaps import Swap


def style_from_json(data: dict[str, Any]) -> BallotStyle:
    """Parse ``{"style_id", "contests": [{"contest_id", "candidates", "max_votes"}]}``.

    Candidates receive global indices ``1..N`` in listing order.
    """
    try:
        contests, labels = [], []
        nxt = 1
        for entry in data["contests"]:
            names = list(entry["candidates"])
            contests.append(
                Contest(str(entry["contest_id"]), tuple(range(nxt, nxt + len(names))), int(entry["max_votes"]))
            )
            labels.extend(str(x) for x in names)
            nxt += len(names)
        return BallotStyle(str(data["style_id"]), tuple(contests), nxt - 1, tuple(labels))
    except (KeyError, TypeError) as exc:
        raise InvalidInputError(f"malformed ballot style JSON: {exc}") from exc


def style_to_json(style: BallotStyle) -> dict[str, Any]:
    return {
        "style_id": style.style_id,
        "contests": [
            {
                "contest_id": c.contest_id,
                "candidates": [style.labels[i - 1] for i in c.candidates],
                "max_votes": c.max_votes,
            }
            for c in style.contests
        ],
    }


def deck_from_json(data: dict[str, Any]) -> Deck:
    if "ballots" not in data:
        raise InvalidInputError("deck JSON needs a 'ballots' list")
    return Deck.of(data["ballots"])


def deck_to_json(style: BallotStyle, deck: Deck, **extra: Any) -> dict[str, Any]:
    out = {"style_id": style.style_id, "ballots": deck.as_lists()}
    out.update(extra)
    return out


def deck_to_csv(style: BallotStyle, deck: Deck) -> str:
    """0/1 matrix with one row per ballot and a header of candidate labels."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(style.labels)
    for ballot in deck:
        writer.writerow([1 if i in ballot else 0 for i in range(1, style.n_candidates + 1)])
    return buf.getvalue()


def deck_from_csv(style: BallotStyle, text: str) -> Deck:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or list(rows[0]) != list(style.labels):
        raise InvalidInputError("CSV header must list the style's candidate labels in order")
    ballots = []
    for row in rows[1:]:
        if len(row) != style.n_candidates or any(cell not in ("0", "1") for cell in row):
            raise InvalidInputError("CSV cells must be 0 or 1, one per candidate")
        ballots.append([k for k, cell in enumerate(row, start=1) if cell == "1"])
    return Deck.of(ballots)


def load_json(path: str | Path) -> dict[str, Any]:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def dump_json(data: Any, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(data, fh, indent=2)
        fh.write("\n")


def load_style(path: str | Path) -> BallotStyle:
    return style_from_json(load_json(path))


def load_deck(path: str | Path, style: BallotStyle | None = None) -> Deck:
    path = Path(path)
    if path.suffix.lower() == ".csv":
        if style is None:
            raise InvalidInputError("reading a CSV deck needs the ballot style")
        return deck_from_csv(style, path.read_text(encoding="utf-8"))
    return deck_from_json(load_json(path))


def load_swap(path: str | Path) -> Swap:
    return Swap.from_json(load_json(path))


def solved_deck_json(style: BallotStyle, deck: Deck, appended: Deck) -> dict[str, Any]:
    """Deck output with expected tallies and any rule-mandated extra ballots kept apart."""
    return deck_to_json(
        style,
        deck,
        expected_tally=list(tabulate_correct(style, deck)),
        rule_ballots=appended.as_lists(),
        expected_tally_with_rule_ballots=list(tabulate_correct(style, deck + appended)),
    )
