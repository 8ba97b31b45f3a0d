"""Command-line interface: check, solve, bound, redteam, batch and bench."""
from __future__ import annotations

import json
import logging
import sys
from pathlib import Path

import click

from . import io
from .bounds import distinct_votes_deck, triangular_deck
from .cut_finder import brute_force_check, find_undetected_swap
from .master import Improvements, RuleSet
from .pipeline import batch_solve, rows_to_csv, run_experiment_table
from .redteam import hide_any_swap, hide_cross_contest_swap, rule_report
from .solver import solve_style

EXIT_VULNERABLE = 3
EXIT_PARTIAL = 2


@click.group()
@click.option("-v", "--verbose", is_flag=True, help="Log solver progress to stderr.")
def main(verbose: bool) -> None:
    """Design and verify test decks that expose every candidate/target swap."""
    logging.basicConfig(level=logging.DEBUG if verbose else logging.WARNING, format="%(levelname)s %(message)s")


@main.command()
@click.option("--style", "style_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--deck", "deck_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--minimal/--any", default=True, help="Report a witness moving as few candidates as possible.")
@click.option("--brute-force", is_flag=True, help="Enumerate every bijection instead of solving a MILP.")
@click.option("--time-limit", type=float, default=None)
def check(style_path: str, deck_path: str, minimal: bool, brute_force: bool, time_limit: float | None) -> None:
    """Exit 0 and print SECURE, or exit 3 and print a hidden swap as JSON."""
    style = io.load_style(style_path)
    deck = io.load_deck(deck_path, style)
    if brute_force:
        report = brute_force_check(style, deck)
    else:
        report = find_undetected_swap(style, deck, minimal=minimal, time_limit=time_limit)
    if report.secure:
        click.echo("SECURE")
        return
    click.echo(json.dumps(report.witness.to_json()))
    sys.exit(EXIT_VULNERABLE)


def _rules(name: str, full_overvote: bool, exact_overvote: bool, assume_alerts: bool) -> RuleSet:
    base = RuleSet.named(name)
    return RuleSet(
        at_least_one_vote=base.at_least_one_vote,
        distinct_within_contest=base.distinct_within_contest,
        append_full_overvote_ballot=full_overvote,
        append_exact_overvote_ballot=exact_overvote,
        assume_overvote_alerts=assume_alerts,
    )


@main.command()
@click.option("--style", "style_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--rules", "rules_name", type=click.Choice(["michigan", "none", "one-vote"]), default="michigan")
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
@click.option("--no-improvement", "disabled", type=click.IntRange(1, 5), multiple=True)
@click.option("--time-limit", type=float, default=None)
@click.option("--trace", "trace_path", type=click.Path(dir_okay=False), default=None)
@click.option("--append-full-overvote", is_flag=True, help="Append a ballot marking every candidate.")
@click.option("--append-exact-overvote", is_flag=True, help="Append a ballot with v+1 marks per competitive contest.")
@click.option("--assume-overvote-alerts", is_flag=True, help="Machines flag overvoted ballots individually.")
def solve(style_path, rules_name, out_path, disabled, time_limit, trace_path,
          append_full_overvote, append_exact_overvote, assume_overvote_alerts) -> None:
    """Compute a shortest secure deck and write it as JSON."""
    style = io.load_style(style_path)
    rules = _rules(rules_name, append_full_overvote, append_exact_overvote, assume_overvote_alerts)
    result = solve_style(style, rules, Improvements().without(*disabled), time_limit=time_limit)
    if trace_path:
        io.dump_json(
            {
                "style_id": style.style_id,
                "iterations": result.iterations,
                "certificate": result.certificate.value,
                "cuts": [list(s.mapping) for s in result.cut_set],
                "trace": result.trace_json(),
            },
            trace_path,
        )
    if not result.certified:
        click.echo(f"time limit reached; lower bound {result.lower_bound}", err=True)
        sys.exit(EXIT_PARTIAL)
    io.dump_json(io.solved_deck_json(style, result.deck, result.appended), out_path)
    click.echo(f"B*={result.deck_length} iterations={result.iterations} {result.certificate.value}")


@main.command()
@click.option("--style", "style_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--method", type=click.Choice(["triangular", "distinct"]), default="distinct")
@click.option("--out", "out_path", type=click.Path(dir_okay=False), default=None)
def bound(style_path: str, method: str, out_path: str | None) -> None:
    """Build a simple secure deck whose length bounds the optimum from above."""
    style = io.load_style(style_path)
    deck = triangular_deck(style) if method == "triangular" else distinct_votes_deck(style)
    payload = io.deck_to_json(style, deck, method=method, length=len(deck))
    if out_path:
        io.dump_json(payload, out_path)
    click.echo(json.dumps(payload) if not out_path else f"length={len(deck)}")


@main.command()
@click.option("--style", "style_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--sigma", "sigma_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--rules", "rules_name", type=click.Choice(["none", "one-vote", "distinct"]), default="distinct")
def redteam(style_path: str, sigma_path: str, rules_name: str) -> None:
    """Print a deck that hides the given swap while meeting the chosen rule."""
    style = io.load_style(style_path)
    sigma = io.load_swap(sigma_path)
    if rules_name == "distinct":
        deck = hide_cross_contest_swap(style, sigma)
    else:
        deck = hide_any_swap(style, sigma)
    report = find_undetected_swap(style, deck)
    click.echo(
        json.dumps(
            io.deck_to_json(
                style,
                deck,
                passes=rule_report(style, deck),
                verdict=report.verdict.value,
            )
        )
    )


@main.command()
@click.option("--dir", "style_dir", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--rules", "rules_name", type=click.Choice(["michigan", "none", "one-vote"]), default="michigan")
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
@click.option("--jobs", type=int, default=1)
@click.option("--time-limit", type=float, default=None, help="Per-style limit in seconds.")
def batch(style_dir: str, rules_name: str, out_dir: str, jobs: int, time_limit: float | None) -> None:
    """Solve every *.json style in a directory; exit 2 if any style is unsolved."""
    styles = [io.load_style(p) for p in sorted(Path(style_dir).glob("*.json"))]
    result = batch_solve(styles, RuleSet.named(rules_name), jobs=jobs, time_limit=time_limit)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for style, outcome in zip(styles, result.outcomes):
        if outcome.ok:
            io.dump_json(io.deck_to_json(style, outcome.deck, mode=outcome.mode), out / f"{style.style_id}.deck.json")
    (out / "summary.csv").write_text(result.to_csv(), encoding="utf-8")
    io.dump_json(result.summary, out / "summary.json")
    click.echo(json.dumps(result.summary))
    if not result.all_solved:
        sys.exit(EXIT_PARTIAL)


@main.command()
@click.option("--experiment", "family", type=click.IntRange(1, 3), required=True)
@click.option("--max-c", type=click.IntRange(2, 12), default=6)
@click.option("--ablate", type=click.IntRange(1, 5), default=None, help="Disable one improvement.")
@click.option("--rules", "rules_name", type=click.Choice(["michigan", "none", "one-vote"]), default="one-vote")
@click.option("--time-limit", type=float, default=None, help="Per-instance limit in seconds.")
@click.option("--out", "out_path", type=click.Path(dir_okay=False), default=None)
def bench(family: int, max_c: int, ablate: int | None, rules_name: str, time_limit: float | None,
          out_path: str | None) -> None:
    """Time one benchmark family and print a CSV table."""
    rows = run_experiment_table(family, max_c, ablate, RuleSet.named(rules_name), time_limit)
    text = rows_to_csv(rows)
    if out_path:
        Path(out_path).write_text(text, encoding="utf-8")
    click.echo(text, nl=False)


if __name__ == "__main__":  # pragma: no cover
    main()
