"""Permutations of targets: construction, cycles, contest graphs and minimality.

A swap maps each candidate ``i`` to the target ``sigma(i)`` that the machine
actually reads for that candidate. Candidates are one-based throughout.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterable, Sequence

import networkx as nx

from .errors import InvalidSwapError

if TYPE_CHECKING:  # pragma: no cover
    from .ballot_model import BallotStyle


@dataclass(frozen=True)
class Swap:
    """A bijection on ``1..n`` stored as ``mapping[i - 1] = sigma(i)``."""

    mapping: tuple[int, ...]

    def __post_init__(self) -> None:
        mapping = tuple(int(x) for x in self.mapping)
        object.__setattr__(self, "mapping", mapping)
        if sorted(mapping) != list(range(1, len(mapping) + 1)):
            raise InvalidSwapError(f"not a bijection on 1..{len(mapping)}: {mapping}")

    @classmethod
    def identity(cls, n: int) -> "Swap":
        return cls(tuple(range(1, n + 1)))

    @classmethod
    def transposition(cls, n: int, a: int, b: int) -> "Swap":
        """The swap exchanging candidates ``a`` and ``b``."""
        mapping = list(range(1, n + 1))
        if not (1 <= a <= n and 1 <= b <= n):
            raise InvalidSwapError(f"transposition ({a} {b}) outside 1..{n}")
        mapping[a - 1], mapping[b - 1] = b, a
        return cls(tuple(mapping))

    @classmethod
    def from_cycles(cls, n: int, cycles: Iterable[Sequence[int]]) -> "Swap":
        """Build a swap from disjoint cycles, each read as ``c0 -> c1 -> ... -> c0``."""
        mapping = list(range(1, n + 1))
        seen: set[int] = set()
        for cycle in cycles:
            for k, i in enumerate(cycle):
                if i in seen or not 1 <= i <= n:
                    raise InvalidSwapError(f"cycles are not disjoint on 1..{n}")
                seen.add(i)
                mapping[i - 1] = cycle[(k + 1) % len(cycle)]
        return cls(tuple(mapping))

    @property
    def n(self) -> int:
        return len(self.mapping)

    def __call__(self, i: int) -> int:
        return self.mapping[i - 1]

    @property
    def is_identity(self) -> bool:
        return all(t == i for i, t in enumerate(self.mapping, start=1))

    def moved(self) -> tuple[int, ...]:
        """Candidates with ``sigma(i) != i`` in increasing order."""
        return tuple(i for i, t in enumerate(self.mapping, start=1) if t != i)

    def compose(self, other: "Swap") -> "Swap":
        """Return ``self o other``, i.e. ``i -> self(other(i))``."""
        if other.n != self.n:
            raise InvalidSwapError("cannot compose swaps of different sizes")
        return Swap(tuple(self.mapping[t - 1] for t in other.mapping))

    def inverse(self) -> "Swap":
        inv = [0] * self.n
        for i, t in enumerate(self.mapping, start=1):
            inv[t - 1] = i
        return Swap(tuple(inv))

    def power(self, k: int) -> "Swap":
        """The ``k``-fold composition of the swap with itself (``k >= 0``)."""
        result = Swap.identity(self.n)
        for _ in range(k):
            result = self.compose(result)
        return result

    def to_json(self) -> dict:
        return {"sigma": list(self.mapping)}

    @classmethod
    def from_json(cls, data: dict) -> "Swap":
        if "sigma" not in data:
            raise InvalidSwapError("swap JSON needs a 'sigma' list")
        return cls(tuple(data["sigma"]))


@dataclass(frozen=True)
class SwapGraph:
    """Contest graph of a swap.

    ``vertices`` are contest positions (zero-based indices into
    ``style.contests``) holding a moved candidate, ``edges`` are unordered
    pairs of distinct contests linked by some ``sigma(i) = i'``, and
    ``components`` partitions the vertices, ordered by smallest contest.
    """

    vertices: frozenset[int]
    edges: frozenset[tuple[int, int]]
    components: tuple[frozenset[int], ...]

    @property
    def component_count(self) -> int:
        return len(self.components)


def _require_non_identity(sigma: Swap) -> None:
    if sigma.is_identity:
        raise InvalidSwapError("operation requires a non-identity swap")


def build_swap_graph(style: "BallotStyle", sigma: Swap) -> SwapGraph:
    _require_non_identity(sigma)
    if sigma.n != style.n_candidates:
        raise InvalidSwapError("swap size does not match the ballot style")
    contest_of = style.contest_of
    vertices = {contest_of(i) for i in sigma.moved()}
    edges = set()
    for i in sigma.moved():
        a, b = contest_of(i), contest_of(sigma(i))
        if a != b:
            edges.add((min(a, b), max(a, b)))
    graph = nx.Graph()
    graph.add_nodes_from(vertices)
    graph.add_edges_from(edges)
    components = sorted((frozenset(c) for c in nx.connected_components(graph)), key=min)
    return SwapGraph(frozenset(vertices), frozenset(edges), tuple(components))


def is_minimal(style: "BallotStyle", sigma: Swap) -> bool:
    """True iff the contest graph of ``sigma`` is connected."""
    return build_swap_graph(style, sigma).component_count == 1


def split_by_components(style: "BallotStyle", sigma: Swap) -> list[Swap]:
    """Restrict ``sigma`` to each connected component of its contest graph.

    Each returned swap agrees with ``sigma`` on candidates of its component's
    contests and fixes every other candidate. Since ``sigma`` maps each
    component's candidates onto themselves, every restriction is a bijection.
    """
    graph = build_swap_graph(style, sigma)
    if graph.component_count == 1:
        return [sigma]
    contest_of = style.contest_of
    parts = []
    for component in graph.components:
        mapping = tuple(
            sigma(i) if contest_of(i) in component else i for i in range(1, sigma.n + 1)
        )
        parts.append(Swap(mapping))
    return parts


def cycle_decomposition(sigma: Swap) -> list[tuple[int, ...]]:
    """Disjoint cycles covering ``1..n`` ordered by their smallest candidate.

    Each cycle starts at its smallest member and follows ``sigma``; fixed
    points appear as one-element cycles.
    """
    seen = [False] * (sigma.n + 1)
    cycles = []
    for start in range(1, sigma.n + 1):
        if seen[start]:
            continue
        cycle = []
        i = start
        while not seen[i]:
            seen[i] = True
            cycle.append(i)
            i = sigma(i)
        cycles.append(tuple(cycle))
    return cycles
