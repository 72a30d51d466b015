"""Brute-force reference decision procedure and random germ generator.

The reference procedure enumerates every run of the sweep without pruning or
memoization, and is written independently of the sweep and search modules:
it has its own reading of the label rules and its own diagram bookkeeping
(networkx).  Only the germ data model is shared.  Exponential; meant for
diagrams of at most about ten vertices.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from functools import lru_cache
from typing import Literal, Union

import networkx as nx

from .diagram import Edge, GermDiagram, Vertex, count_components


class OracleBudgetExceeded(RuntimeError):
    pass


def _in_lambda(g: int, o: int) -> bool:
    even_positive = g > 0 and g % 2 == 0 and o in (0, 1)
    odd = g % 2 == 1 and o == 1
    return even_positive or odd or (g, o) == (0, 0)


def brute_force_decide(d: GermDiagram, mode: str = "general", budget: int = 10_000_000) -> tuple[bool, int]:
    """Return (extendable, number of accepting runs).

    In Klein mode only runs whose built diagram satisfies one of the two
    solid-Klein-bottle conditions are counted.
    """
    order = sorted(d.vertices, key=lambda v: -v.height)
    ups = {v.id: sorted(e.id for e in d.edges if e.lower == v.id) for v in d.vertices}
    downs = {v.id: sorted(e.id for e in d.edges if e.upper == v.id) for v in d.vertices}
    nodes = 0

    # A block is (edges, g, o, component, segment top).  Segments are the
    # finished diagram edges: (top vertex, bottom vertex, o).
    def run(i: int, blocks: tuple, segments: tuple) -> int:
        nonlocal nodes
        nodes += 1
        if nodes > budget:
            raise OracleBudgetExceeded(f"oracle exceeded {budget} nodes")
        if i == len(order):
            assert not blocks
            return 1 if mode != "klein" or _klein_ok(d, segments) else 0

        v = order[i]
        here = v.id
        up, down = ups[here], downs[here]
        total = 0

        def go(removed: list[int], added: list[tuple], relabel: tuple[int, int] | None = None) -> int:
            closed = tuple((blocks[k][4], here, blocks[k][2]) for k in removed)
            kept = [b for k, b in enumerate(blocks) if k not in removed]
            if relabel:
                kept = [(e, g, o, relabel[1] if c == relabel[0] else c, top) for e, g, o, c, top in kept]
            new = tuple(kept) + tuple((e, g, o, c, here) for e, g, o, c in added)
            return run(i + 1, new, segments + closed)

        def where(edge: str) -> int:
            return next(k for k, b in enumerate(blocks) if edge in b[0])

        next_comp = 1 + max((b[3] for b in blocks), default=0)
        n_up, n_down = len(up), len(down)

        if (n_up, n_down) == (0, 1):
            if v.sign == "+":
                total += go([], [(frozenset(down), 0, 0, next_comp)])
            else:
                for k, (e, g, o, c, _) in enumerate(blocks):
                    total += go([k], [(e | {down[0]}, g, o, c)])

        elif (n_up, n_down) == (1, 0):
            k = where(up[0])
            e, g, o, c, _ = blocks[k]
            if v.sign == "-" and e == {up[0]} and (g, o) == (0, 0):
                total += go([k], [])
            if v.sign == "+" and len(e) > 1:
                total += go([k], [(e - {up[0]}, g, o, c)])

        elif (n_up, n_down) == (1, 1):
            k = where(up[0])
            e, g, o, c, _ = blocks[k]
            e2 = (e - {up[0]}) | {down[0]}
            if v.sign == "+":
                total += go([k], [(e2, g + 1, 1, c)])
            elif o == 1:
                for o2 in (0, 1):
                    if _in_lambda(g - 1, o2):
                        total += go([k], [(e2, g - 1, o2, c)])

        elif (n_up, n_down) == (1, 2):
            k = where(up[0])
            e, g, o, c, _ = blocks[k]
            rest = sorted(e - {up[0]})
            if v.sign == "+":
                total += go([k], [(frozenset(rest) | set(down), g, o, c)])
            else:
                for o2 in (0, 1):
                    if g >= 2 and o2 <= o and _in_lambda(g - 2, o2):
                        total += go([k], [(frozenset(rest) | set(down), g - 2, o2, c)])
                labels = [
                    (g1, o1, g - g1, o2)
                    for g1 in range(g + 1)
                    for o1 in (0, 1)
                    for o2 in (0, 1)
                    if max(o1, o2) == o and _in_lambda(g1, o1) and _in_lambda(g - g1, o2)
                ]
                for r in range(len(rest) + 1):
                    for side in itertools.combinations(rest, r):
                        x = frozenset(side) | {down[0]}
                        y = (frozenset(rest) - set(side)) | {down[1]}
                        for g1, o1, g2, o2 in labels:
                            total += go([k], [(x, g1, o1, c), (y, g2, o2, c)])

        else:  # two curves merge
            k1, k2 = where(up[0]), where(up[1])
            e1, g1, o1, c1, _ = blocks[k1]
            if k1 == k2:
                e2 = (e1 - set(up)) | {down[0]}
                if v.sign == "-":
                    total += go([k1], [(e2, g1, o1, c1)])
                else:
                    for o2 in (0, 1):
                        if o2 >= o1 and _in_lambda(g1 + 2, o2):
                            total += go([k1], [(e2, g1 + 2, o2, c1)])
            elif v.sign == "+":
                e2, g2, o2, c2, _ = blocks[k2]
                merged = ((e1 | e2) - set(up)) | {down[0]}
                total += go([k1, k2], [(merged, g1 + g2, max(o1, o2), c1)], relabel=(c2, c1))
        return total

    count = run(0, (), ())
    return count > 0, count


def _klein_ok(d: GermDiagram, segments: tuple) -> bool:
    graph = nx.MultiGraph()
    graph.add_nodes_from(v.id for v in d.vertices)
    graph.add_edges_from((top, bottom) for top, bottom, _ in segments)
    betti = graph.number_of_edges() - graph.number_of_nodes() + nx.number_connected_components(graph)
    twisted = nx.Graph()
    twisted.add_edges_from((top, bottom) for top, bottom, o in segments if o == 1)
    if twisted.number_of_edges() == 0:
        return betti == 1
    return betti == 0 and nx.is_connected(twisted)


# --------------------------------------------------------------------------
# random germs


class UnsatisfiableParams(ValueError):
    pass


@dataclass(frozen=True)
class GeneratorParams:
    seed: int
    max_vertices: int = 8
    mobius: Union[Literal[0, 2], Literal["any"]] = "any"
    euler: int | None = None
    connected: bool = False
    # probability that a maximum is "+" and a minimum is "-"; other signs are fair coins
    extremum_bias: float = 0.5

    def __post_init__(self) -> None:
        if self.max_vertices < 2:
            raise UnsatisfiableParams("vertex count bound must be at least 2")
        if self.mobius not in (0, 2, "any"):
            raise UnsatisfiableParams(f"mobius target must be 0, 2 or 'any', not {self.mobius!r}")
        if not 0.0 <= self.extremum_bias <= 1.0:
            raise UnsatisfiableParams("extremum_bias must lie in [0, 1]")


@lru_cache(maxsize=None)
def _feasible(frontier: int, extrema: int, saddles: int, mobius: int) -> bool:
    """Can the remaining vertices be placed so that every edge gets closed?"""
    if extrema == saddles == mobius == 0:
        return frontier == 0
    moves = []
    if extrema:
        moves.append((frontier + 1, extrema - 1, saddles, mobius))
        if frontier >= 1:
            moves.append((frontier - 1, extrema - 1, saddles, mobius))
    if saddles and frontier >= 1:
        moves.append((frontier + 1, extrema, saddles - 1, mobius))
        if frontier >= 2:
            moves.append((frontier - 1, extrema, saddles - 1, mobius))
    if mobius and frontier >= 1:
        moves.append((frontier, extrema, saddles, mobius - 1))
    return any(_feasible(*m) for m in moves)


def _shapes(p: GeneratorParams) -> list[tuple[int, int, int]]:
    """(extrema, saddles, mobius) counts meeting the targets."""
    out = []
    # Surfaces bounding a 3-manifold have even Euler characteristic, which
    # forces an even number of Möbius points and hence an even vertex count.
    for n in range(2, p.max_vertices + 1, 2):
        mobius_counts = [p.mobius] if p.mobius != "any" else range(0, n - 1, 2)
        for m in mobius_counts:
            for saddles in range(0, n - m - 1):
                extrema = n - m - saddles
                if extrema < 2 or (extrema + saddles) % 2:
                    continue
                if p.euler is not None and extrema - saddles - m != p.euler:
                    continue
                if p.connected and extrema - saddles - m > 2:
                    continue
                if _feasible(0, extrema, saddles, m):
                    out.append((extrema, saddles, m))
    return out


def random_germ(p: GeneratorParams, attempts: int = 2000) -> GermDiagram:
    """Deterministic random germ diagram built by a top-down sweep.

    Vertices are inserted from the top, maintaining the frontier of open
    edges; the shape counts are fixed up front so every edge gets closed.
    """
    if p.euler is not None and p.euler % 2:
        raise UnsatisfiableParams(f"odd euler characteristic {p.euler} is not attainable")
    shapes = _shapes(p)
    if not shapes:
        raise UnsatisfiableParams(f"no diagram with at most {p.max_vertices} vertices meets {p}")
    rng = random.Random(p.seed)
    for _ in range(attempts):
        d = _sweep_build(rng, *rng.choice(shapes), p.extremum_bias)
        if not p.connected or count_components(d) == 1:
            return d
    raise UnsatisfiableParams(f"no connected diagram found for {p} after {attempts} attempts")


def _sweep_build(rng: random.Random, extrema: int, saddles: int, mobius: int, bias: float) -> GermDiagram:
    total = extrema + saddles + mobius
    frontier: list[str] = []
    vertices: list[Vertex] = []
    edges: list[Edge] = []
    open_from: dict[str, str] = {}

    def open_edge(vid: str) -> None:
        eid = f"e{len(edges) + len(open_from) + 1}"
        open_from[eid] = vid
        frontier.append(eid)

    def close_edge(eid: str, vid: str) -> None:
        frontier.remove(eid)
        edges.append(Edge(eid, open_from.pop(eid), vid))

    for step in range(total):
        vid = f"v{step + 1}"
        f = len(frontier)
        options = []
        if extrema and _feasible(f + 1, extrema - 1, saddles, mobius):
            options.append("Max")
        if extrema and f >= 1 and _feasible(f - 1, extrema - 1, saddles, mobius):
            options.append("Min")
        if saddles and f >= 1 and _feasible(f + 1, extrema, saddles - 1, mobius):
            options.append("DownSaddle")
        if saddles and f >= 2 and _feasible(f - 1, extrema, saddles - 1, mobius):
            options.append("UpSaddle")
        if mobius and f >= 1 and _feasible(f, extrema, saddles, mobius - 1):
            options.append("Mobius")
        kind = rng.choice(options)
        if kind in ("Max", "Min"):
            true_extremum = rng.random() < bias
            sign = "+" if (kind == "Max") == true_extremum else "-"
        else:
            sign = rng.choice("+-")
        vertices.append(Vertex(vid, float(total - 1 - step), sign))
        if kind in ("Max", "Min"):
            extrema -= 1
        elif kind == "Mobius":
            mobius -= 1
        else:
            saddles -= 1
        n_close = {"Max": 0, "Min": 1, "DownSaddle": 1, "UpSaddle": 2, "Mobius": 1}[kind]
        n_open = {"Max": 1, "Min": 0, "DownSaddle": 2, "UpSaddle": 1, "Mobius": 1}[kind]
        for eid in rng.sample(frontier, n_close):
            close_edge(eid, vid)
        for _ in range(n_open):
            open_edge(vid)
    assert not frontier
    return GermDiagram(tuple(vertices), tuple(edges))
