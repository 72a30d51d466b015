"""Downward sweep over a germ diagram.

The sweep visits germ vertices from the highest to the lowest.  Between two
critical heights the level surface of a candidate extension is described by a
partition of the active germ edges (the level curves) into blocks, one per
level-surface component, each carrying its demigenus/orientability label and
the id of the connected component of the 3-manifold built so far.

A run that starts and ends with the empty state is an allowable collapse;
the choices made at each vertex form a replayable trace.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Any, Hashable, Iterable, NamedTuple, Sequence

from .diagram import GermDiagram, VertexKind
from .surface import (
    DISC,
    SurfaceClass,
    crosscap_add,
    crosscap_remove_options,
    genus_add_options,
    genus_remove_options,
    join,
    split_options,
)

M_PLUS, M_MINUS = "MPlus", "MMinus"
N_PLUS, N_MINUS = "NPlus", "NMinus"
S_PLUS, S_MINUS = "SPlus", "SMinus"
J_PLUS, J_MINUS = "JPlus", "JMinus"
G_PLUS, G_MINUS = "GPlus", "GMinus"
O_PLUS, O_MINUS = "OPlus", "OMinus"

TAGS = (M_PLUS, M_MINUS, N_MINUS, N_PLUS, S_PLUS, S_MINUS, J_PLUS, G_PLUS, J_MINUS, G_MINUS, O_PLUS, O_MINUS)
_TAG_RANK = {tag: i for i, tag in enumerate(TAGS)}

# Change in the number of active level curves caused by each event.
BOUNDARY_DELTA = {
    M_PLUS: +1, M_MINUS: +1, S_PLUS: +1, S_MINUS: -1, N_PLUS: -1, N_MINUS: -1,
    O_PLUS: 0, O_MINUS: 0, G_PLUS: -1, G_MINUS: +1, J_PLUS: -1, J_MINUS: +1,
}

# Change in the total demigenus of the level surface caused by each event.
DEMIGENUS_DELTA = {
    M_PLUS: 0, M_MINUS: 0, S_PLUS: 0, S_MINUS: 0, N_PLUS: 0, N_MINUS: 0,
    O_PLUS: +1, O_MINUS: -1, G_PLUS: +2, G_MINUS: -2, J_PLUS: 0, J_MINUS: 0,
}

# Which events are allowed at a vertex of a given kind and sign.
EVENTS_FOR = {
    (VertexKind.MAX, "+"): (M_PLUS,),
    (VertexKind.MAX, "-"): (M_MINUS,),
    (VertexKind.MIN, "-"): (N_MINUS,),
    (VertexKind.MIN, "+"): (N_PLUS,),
    (VertexKind.DOWN_SADDLE, "+"): (S_PLUS,),
    (VertexKind.DOWN_SADDLE, "-"): (G_MINUS, J_MINUS),
    (VertexKind.UP_SADDLE, "-"): (S_MINUS,),
    (VertexKind.UP_SADDLE, "+"): (J_PLUS, G_PLUS),
    (VertexKind.MOBIUS, "+"): (O_PLUS,),
    (VertexKind.MOBIUS, "-"): (O_MINUS,),
}


class SweepError(ValueError):
    pass


@dataclass(frozen=True)
class Choice:
    """Resolved nondeterminism at one vertex.

    ``host`` indexes the canonical block order of the state before the event
    (MMinus only).  ``parts`` holds the full edge sets of the two blocks
    created by a JMinus, the part holding the smaller down edge first.
    ``labels`` holds the new label(s) for GPlus, GMinus, OMinus and JMinus.
    """

    tag: str
    host: int | None = None
    parts: tuple[tuple[str, ...], tuple[str, ...]] | None = None
    labels: tuple[SurfaceClass, ...] = ()

    def sort_key(self) -> tuple:
        return (
            _TAG_RANK[self.tag],
            -1 if self.host is None else self.host,
            self.parts or (),
            tuple((c.g, c.o) for c in self.labels),
        )

    def __str__(self) -> str:
        bits = []
        if self.host is not None:
            bits.append(f"host={self.host}")
        if self.parts is not None:
            bits.append("parts=" + "|".join(",".join(p) for p in self.parts))
        if self.labels:
            bits.append("labels=" + ",".join(map(str, self.labels)))
        return self.tag + (f"({'; '.join(bits)})" if bits else "")


class Step(NamedTuple):
    vertex: str
    choice: Choice


Trace = tuple[Step, ...]


@dataclass(frozen=True)
class Block:
    id: Hashable
    edges: frozenset[str]
    cls: SurfaceClass
    component: Hashable


@dataclass(frozen=True)
class SweepState:
    blocks: tuple[Block, ...] = ()

    def __post_init__(self) -> None:
        seen: set[str] = set()
        ids = set()
        for b in self.blocks:
            if not b.edges:
                raise SweepError(f"block {b.id!r} is empty")
            if seen & b.edges:
                raise SweepError(f"block {b.id!r} overlaps another block")
            if b.id in ids:
                raise SweepError(f"duplicate block id {b.id!r}")
            seen |= b.edges
            ids.add(b.id)

    @property
    def active_edges(self) -> frozenset[str]:
        return frozenset().union(*(b.edges for b in self.blocks))

    def block_of(self, edge: str) -> int:
        for i, b in enumerate(self.blocks):
            if edge in b.edges:
                return i
        raise SweepError(f"edge {edge!r} is not active")

    def total_demigenus(self) -> int:
        return sum(b.cls.g for b in self.blocks)


def initial_state() -> SweepState:
    return SweepState()


def canonical_state(s: SweepState) -> SweepState:
    """Blocks ordered by smallest edge id, renumbered 0..k-1; components renumbered in order of first use."""
    blocks = sorted(s.blocks, key=lambda b: min(b.edges))
    comp_ids: dict[Hashable, int] = {}
    out = []
    for i, b in enumerate(blocks):
        comp = comp_ids.setdefault(b.component, len(comp_ids))
        out.append(Block(i, b.edges, b.cls, comp))
    return SweepState(tuple(out))


def canonicalize(s: SweepState) -> tuple:
    """Hashable key equal for states identical up to block and component renaming."""
    c = canonical_state(s)
    return tuple((tuple(sorted(b.edges)), b.cls.g, b.cls.o, b.component) for b in c.blocks)


def _replace(blocks: Sequence[Block], drop: Iterable[int], add: Iterable[Block]) -> SweepState:
    dropped = set(drop)
    kept = [b for i, b in enumerate(blocks) if i not in dropped]
    return canonical_state(SweepState(tuple(kept) + tuple(add)))


def successors(s: SweepState, d: GermDiagram, vertex_id: str) -> list[tuple[SweepState, Choice]]:
    """All legal (state, choice) pairs after processing ``vertex_id``, in canonical choice order.

    An empty list is a dead end.
    """
    s = canonical_state(s)
    blocks = s.blocks
    kind = d.kind(vertex_id)
    sign = d.vertex[vertex_id].sign
    ups = d.up_edges[vertex_id]
    downs = d.down_edges[vertex_id]
    active = s.active_edges
    for e in ups:
        if e not in active:
            raise SweepError(f"vertex {vertex_id!r}: up edge {e!r} is not active")
    fresh_comp = max((b.component for b in blocks), default=-1) + 1
    fresh_id = len(blocks)
    out: list[tuple[SweepState, Choice]] = []

    if kind is VertexKind.MAX:
        (down,) = downs
        if sign == "+":
            new = Block(fresh_id, frozenset([down]), DISC, fresh_comp)
            out.append((_replace(blocks, (), [new]), Choice(M_PLUS)))
        else:
            for i, b in enumerate(blocks):
                grown = Block(b.id, b.edges | {down}, b.cls, b.component)
                out.append((_replace(blocks, [i], [grown]), Choice(M_MINUS, host=i)))

    elif kind is VertexKind.MIN:
        (up,) = ups
        i = s.block_of(up)
        b = blocks[i]
        if sign == "-":
            if b.edges == {up} and b.cls == DISC:
                out.append((_replace(blocks, [i], ()), Choice(N_MINUS)))
        elif len(b.edges) >= 2:
            shrunk = Block(b.id, b.edges - {up}, b.cls, b.component)
            out.append((_replace(blocks, [i], [shrunk]), Choice(N_PLUS)))

    elif kind is VertexKind.MOBIUS:
        (up,), (down,) = ups, downs
        i = s.block_of(up)
        b = blocks[i]
        edges = (b.edges - {up}) | {down}
        if sign == "+":
            new = Block(b.id, edges, crosscap_add(b.cls), b.component)
            out.append((_replace(blocks, [i], [new]), Choice(O_PLUS)))
        elif b.cls.o == 1:
            for c in sorted(crosscap_remove_options(b.cls)):
                new = Block(b.id, edges, c, b.component)
                out.append((_replace(blocks, [i], [new]), Choice(O_MINUS, labels=(c,))))

    elif kind is VertexKind.DOWN_SADDLE:
        (up,) = ups
        d1, d2 = sorted(downs)
        i = s.block_of(up)
        b = blocks[i]
        rest = b.edges - {up}
        if sign == "+":
            new = Block(b.id, rest | {d1, d2}, b.cls, b.component)
            out.append((_replace(blocks, [i], [new]), Choice(S_PLUS)))
        else:
            if b.cls.g >= 2:
                for c in sorted(genus_remove_options(b.cls)):
                    new = Block(b.id, rest | {d1, d2}, c, b.component)
                    out.append((_replace(blocks, [i], [new]), Choice(G_MINUS, labels=(c,))))
            label_pairs = sorted(
                {(c1, c2) for p, q in split_options(b.cls) for c1, c2 in ((p, q), (q, p))}
            )
            rest_sorted = sorted(rest)
            for mask in itertools.product((0, 1), repeat=len(rest_sorted)):
                x = frozenset(e for e, m in zip(rest_sorted, mask) if m == 0) | {d1}
                y = frozenset(e for e, m in zip(rest_sorted, mask) if m == 1) | {d2}
                parts = (tuple(sorted(x)), tuple(sorted(y)))
                for c1, c2 in label_pairs:
                    new = [Block(b.id, x, c1, b.component), Block(fresh_id, y, c2, b.component)]
                    out.append((_replace(blocks, [i], new), Choice(J_MINUS, parts=parts, labels=(c1, c2))))

    elif kind is VertexKind.UP_SADDLE:
        a1, a2 = ups
        (down,) = downs
        i, j = s.block_of(a1), s.block_of(a2)
        if sign == "-":
            if i == j:
                b = blocks[i]
                new = Block(b.id, (b.edges - {a1, a2}) | {down}, b.cls, b.component)
                out.append((_replace(blocks, [i], [new]), Choice(S_MINUS)))
        elif i != j:
            p, q = blocks[i], blocks[j]
            merged = Block(p.id, ((p.edges | q.edges) - {a1, a2}) | {down}, join(p.cls, q.cls), p.component)
            rest = [
                b if b.component != q.component else Block(b.id, b.edges, b.cls, p.component)
                for k, b in enumerate(blocks)
                if k not in (i, j)
            ]
            out.append((canonical_state(SweepState(tuple(rest) + (merged,))), Choice(J_PLUS)))
        else:
            b = blocks[i]
            for c in sorted(genus_add_options(b.cls)):
                new = Block(b.id, (b.edges - {a1, a2}) | {down}, c, b.component)
                out.append((_replace(blocks, [i], [new]), Choice(G_PLUS, labels=(c,))))

    out.sort(key=lambda pair: pair[1].sort_key())
    return out


# --------------------------------------------------------------------------
# traces


class TraceRejected(Exception):
    def __init__(self, reason: str, vertex: str | None = None):
        super().__init__(reason if vertex is None else f"{reason} (vertex {vertex!r})")
        self.reason = reason
        self.vertex = vertex


@dataclass(frozen=True)
class TraceCheck:
    accepted: bool
    reason: str | None = None
    vertex: str | None = None

    def __bool__(self) -> bool:
        return self.accepted


class Transition(NamedTuple):
    vertex: str
    choice: Choice
    before: SweepState
    after: SweepState


def replay(d: GermDiagram, trace: Sequence[Step]) -> list[Transition]:
    """Replay ``trace`` from the empty state; raises TraceRejected on the first bad step."""
    order = [v.id for v in d.vertices]
    state = initial_state()
    out = []
    for k, vid in enumerate(order):
        if k >= len(trace):
            raise TraceRejected("unprocessed vertices", vid)
        step = trace[k]
        if step.vertex != vid:
            raise TraceRejected(f"expected vertex {vid!r} at step {k}, got {step.vertex!r}", step.vertex)
        for after, choice in successors(state, d, vid):
            if choice == step.choice:
                out.append(Transition(vid, choice, state, after))
                state = after
                break
        else:
            raise TraceRejected("choice not in successor set", vid)
    if len(trace) > len(order):
        raise TraceRejected("trace longer than the vertex list", trace[len(order)].vertex)
    if state.blocks:
        raise TraceRejected("final state is not empty", order[-1] if order else None)
    return out


def check_trace(d: GermDiagram, trace: Sequence[Step]) -> TraceCheck:
    try:
        replay(d, trace)
    except TraceRejected as exc:
        return TraceCheck(False, exc.reason, exc.vertex)
    return TraceCheck(True)


def audit_trace(d: GermDiagram, trace: Sequence[Step]) -> list[str]:
    """Check the bookkeeping ledgers of an accepting trace; returns violations.

    The checks use only the per-event effect tables, not the successor rules.
    """
    problems = []
    created = destroyed = 0
    for t in replay(d, trace):
        tag = t.choice.tag
        if tag not in EVENTS_FOR[(d.kind(t.vertex), d.vertex[t.vertex].sign)]:
            problems.append(f"{t.vertex}: event {tag} incompatible with vertex type")
        delta_b = len(t.after.active_edges) - len(t.before.active_edges)
        if delta_b != BOUNDARY_DELTA[tag]:
            problems.append(f"{t.vertex}: boundary count changed by {delta_b}, expected {BOUNDARY_DELTA[tag]}")
        delta_g = t.after.total_demigenus() - t.before.total_demigenus()
        if delta_g != DEMIGENUS_DELTA[tag]:
            problems.append(f"{t.vertex}: demigenus changed by {delta_g}, expected {DEMIGENUS_DELTA[tag]}")
        created += max(delta_g, 0) if tag in (O_PLUS, G_PLUS) else 0
        destroyed += max(-delta_g, 0) if tag in (O_MINUS, G_MINUS) else 0
        before = {b.edges: b.cls for b in t.before.blocks}
        after = {b.edges: b.cls for b in t.after.blocks}
        old = [c for e, c in before.items() if e not in after]
        new = [c for e, c in after.items() if e not in before]
        if tag == N_MINUS and old != [SurfaceClass(0, 0)]:
            problems.append(f"{t.vertex}: block died with label {old}")
        if tag == O_PLUS and not all(c.o == 1 for c in new):
            problems.append(f"{t.vertex}: O+ left an orientable component")
        if tag == O_MINUS and not all(c.o == 1 for c in old):
            problems.append(f"{t.vertex}: O- on an orientable component")
        if tag == G_PLUS and new[0].o < old[0].o:
            problems.append(f"{t.vertex}: G+ made a surface orientable")
        if tag == G_MINUS and new[0].o > old[0].o:
            problems.append(f"{t.vertex}: G- made a surface non-orientable")
        if tag in (M_MINUS, N_PLUS, S_PLUS, S_MINUS) and old != new:
            problems.append(f"{t.vertex}: {tag} changed a label")
    if created != destroyed:
        problems.append(f"demigenus created {created} but destroyed {destroyed}")
    return problems


def choice_to_json(c: Choice) -> dict[str, Any]:
    out: dict[str, Any] = {"tag": c.tag}
    if c.host is not None:
        out["host"] = c.host
    if c.parts is not None:
        out["parts"] = [list(p) for p in c.parts]
    if c.labels:
        out["labels"] = [cls.as_list() for cls in c.labels]
    return out


def choice_from_json(obj: Any) -> Choice:
    if not isinstance(obj, dict) or obj.get("tag") not in _TAG_RANK:
        raise ValueError(f"bad choice record: {obj!r}")
    extra = set(obj) - {"tag", "host", "parts", "labels"}
    if extra:
        raise ValueError(f"unknown choice fields {sorted(extra)}")
    host = obj.get("host")
    if host is not None and (isinstance(host, bool) or not isinstance(host, int)):
        raise ValueError("host must be an integer")
    parts = obj.get("parts")
    if parts is not None:
        if len(parts) != 2:
            raise ValueError("parts must hold exactly two edge lists")
        parts = (tuple(parts[0]), tuple(parts[1]))
    labels = tuple(SurfaceClass(int(g), int(o)) for g, o in obj.get("labels", ()))
    return Choice(obj["tag"], host, parts, labels)


def trace_to_json(trace: Sequence[Step]) -> list[dict[str, Any]]:
    return [{"vertex": s.vertex, "choice": choice_to_json(s.choice)} for s in trace]


def trace_from_json(doc: Any) -> Trace:
    if not isinstance(doc, list):
        raise ValueError("trace must be an array")
    steps = []
    for item in doc:
        if not isinstance(item, dict) or set(item) != {"vertex", "choice"}:
            raise ValueError(f"bad trace step: {item!r}")
        steps.append(Step(item["vertex"], choice_from_json(item["choice"])))
    return tuple(steps)
