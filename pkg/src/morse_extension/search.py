"""Extendability decisions and witness construction.

``decide_general`` asks whether the germ extends non-singularly to some compact
3-manifold; ``decide_klein`` asks whether it extends to the solid Klein
bottle.  Both run a memoized depth-first search over the sweep transition
system and count accepting runs exactly; witnesses are rebuilt from their
traces and, in Klein mode, re-checked on the built diagram.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Iterator, Literal, Sequence

from .diagram import GermDiagram, GermError, VertexKind, validate_klein_germ
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
from .sweep import (
    G_MINUS,
    G_PLUS,
    J_MINUS,
    J_PLUS,
    M_MINUS,
    M_PLUS,
    N_MINUS,
    N_PLUS,
    O_MINUS,
    O_PLUS,
    S_MINUS,
    S_PLUS,
    Choice,
    Step,
    SweepState,
    Trace,
    canonicalize,
    initial_state,
    replay,
    successors,
    trace_from_json,
    trace_to_json,
)
from .unionfind import UnionFind

Mode = Literal["general", "klein"]
Condition = Literal["condition1", "condition2", "neither"]

DEFAULT_BUDGET = 10_000_000


class BudgetExceeded(RuntimeError):
    """The search visited more nodes than its budget allows."""


class KleinRejected(GermError):
    """The germ fails the necessary conditions for a Klein-bottle germ."""


# --------------------------------------------------------------------------
# extension diagrams


@dataclass(frozen=True)
class ExtVertex:
    id: str
    height: float
    event: str


@dataclass(frozen=True)
class ExtEdge:
    id: str
    upper: str
    lower: str
    cls: SurfaceClass
    provenance: tuple[str, ...]


@dataclass(frozen=True)
class ExtensionDiagram:
    """Labelled Reeb diagram of the extension built by a trace.

    ``loop_vertices`` lists the JPlus vertices that merged two level-surface
    components already lying in one component of the 3-manifold; each closes
    one loop of the diagram.
    """

    vertices: tuple[ExtVertex, ...]
    edges: tuple[ExtEdge, ...]
    loop_count: int
    loop_vertices: tuple[str, ...] = ()

    def betti1(self) -> int:
        uf = UnionFind(v.id for v in self.vertices)
        for e in self.edges:
            uf.union(e.upper, e.lower)
        return len(self.edges) - len(self.vertices) + uf.count()

    def labels(self) -> list[SurfaceClass]:
        return [e.cls for e in self.edges]


def build_extension_diagram(d: GermDiagram, trace: Sequence[Step]) -> ExtensionDiagram:
    """Replay ``trace`` and cut every block lifetime at the events touching it.

    Raises TraceRejected if the trace does not replay.
    """
    transitions = replay(d, trace)
    open_segments: dict[frozenset[str], tuple[str, str, SurfaceClass]] = {}
    edges: list[ExtEdge] = []
    loops: list[str] = []
    counter = 0
    for t in transitions:
        before = {b.edges: b for b in t.before.blocks}
        after = {b.edges: b for b in t.after.blocks}
        touched = [b for e, b in before.items() if e not in after]
        if t.choice.tag == J_PLUS and touched[0].component == touched[1].component:
            loops.append(t.vertex)
        for b in touched:
            seg_id, upper, cls = open_segments.pop(b.edges)
            edges.append(ExtEdge(seg_id, upper, t.vertex, cls, tuple(sorted(b.edges))))
        for e, b in after.items():
            if e not in before:
                open_segments[e] = (f"x{counter}", t.vertex, b.cls)
                counter += 1
    assert not open_segments
    edges.sort(key=lambda e: int(e.id[1:]))
    vertices = tuple(ExtVertex(t.vertex, d.vertex[t.vertex].height, t.choice.tag) for t in transitions)
    return ExtensionDiagram(vertices, tuple(edges), len(loops), tuple(loops))


_DEGREES = {
    M_PLUS: (0, 1), N_MINUS: (1, 0), J_PLUS: (2, 1), J_MINUS: (1, 2),
}


def check_extension(x: ExtensionDiagram) -> list[str]:
    """Structural and labelling invariants of an extension diagram; returns violations."""
    problems = []
    height = {v.id: v.height for v in x.vertices}
    above: dict[str, list[SurfaceClass]] = {v.id: [] for v in x.vertices}
    below: dict[str, list[SurfaceClass]] = {v.id: [] for v in x.vertices}
    for e in x.edges:
        if height[e.upper] <= height[e.lower]:
            problems.append(f"edge {e.id} does not descend")
        below[e.upper].append(e.cls)
        above[e.lower].append(e.cls)
    if x.betti1() != x.loop_count:
        problems.append(f"betti1 {x.betti1()} != loop_count {x.loop_count}")
    for v in x.vertices:
        up, down = above[v.id], below[v.id]
        want = _DEGREES.get(v.event, (1, 1))
        if (len(up), len(down)) != want:
            problems.append(f"vertex {v.id} ({v.event}) has degrees {(len(up), len(down))}, expected {want}")
            continue
        ok = True
        if v.event == M_PLUS:
            ok = down[0] == DISC
        elif v.event == N_MINUS:
            ok = up[0] == DISC
        elif v.event in (M_MINUS, N_PLUS, S_PLUS, S_MINUS):
            ok = up[0] == down[0]
        elif v.event == J_PLUS:
            ok = down[0] == join(up[0], up[1])
        elif v.event == J_MINUS:
            ok = tuple(sorted(down)) in split_options(up[0])
        elif v.event == G_PLUS:
            ok = down[0] in genus_add_options(up[0])
        elif v.event == G_MINUS:
            ok = up[0].g >= 2 and down[0] in genus_remove_options(up[0])
        elif v.event == O_PLUS:
            ok = down[0] == crosscap_add(up[0])
        elif v.event == O_MINUS:
            ok = up[0].o == 1 and down[0] in crosscap_remove_options(up[0])
        if not ok:
            problems.append(f"vertex {v.id} ({v.event}) has inconsistent labels {up} -> {down}")
    return problems


def check_klein_conditions(x: ExtensionDiagram) -> Condition:
    betti = x.betti1()
    twisted = [e for e in x.edges if e.cls.o == 1]
    if not twisted:
        return "condition1" if betti == 1 else "neither"
    uf = UnionFind()
    for e in twisted:
        uf.add(e.upper)
        uf.add(e.lower)
        uf.union(e.upper, e.lower)
    return "condition2" if uf.count() == 1 and betti == 0 else "neither"


# --------------------------------------------------------------------------
# search


@dataclass(frozen=True)
class KleinSummary:
    """Global bookkeeping that Klein mode adds to the memo key.

    ``regions[i]`` is the id of the connected non-orientable region that
    block ``i`` of the canonical state belongs to, or None for an orientable
    block.  ``closed`` counts finished regions and ``loops`` counts loop
    closures; both saturate at 2.
    """

    regions: tuple[int | None, ...] = ()
    closed: int = 0
    loops: int = 0

    def hopeless(self) -> bool:
        open_regions = any(r is not None for r in self.regions)
        twisted = open_regions or self.closed > 0
        return (
            self.loops >= 2
            or (self.loops >= 1 and twisted)
            or self.closed >= 2
            or (self.closed == 1 and open_regions)
        )

    def accepting(self) -> bool:
        return (self.closed, self.loops) in ((0, 1), (1, 0))


def advance_summary(s: KleinSummary, before: SweepState, choice: Choice, after: SweepState) -> KleinSummary:
    old = {b.edges: (b, r) for b, r in zip(before.blocks, s.regions)}
    after_edges = {b.edges for b in after.blocks}
    touched = [(b, r) for e, (b, r) in old.items() if e not in after_edges]
    hit = {r for _, r in touched if r is not None}

    loops = s.loops
    if choice.tag == J_PLUS and touched[0][0].component == touched[1][0].component:
        loops = min(loops + 1, 2)

    used = [r for r in s.regions if r is not None]
    merged = min(hit) if hit else max(used, default=-1) + 1
    regions = []
    for b in after.blocks:
        if b.edges in old:
            r = old[b.edges][1]
            regions.append(merged if r in hit else r)
        else:
            regions.append(merged if b.cls.o == 1 else None)
    closed = s.closed
    if hit and merged not in regions:
        closed = min(closed + 1, 2)

    renumber: dict[int, int] = {}
    canon = tuple(None if r is None else renumber.setdefault(r, len(renumber)) for r in regions)
    return KleinSummary(canon, closed, loops)


@dataclass
class SearchStats:
    nodes: int = 0
    memo_size: int = 0
    distinct_states: int = 0


class _Search:
    def __init__(self, d: GermDiagram, mode: Mode, budget: int = DEFAULT_BUDGET, memo: bool = True):
        self.d = d
        self.mode = mode
        self.budget = budget
        self.order = [v.id for v in d.vertices]
        self.memo: dict | None = {} if memo else None
        self.stats = SearchStats()
        self._states: set = set()
        # demigenus that the remaining vertices can still destroy
        n = len(self.order)
        self.capacity = [0] * (n + 1)
        for i in reversed(range(n)):
            vid = self.order[i]
            kind, sign = d.kind(vid), d.vertex[vid].sign
            cap = 2 if (kind is VertexKind.DOWN_SADDLE and sign == "-") else 1 if (kind is VertexKind.MOBIUS and sign == "-") else 0
            self.capacity[i] = self.capacity[i + 1] + cap

    def start(self) -> tuple[SweepState, KleinSummary | None]:
        return initial_state(), (KleinSummary() if self.mode == "klein" else None)

    def children(self, i: int, state: SweepState, summary: KleinSummary | None):
        for nxt, choice in successors(state, self.d, self.order[i]):
            nsum = advance_summary(summary, state, choice, nxt) if summary is not None else None
            yield choice, nxt, nsum

    def count(self, i: int, state: SweepState, summary: KleinSummary | None) -> int:
        if state.total_demigenus() > self.capacity[i]:
            return 0
        if summary is not None and summary.hopeless():
            return 0
        if i == len(self.order):
            return 1 if summary is None or summary.accepting() else 0
        key = (i, canonicalize(state), summary)
        if self.memo is not None and key in self.memo:
            return self.memo[key]
        self.stats.nodes += 1
        if self.stats.nodes > self.budget:
            raise BudgetExceeded(f"search exceeded its budget of {self.budget} nodes")
        total = sum(self.count(i + 1, nxt, nsum) for _, nxt, nsum in self.children(i, state, summary))
        if self.memo is not None:
            self.memo[key] = total
            self._states.add(key[1])
            self.stats.memo_size = len(self.memo)
            self.stats.distinct_states = len(self._states)
        return total

    def walk(self) -> Iterator[Trace]:
        """Accepting traces in canonical choice order."""

        def go(i, state, summary, prefix):
            if i == len(self.order):
                yield tuple(prefix)
                return
            for choice, nxt, nsum in self.children(i, state, summary):
                if self.count(i + 1, nxt, nsum) > 0:
                    prefix.append(Step(self.order[i], choice))
                    yield from go(i + 1, nxt, nsum, prefix)
                    prefix.pop()

        state, summary = self.start()
        if self.count(0, state, summary) > 0:
            yield from go(0, state, summary, [])


@dataclass(frozen=True)
class Witness:
    trace: Trace
    extension: ExtensionDiagram
    condition: str = "n/a"


@dataclass(frozen=True)
class Verdict:
    extendable: bool
    mode: Mode
    witness_count: int
    witness: Witness | None = None
    stats: SearchStats = field(default_factory=SearchStats, compare=False)

    @property
    def condition(self) -> str:
        return self.witness.condition if self.witness else "n/a"

    def summary(self) -> str:
        if not self.extendable:
            return "not extendable"
        if self.mode == "klein":
            return f"extendable ({self.condition.replace('condition', 'condition ')})"
        return "extendable"


def _make_witness(d: GermDiagram, mode: Mode, trace: Trace) -> Witness:
    x = build_extension_diagram(d, trace)
    if mode == "general":
        return Witness(trace, x)
    cond = check_klein_conditions(x)
    if cond == "neither":
        raise AssertionError("search bookkeeping accepted a trace that fails the Klein conditions")
    return Witness(trace, x, cond)


def _require_klein(d: GermDiagram, strict: bool) -> None:
    check = validate_klein_germ(d, strict)
    if not check:
        raise KleinRejected("; ".join(check.failures), "klein germ")


def _decide(d: GermDiagram, mode: Mode, budget: int, memo: bool) -> Verdict:
    search = _Search(d, mode, budget, memo)
    state, summary = search.start()
    total = search.count(0, state, summary)
    if total == 0:
        return Verdict(False, mode, 0, None, search.stats)
    trace = next(search.walk())
    return Verdict(True, mode, total, _make_witness(d, mode, trace), search.stats)


def decide_general(d: GermDiagram, budget: int = DEFAULT_BUDGET, memo: bool = True) -> Verdict:
    return _decide(d, "general", budget, memo)


def decide_klein(d: GermDiagram, strict: bool = True, budget: int = DEFAULT_BUDGET, memo: bool = True) -> Verdict:
    _require_klein(d, strict)
    return _decide(d, "klein", budget, memo)


def decide(d: GermDiagram, mode: Mode, budget: int = DEFAULT_BUDGET, strict: bool = True) -> Verdict:
    if mode == "klein":
        return decide_klein(d, strict, budget)
    return decide_general(d, budget)


def enumerate_witnesses(
    d: GermDiagram, mode: Mode, limit: int, budget: int = DEFAULT_BUDGET, strict: bool = True
) -> list[Witness]:
    if limit < 1:
        raise ValueError("limit must be positive")
    if mode == "klein":
        _require_klein(d, strict)
    out = []
    for trace in _Search(d, mode, budget).walk():
        out.append(_make_witness(d, mode, trace))
        if len(out) >= limit:
            break
    return out


# --------------------------------------------------------------------------
# witness files


def extension_to_json(x: ExtensionDiagram) -> dict[str, Any]:
    return {
        "vertices": [{"id": v.id, "height": v.height, "event": v.event} for v in x.vertices],
        "edges": [
            {"id": e.id, "upper": e.upper, "lower": e.lower, "label": e.cls.as_list(), "provenance": list(e.provenance)}
            for e in x.edges
        ],
        "loop_count": x.loop_count,
        "loop_vertices": list(x.loop_vertices),
    }


def extension_from_json(doc: dict[str, Any]) -> ExtensionDiagram:
    return ExtensionDiagram(
        tuple(ExtVertex(v["id"], float(v["height"]), v["event"]) for v in doc["vertices"]),
        tuple(
            ExtEdge(e["id"], e["upper"], e["lower"], SurfaceClass(*e["label"]), tuple(e["provenance"]))
            for e in doc["edges"]
        ),
        int(doc["loop_count"]),
        tuple(doc.get("loop_vertices", ())),
    )


def witness_to_json(w: Witness, mode: Mode) -> dict[str, Any]:
    return {
        "mode": mode,
        "condition": w.condition,
        "trace": trace_to_json(w.trace),
        "extension": extension_to_json(w.extension),
    }


def witness_from_json(doc: dict[str, Any]) -> tuple[Witness, Mode]:
    w = Witness(trace_from_json(doc["trace"]), extension_from_json(doc["extension"]), doc.get("condition", "n/a"))
    return w, doc.get("mode", "general")
