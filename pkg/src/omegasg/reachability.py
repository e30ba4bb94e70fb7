"""Forward reachability in the coordinate-dependency digraph.

The dependency digraph has an edge n -> j whenever column j appears in row n.
Coordinate n of every power of the operator depends only on the forward
reachable set of n; the operator generates a strongly continuous semigroup on
the full sequence space exactly when every such set is finite.  Finiteness is
decided with certificates both ways: a finite closed index set, or a concrete
stem into a cycle of strictly positive column drift that pumps to arbitrarily
large indices.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Union

from .errors import InvalidOperatorError, ResourceLimitError
from .operators import DEFAULT_SUPPORT_CAP, RowFiniteOperator, row

# Quotient-graph nodes: ("row", i) for explicit rows i < n0, ("res", r) for
# the residue class r of the periodic regime.
Node = tuple[str, int]


@dataclass(frozen=True)
class Edge:
    src: Node
    dst: Node
    weight: int            # column offset (target minus source row index)
    column: Optional[int]  # absolute target column for explicit-region edges

    def to_json(self) -> dict:
        d = {"from": list(self.src), "to": list(self.dst), "weight": self.weight}
        if self.column is not None:
            d["column"] = self.column
        return d


@dataclass(frozen=True)
class QuotientGraph:
    """Finite presentation of the dependency digraph.

    Explicit rows keep their absolute targets; the periodic regime is folded
    to one node per residue, one edge per pattern entry.
    """

    nodes: tuple[Node, ...]
    edges: tuple[Edge, ...]
    n0: int
    period: int

    def outgoing(self, node: Node) -> tuple[Edge, ...]:
        return tuple(e for e in self.edges if e.src == node)

    def node_for_row(self, n: int) -> Node:
        if n < 1:
            raise InvalidOperatorError(f"row index {n} < 1")
        return ("row", n) if n < self.n0 else ("res", n % self.period)


def quotient_graph(op: RowFiniteOperator) -> QuotientGraph:
    """Build the quotient graph with deterministic node and edge order."""
    p = op.period
    nodes: list[Node] = [("row", i) for i in range(1, op.n0)]
    nodes += [("res", r) for r in range(p)]
    edges: list[Edge] = []
    for i in range(1, op.n0):
        for j, _c in row(op, i).entries:
            dst: Node = ("row", j) if j < op.n0 else ("res", j % p)
            edges.append(Edge(("row", i), dst, weight=j - i, column=j))
    for r in range(p):
        for d, _c in op.periodic_pattern[r]:
            edges.append(Edge(("res", r), ("res", (r + d) % p), weight=d, column=None))
    return QuotientGraph(tuple(nodes), tuple(edges), op.n0, p)


def has_positive_cycle(graph: QuotientGraph, start: Node) -> Optional[list[Edge]]:
    """A reachable closed walk of strictly positive total weight, or None.

    Length-indexed Bellman-Ford relaxation on negated weights over the
    subgraph reachable from `start`: a negative closed walk there is a
    positive one here, and any positive closed walk is witnessed within
    |nodes| steps because it must contain a positive simple cycle.  Closed
    walks of total weight zero are not reported.
    """
    # restrict to the reachable subgraph
    reachable = {start}
    stack = [start]
    out: dict[Node, list[Edge]] = {}
    for e in graph.edges:
        out.setdefault(e.src, []).append(e)
    while stack:
        u = stack.pop()
        for e in out.get(u, ()):
            if e.dst not in reachable:
                reachable.add(e.dst)
                stack.append(e.dst)

    # positive cycles can only involve residue nodes: explicit-region cycles
    # telescope to weight 0 and no edge returns from a residue to a row node
    anchors = sorted(v for v in reachable if v[0] == "res")
    edges = [e for e in graph.edges if e.src in reachable and e.src[0] == "res"]
    horizon = len(anchors)
    for anchor in anchors:
        best: dict[Node, int] = {anchor: 0}
        parent: dict[tuple[int, Node], Edge] = {}
        for length in range(1, horizon + 1):
            improved: dict[Node, int] = {}
            for e in edges:
                if e.src in best:
                    gain = best[e.src] + e.weight
                    cur = improved.get(e.dst)
                    if cur is None or gain > cur:
                        improved[e.dst] = gain
                        parent[(length, e.dst)] = e
            best = improved
            if best.get(anchor, 0) > 0:
                walk: list[Edge] = []
                node, l = anchor, length
                while l > 0:
                    e = parent[(l, node)]
                    walk.append(e)
                    node, l = e.src, l - 1
                walk.reverse()
                total = sum(e.weight for e in walk)
                assert total > 0 and walk[0].src == anchor and walk[-1].dst == anchor
                return walk
            if not best:
                break
    return None


@dataclass(frozen=True)
class FiniteClosure:
    """Finite forward-reachable set S (closed under row supports), m = max S."""

    S: frozenset[int]
    m: int

    def to_json(self) -> dict:
        return {"kind": "finite", "S": sorted(self.S), "m": self.m}


@dataclass(frozen=True)
class InfiniteCertificate:
    """Concrete pump: stem from the start row into a cycle of positive drift.

    Every (i, j) pair is an actual nonzero matrix entry.  The cycle starts
    and ends at rows of equal residue with total column drift `weight` >= 1
    and never dips below n0, so shifting it upward by `weight` repeatedly
    stays valid: reachable columns are unbounded.
    """

    stem: tuple[tuple[int, int], ...]
    cycle: tuple[tuple[int, int], ...]
    weight: int

    def base(self) -> int:
        return self.cycle[0][0]

    def pumped_columns(self, rounds: int) -> list[int]:
        """Column reached after the stem plus k full cycles, k = 1..rounds."""
        return [self.base() + k * self.weight for k in range(1, rounds + 1)]

    def walk(self, rounds: int) -> list[int]:
        """Index sequence of the concrete walk: stem, then `rounds` cycles."""
        seq = [self.stem[0][0]] if self.stem else [self.base()]
        for _i, j in self.stem:
            seq.append(j)
        pos = seq[-1]
        offsets = [j - i for i, j in self.cycle]
        for _ in range(rounds):
            for d in offsets:
                pos += d
                seq.append(pos)
        return seq

    def to_json(self) -> dict:
        return {
            "kind": "infinite",
            "stem": [[i, j] for i, j in self.stem],
            "cycle": [[i, j] for i, j in self.cycle],
            "weight": self.weight,
        }


ReachabilityResult = Union[FiniteClosure, InfiniteCertificate]


class StructuralFailureError(Exception):
    """Raised where a finite closed submatrix is required but none exists."""

    def __init__(self, starting_row: int, certificate: InfiniteCertificate):
        super().__init__(
            f"row {starting_row}: forward-reachable columns are unbounded "
            f"(cycle drift +{certificate.weight} per round)"
        )
        self.starting_row = starting_row
        self.certificate = certificate


def _escape_bound(op: RowFiniteOperator, sources: Iterable[int]) -> int:
    """Threshold above which a reachable index certifies an infinite closure.

    Any concrete path from the sources whose periodic tail climbs more than
    (p+1)*d_max above its entry point must repeat a residue at two strict
    running maxima, yielding a realizable cycle of positive drift; tails
    enter at most at max(sources, largest exceptional column).
    """
    c = max(max(sources), op.max_exceptional_column(), op.n0)
    return c + (op.period + 1) * op.max_positive_offset()


def _explore(
    op: RowFiniteOperator, sources: Sequence[int], cap: int
) -> tuple[Optional[frozenset[int]], Optional[list[int]]]:
    """BFS over concrete indices.

    Returns (closure, None) when the forward-reachable set is finite, else
    (None, path) where path is a concrete index walk from one source to an
    index beyond the escape bound.
    """
    if not sources:
        raise InvalidOperatorError("at least one source row is required")
    for s in sources:
        if s < 1:
            raise InvalidOperatorError(f"row index {s} < 1")
    bound = _escape_bound(op, sources)
    parent: dict[int, Optional[int]] = {s: None for s in sources}
    if len(parent) > cap:
        raise ResourceLimitError(
            f"reachability scan seeded with {len(parent)} rows, above the cap {cap}",
            count=len(parent),
        )
    queue = deque(sorted(set(sources)))
    while queue:
        i = queue.popleft()
        for j, _c in row(op, i).entries:
            if j in parent:
                continue
            parent[j] = i
            if j > bound:
                path = [j]
                u: Optional[int] = i
                while u is not None:
                    path.append(u)
                    u = parent[u]
                path.reverse()
                return None, path
            if len(parent) > cap:
                raise ResourceLimitError(
                    f"reachability scan from rows {sorted(set(sources))!r} visited more than "
                    f"{cap} indices",
                    count=len(parent),
                )
            queue.append(j)
    return frozenset(parent), None


def _certificate_from_path(op: RowFiniteOperator, path: list[int]) -> InfiniteCertificate:
    """Extract stem+cycle from a walk that crossed the escape bound."""
    p = op.period
    # tail after the last visit below n0: purely periodic rows from here on
    tail_start = 0
    for t, idx in enumerate(path):
        if idx < op.n0:
            tail_start = t + 1
    if tail_start >= len(path):  # pragma: no cover - escape needs a periodic climb
        raise AssertionError("escape path ends in the exceptional region")
    # strict running maxima of the tail, pigeonholed by residue
    events: list[int] = []
    best = None
    by_residue: dict[int, int] = {}
    a = b = -1
    for t in range(tail_start, len(path)):
        idx = path[t]
        if best is None or idx > best:
            best = idx
            events.append(t)
            r = idx % p
            if r in by_residue:
                a, b = by_residue[r], t
                break
            by_residue[r] = t
    if b < 0:  # pragma: no cover - guaranteed by the escape-bound analysis
        raise AssertionError("no repeated residue among running maxima")
    stem = tuple((path[t], path[t + 1]) for t in range(a))
    cycle = tuple((path[t], path[t + 1]) for t in range(a, b))
    weight = path[b] - path[a]
    assert weight >= 1 and weight % p == 0
    return InfiniteCertificate(stem=stem, cycle=cycle, weight=weight)


def closure_of_rows(
    op: RowFiniteOperator, sources: Sequence[int], *, cap: int = DEFAULT_SUPPORT_CAP
) -> ReachabilityResult:
    """Joint forward closure of several rows (used for closed submatrices)."""
    closure, path = _explore(op, sources, cap)
    if closure is not None:
        return FiniteClosure(S=closure, m=max(closure))
    assert path is not None
    return _certificate_from_path(op, path)


def dependency_closure(
    op: RowFiniteOperator, n: int, *, cap: int = DEFAULT_SUPPORT_CAP
) -> ReachabilityResult:
    """Decide whether row n's forward-reachable set is finite, with certificate."""
    return closure_of_rows(op, [n], cap=cap)


@dataclass(frozen=True)
class PeriodicRule:
    """Closed form for max(closure(row n)) on high periodic rows.

    For n >= valid_from, the largest column reachable from row n equals
    n + offsets[n mod period].
    """

    valid_from: int
    offsets: tuple[int, ...]

    def max_column_of_row(self, n: int) -> int:
        return n + self.offsets[n % len(self.offsets)]

    def to_json(self) -> dict:
        return {
            "valid_from": self.valid_from,
            "row_max_offsets": {str(r): off for r, off in enumerate(self.offsets)},
        }


@dataclass(frozen=True)
class Generates:
    m_of_n: dict[int, int]
    rule: PeriodicRule

    generates = True

    def to_json(self) -> dict:
        return {
            "verdict": "generates",
            "m_table": {str(n): m for n, m in sorted(self.m_of_n.items())},
            "rule": self.rule.to_json(),
        }


@dataclass(frozen=True)
class FailsStructurally:
    row: int
    certificate: InfiniteCertificate

    generates = False

    def to_json(self) -> dict:
        return {
            "verdict": "fails",
            "row": self.row,
            "witness": self.certificate.to_json(),
        }


GeneratorVerdict = Union[Generates, FailsStructurally]


def _rule_offsets(op: RowFiniteOperator) -> tuple[int, ...]:
    """Longest path-prefix from each residue in the residue quotient.

    Well-defined only when no residue reaches a positive cycle (the
    generating case): longest-path relaxation then stabilizes within p-1
    rounds.
    """
    p = op.period
    res_edges = [
        (r, (r + d) % p, d) for r in range(p) for d, _c in op.periodic_pattern[r]
    ]
    offsets = []
    for start in range(p):
        dist = {start: 0}
        for _ in range(p + 1):
            changed = False
            for u, v, w in res_edges:
                if u in dist:
                    alt = dist[u] + w
                    if v not in dist or alt > dist[v]:
                        dist[v] = alt
                        changed = True
            if not changed:
                break
        else:  # only a positive cycle keeps longest-path relaxation alive
            raise AssertionError("longest-path relaxation failed to stabilize")
        offsets.append(max(0, max(dist.values())))
    return tuple(offsets)


def decide_generation(
    op: RowFiniteOperator,
    rows_to_report: Sequence[int] = (),
    *,
    cap: int = DEFAULT_SUPPORT_CAP,
) -> GeneratorVerdict:
    """Global decision: does the operator generate a strongly continuous semigroup?

    Checks every exceptional row and one full period of periodic rows; this
    covers all rows because a realizable cycle of positive drift can always
    be rotated so that its prefix drifts never go negative, making it
    realizable from a row in the first period.  m_of_n(n) is the largest
    column reachable from any of the rows 1..n.
    """
    checked = list(range(1, op.n0)) + list(range(op.n0, op.n0 + op.period))
    for n in checked:
        result = dependency_closure(op, n, cap=cap)
        if isinstance(result, InfiniteCertificate):
            return FailsStructurally(row=n, certificate=result)

    m_of_n: dict[int, int] = {}
    for n in sorted(set(int(n) for n in rows_to_report)):
        if n < 1:
            raise InvalidOperatorError(f"requested row {n} < 1")
        result = closure_of_rows(op, list(range(1, n + 1)), cap=cap)
        if isinstance(result, InfiniteCertificate):  # pragma: no cover - excluded above
            return FailsStructurally(row=n, certificate=result)
        m_of_n[n] = result.m

    offsets = _rule_offsets(op)
    exceptional_reach = [
        dependency_closure(op, e, cap=cap) for e in range(1, op.n0)
    ]
    m_exc = max((r.m for r in exceptional_reach if isinstance(r, FiniteClosure)), default=0)
    valid_from = max(op.n0 + (op.period - 1) * op.max_descent(), m_exc, op.n0)
    return Generates(m_of_n=m_of_n, rule=PeriodicRule(valid_from=valid_from, offsets=offsets))
