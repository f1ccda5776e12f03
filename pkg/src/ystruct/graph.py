"""Labeled DAGs, d-separation, Markov blankets and four-node pattern tests."""

from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, NamedTuple, Optional, Union

# A d-separation statement (a, b, C) with a < b and C a sorted tuple.
Sep = tuple[str, str, tuple[str, ...]]


class GraphError(ValueError):
    """Invalid graph, unknown node, or violated query precondition."""


class CycleError(GraphError):
    pass


@dataclass(frozen=True)
class Dag:
    """Directed acyclic graph over named variables.

    ``nodes`` keeps the declaration order; ``edges`` holds (parent, child) pairs.
    """

    nodes: tuple[str, ...]
    edges: frozenset[tuple[str, str]]

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(self, "edges", frozenset(tuple(e) for e in self.edges))
        if len(set(self.nodes)) != len(self.nodes):
            raise GraphError(f"duplicate node names in {self.nodes}")
        known = set(self.nodes)
        for p, c in self.edges:
            if p not in known or c not in known:
                raise GraphError(f"edge {p}->{c} uses an undeclared node")
            if p == c:
                raise GraphError(f"self-loop on {p}")
        if self._topological_order() is None:
            raise CycleError(f"edges contain a directed cycle: {sorted(self.edges)}")

    @classmethod
    def from_edges(cls, edges: Iterable[tuple[str, str]], nodes: Optional[Iterable[str]] = None) -> "Dag":
        edges = [tuple(e) for e in edges]
        if nodes is None:
            seen: dict[str, None] = {}
            for p, c in edges:
                seen.setdefault(p)
                seen.setdefault(c)
            nodes = list(seen)
        return cls(tuple(nodes), frozenset(edges))

    @cached_property
    def _index(self) -> dict[str, int]:
        return {v: i for i, v in enumerate(self.nodes)}

    @cached_property
    def _parents(self) -> dict[str, tuple[str, ...]]:
        par: dict[str, list[str]] = {v: [] for v in self.nodes}
        for p, c in self.edges:
            par[c].append(p)
        return {v: tuple(sorted(ps, key=self._index.__getitem__)) for v, ps in par.items()}

    @cached_property
    def _children(self) -> dict[str, tuple[str, ...]]:
        ch: dict[str, list[str]] = {v: [] for v in self.nodes}
        for p, c in self.edges:
            ch[p].append(c)
        return {v: tuple(sorted(cs, key=self._index.__getitem__)) for v, cs in ch.items()}

    def _topological_order(self) -> Optional[list[str]]:
        # Kahn's algorithm releasing the lowest declaration index first, so the
        # order never depends on set iteration (and hence on string hashing)
        idx = {v: i for i, v in enumerate(self.nodes)}
        indeg = [0] * len(self.nodes)
        children: list[list[int]] = [[] for _ in self.nodes]
        for p, c in self.edges:
            indeg[idx[c]] += 1
            children[idx[p]].append(idx[c])
        ready = [i for i, d in enumerate(indeg) if d == 0]
        heapq.heapify(ready)
        order = []
        while ready:
            i = heapq.heappop(ready)
            order.append(self.nodes[i])
            for c in children[i]:
                indeg[c] -= 1
                if indeg[c] == 0:
                    heapq.heappush(ready, c)
        return order if len(order) == len(self.nodes) else None

    @cached_property
    def topological_order(self) -> tuple[str, ...]:
        return tuple(self._topological_order())

    def check_node(self, v: str) -> None:
        if v not in self._index:
            raise GraphError(f"unknown node {v!r}")

    def parents(self, v: str) -> tuple[str, ...]:
        """Parents of ``v`` in node declaration order."""
        self.check_node(v)
        return self._parents[v]

    def children(self, v: str) -> tuple[str, ...]:
        self.check_node(v)
        return self._children[v]

    def adjacent(self, a: str, b: str) -> bool:
        return (a, b) in self.edges or (b, a) in self.edges

    def ancestors(self, v: str) -> frozenset[str]:
        """Proper ancestors of ``v``."""
        self.check_node(v)
        seen: set[str] = set()
        stack = list(self._parents[v])
        while stack:
            u = stack.pop()
            if u not in seen:
                seen.add(u)
                stack.extend(self._parents[u])
        return frozenset(seen)

    def descendants(self, v: str) -> frozenset[str]:
        """Proper descendants of ``v``."""
        self.check_node(v)
        seen: set[str] = set()
        stack = list(self._children[v])
        while stack:
            u = stack.pop()
            if u not in seen:
                seen.add(u)
                stack.extend(self._children[u])
        return frozenset(seen)

    def is_ancestor(self, a: str, b: str) -> bool:
        return a in self.ancestors(b)

    def skeleton(self) -> frozenset[frozenset[str]]:
        return frozenset(frozenset(e) for e in self.edges)

    def sorted_edges(self) -> list[tuple[str, str]]:
        return sorted(self.edges, key=lambda e: (self._index[e[0]], self._index[e[1]]))

    def rename(self, mapping: dict[str, str]) -> "Dag":
        return Dag(
            tuple(mapping.get(v, v) for v in self.nodes),
            frozenset((mapping.get(p, p), mapping.get(c, c)) for p, c in self.edges),
        )

    def __str__(self):
        if not self.edges:
            return "{" + ", ".join(self.nodes) + "}"
        return ", ".join(f"{p}->{c}" for p, c in self.sorted_edges())


def _reachable(g: Dag, source: str, cond: frozenset[str]) -> set[str]:
    """Nodes reachable from ``source`` along active trails given ``cond``.

    Reachability over (node, direction) states; each state is visited once so
    the cost is linear in the graph size.
    """
    # ancestors of the conditioning set, including itself
    cond_anc: set[str] = set()
    stack = list(cond)
    while stack:
        v = stack.pop()
        if v not in cond_anc:
            cond_anc.add(v)
            stack.extend(g._parents[v])

    # "up": arrived from a child (or start); "down": arrived from a parent
    todo = [(source, "up")]
    visited: set[tuple[str, str]] = set()
    reached: set[str] = set()
    while todo:
        v, direction = todo.pop()
        if (v, direction) in visited:
            continue
        visited.add((v, direction))
        if v not in cond:
            reached.add(v)
        if direction == "up":
            if v not in cond:
                todo.extend((p, "up") for p in g._parents[v])
                todo.extend((c, "down") for c in g._children[v])
        else:
            if v not in cond:
                todo.extend((c, "down") for c in g._children[v])
            if v in cond_anc:
                todo.extend((p, "up") for p in g._parents[v])
    return reached


def d_separated(g: Dag, a: str, b: str, c: Iterable[str] = ()) -> bool:
    """True iff ``a`` and ``b`` are d-separated given ``c`` in ``g``."""
    cond = frozenset(c)
    for v in (a, b, *cond):
        g.check_node(v)
    if a == b:
        raise GraphError("d-separation query needs two distinct nodes")
    if a in cond or b in cond:
        raise GraphError(f"query endpoints must not be conditioned on: {a}, {b} vs {sorted(cond)}")
    return b not in _reachable(g, a, cond)


def d_separation_signature(g: Dag, variables: Optional[Iterable[str]] = None) -> frozenset[Sep]:
    """All d-separations among ``variables`` (default: every node of ``g``).

    Nodes of ``g`` outside ``variables`` act as latent: they carry paths but
    never show up in a statement.
    """
    vs = sorted(g.nodes if variables is None else set(variables))
    missing = set(vs) - set(g.nodes)
    if missing:
        raise GraphError(f"variables not in graph: {sorted(missing)}")
    if len(vs) < 2:
        raise GraphError("a signature needs at least two variables")
    out = set()
    for a, b in itertools.combinations(vs, 2):
        rest = [v for v in vs if v != a and v != b]
        for k in range(len(rest) + 1):
            for cond in itertools.combinations(rest, k):
                if d_separated(g, a, b, cond):
                    out.add((a, b, cond))
    return frozenset(out)


def graphical_markov_blanket(g: Dag, x: str) -> frozenset[str]:
    g.check_node(x)
    mb = set(g.parents(x)) | set(g.children(x))
    for c in g.children(x):
        mb.update(g.parents(c))
    mb.discard(x)
    return frozenset(mb)


def unshielded_colliders(g: Dag) -> list[tuple[str, str, str]]:
    """Triples (a, x, b), a < b, with a->x<-b and a, b non-adjacent; sorted."""
    out = []
    for x in g.nodes:
        for a, b in itertools.combinations(sorted(g.parents(x)), 2):
            if not g.adjacent(a, b):
                out.append((a, x, b))
    return sorted(out)


class YStructure(NamedTuple):
    w1: str
    w2: str
    x: str
    z: str


class NearY(NamedTuple):
    w1: str
    w2: str
    x: str
    z: str


def classify_tetrad(g: Dag) -> Union[YStructure, NearY, None]:
    """Classify a four-node DAG as a Y structure, a Near-Y structure, or neither (None).

    For Near-Y, ``w1`` is the W node carrying the extra arc into ``z``.
    Otherwise the labeling has ``w1 < w2``.
    """
    if len(g.nodes) != 4:
        raise GraphError(f"classify_tetrad needs exactly 4 nodes, got {len(g.nodes)}")
    n_edges = len(g.edges)
    if n_edges not in (3, 4):
        return None
    for x in g.nodes:
        ps = g.parents(x)
        cs = g.children(x)
        if len(ps) != 2 or len(cs) != 1:
            continue
        w1, w2 = sorted(ps)
        z = cs[0]
        core = {(w1, x), (w2, x), (x, z)}
        extra = g.edges - core
        if len(g.edges & core) != 3:
            continue
        if not extra:
            return YStructure(w1, w2, x, z)
        if extra == {(w1, z)}:
            return NearY(w1, w2, x, z)
        if extra == {(w2, z)}:
            return NearY(w2, w1, x, z)
    return None


def y_dag(w1="W1", w2="W2", x="X", z="Z") -> Dag:
    return Dag((w1, w2, x, z), frozenset({(w1, x), (w2, x), (x, z)}))


def near_y_dag(w1="W1", w2="W2", x="X", z="Z") -> Dag:
    return Dag((w1, w2, x, z), frozenset({(w1, x), (w2, x), (x, z), (w1, z)}))
