"""Partial ancestral graphs built from finite witness families, DAG-PAG checks and EPYS detection.

A :class:`Pag` carries the d-separation signature of the DAGs it was built
from; its separation semantics are defined by that signature rather than by
separation on mixed graphs.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .graph import Dag, GraphError, Sep, YStructure, d_separation_signature, near_y_dag, y_dag


class SignatureMismatchError(GraphError):
    pass


class Mark(enum.Enum):
    TAIL = "-"
    HEAD = ">"
    CIRCLE = "o"


@dataclass(frozen=True)
class PagEdge:
    """Edge between ``a`` and ``b`` (a < b) with one mark at each end."""

    a: str
    b: str
    mark_a: Mark
    mark_b: Mark

    def render(self) -> str:
        left = {Mark.TAIL: "-", Mark.HEAD: "<", Mark.CIRCLE: "o"}[self.mark_a]
        right = {Mark.TAIL: "-", Mark.HEAD: ">", Mark.CIRCLE: "o"}[self.mark_b]
        # normalize so that arrowheads point right where possible
        if (left, right) in (("<", "-"), ("<", "o")):
            flipped = {"-": "-", "o": "o"}[right] + "->"
            return f"{self.b} {flipped} {self.a}"
        if left == "<" and right == ">":
            return f"{self.a} <-> {self.b}"
        return f"{self.a} {left}-{right} {self.b}"


def _edge(a: str, b: str, mark_a: Mark, mark_b: Mark) -> PagEdge:
    if a > b:
        a, b, mark_a, mark_b = b, a, mark_b, mark_a
    return PagEdge(a, b, mark_a, mark_b)


@dataclass(frozen=True)
class Pag:
    nodes: tuple[str, ...]
    edges: frozenset[PagEdge]
    signature: frozenset[Sep]

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(sorted(self.nodes)))
        seen = set()
        for e in self.edges:
            if e.a == e.b:
                raise GraphError(f"self edge on {e.a}")
            if not (e.a < e.b):
                raise GraphError(f"edge endpoints not canonical: {e.a}, {e.b}")
            if e.a not in self.nodes or e.b not in self.nodes:
                raise GraphError(f"edge {e.a}-{e.b} uses an undeclared node")
            if (e.a, e.b) in seen:
                raise GraphError(f"duplicate edge {e.a}-{e.b}")
            seen.add((e.a, e.b))

    @classmethod
    def from_marks(cls, nodes, marked_edges, signature) -> "Pag":
        """Build from ``(a, b, mark_at_a, mark_at_b)`` tuples."""
        return cls(tuple(nodes), frozenset(_edge(*e) for e in marked_edges), frozenset(signature))

    @classmethod
    def from_dag(cls, g: Dag) -> "Pag":
        return build_pag_from_witnesses([g], g.nodes)

    def edge(self, a: str, b: str) -> Optional[PagEdge]:
        lo, hi = sorted((a, b))
        for e in self.edges:
            if e.a == lo and e.b == hi:
                return e
        return None

    def mark_at(self, at: str, other: str) -> Mark:
        e = self.edge(at, other)
        if e is None:
            raise GraphError(f"{at} and {other} are not adjacent")
        return e.mark_a if e.a == at else e.mark_b

    def circles(self) -> list[tuple[PagEdge, str]]:
        """Circle endpoints as (edge, end-node) in canonical order."""
        out = []
        for e in sorted(self.edges, key=lambda e: (e.a, e.b)):
            if e.mark_a is Mark.CIRCLE:
                out.append((e, e.a))
            if e.mark_b is Mark.CIRCLE:
                out.append((e, e.b))
        return out

    def render(self) -> str:
        return "\n".join(sorted(e.render() for e in self.edges))


def build_pag_from_witnesses(members: Sequence[Dag], observed: Iterable[str]) -> Pag:
    """PAG over ``observed`` relative to a finite list of witness DAGs.

    Members may contain extra (latent) nodes. Every member must induce the same
    d-separation signature over ``observed``.
    """
    members = list(members)
    if not members:
        raise GraphError("need at least one witness DAG")
    obs = tuple(sorted(set(observed)))
    for g in members:
        missing = set(obs) - set(g.nodes)
        if missing:
            raise GraphError(f"observed variables {sorted(missing)} missing from witness {g}")
    sig = d_separation_signature(members[0], obs)
    for g in members[1:]:
        if d_separation_signature(g, obs) != sig:
            raise SignatureMismatchError(f"witness {g} disagrees with {members[0]} over {obs}")

    separated = {(a, b) for a, b, _ in sig}

    def end_mark(at: str, other: str) -> Mark:
        anc = [g.is_ancestor(at, other) for g in members]
        if all(anc):
            return Mark.TAIL
        if not any(anc):
            return Mark.HEAD
        return Mark.CIRCLE

    edges = set()
    for a, b in itertools.combinations(obs, 2):
        if (a, b) in separated:
            continue
        edges.add(PagEdge(a, b, end_mark(a, b), end_mark(b, a)))
    return Pag(obs, frozenset(edges), sig)


def is_dag_pag(p: Pag) -> Optional[Dag]:
    """Return a DAG obtained by resolving the circles of ``p`` that has the
    PAG's d-separation signature, or None when no assignment works.

    Assignments are tried in lexicographic order (tail before head at each
    circle, circles in canonical order); the first hit is returned.
    """
    circles = p.circles()
    for choice in itertools.product((Mark.TAIL, Mark.HEAD), repeat=len(circles)):
        resolved = {(e.a, e.b): [e.mark_a, e.mark_b] for e in p.edges}
        for (e, end), mark in zip(circles, choice):
            resolved[(e.a, e.b)][0 if end == e.a else 1] = mark
        arcs = []
        for (a, b), (ma, mb) in resolved.items():
            if ma is Mark.TAIL and mb is Mark.HEAD:
                arcs.append((a, b))
            elif ma is Mark.HEAD and mb is Mark.TAIL:
                arcs.append((b, a))
            else:
                break
        else:
            try:
                g = Dag(p.nodes, frozenset(arcs))
            except GraphError:
                continue
            if len(p.nodes) < 2 or d_separation_signature(g) == p.signature:
                return g
    return None


def y_signature(w1: str, w2: str, x: str, z: str) -> frozenset[Sep]:
    """The five separations that define an embedded pure Y structure."""

    def sep(a, b, cond):
        a, b = sorted((a, b))
        return (a, b, tuple(sorted(cond)))

    return frozenset(
        {
            sep(w1, w2, ()),
            sep(w1, z, (x,)),
            sep(w1, z, (x, w2)),
            sep(w2, z, (x,)),
            sep(w2, z, (x, w1)),
        }
    )


def epys_holds(sig: Iterable[Sep], variables: Iterable[str]) -> Optional[YStructure]:
    """Labeling (w1, w2, x, z) under which ``sig`` is exactly the EPYS set, else None.

    ``sig`` must be a full signature over the four ``variables`` (all
    conditioning subsets checked).
    """
    vs = sorted(set(variables))
    if len(vs) != 4:
        raise GraphError(f"EPYS check needs exactly 4 variables, got {len(vs)}")
    sig = frozenset(sig)
    for a, b, cond in sig:
        if a not in vs or b not in vs or not set(cond) <= set(vs):
            raise GraphError(f"signature mentions variables outside {vs}")
    for x, z in itertools.permutations(vs, 2):
        w1, w2 = [v for v in vs if v not in (x, z)]
        if sig == y_signature(w1, w2, x, z):
            return YStructure(w1, w2, x, z)
    return None


def y_latent_witness(w1="W1", w2="W2", x="X", z="Z", h1="H1", h2="H2") -> Dag:
    """Y pattern where each W reaches X only through a latent common cause."""
    return Dag(
        (h1, h2, w1, w2, x, z),
        frozenset({(h1, w1), (h1, x), (h2, w2), (h2, x), (x, z)}),
    )


def y_witnesses() -> list[Dag]:
    return [y_dag(), y_latent_witness()]


def y_pag() -> Pag:
    return build_pag_from_witnesses(y_witnesses(), ("W1", "W2", "X", "Z"))


def near_y_pag() -> Pag:
    # the Near-Y DAG is alone in its class over the four observed variables
    return build_pag_from_witnesses([near_y_dag()], ("W1", "W2", "X", "Z"))
