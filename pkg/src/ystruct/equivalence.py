"""Exhaustive DAG enumeration and Markov equivalence (Verma-Pearl criterion)."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, Sequence

from .graph import Dag, GraphError, unshielded_colliders

MAX_ENUMERATE = 5
MAX_CLASSES = 4


def _acyclic(n: int, edges: list[tuple[int, int]]) -> bool:
    children = [0] * n
    for p, c in edges:
        children[p] |= 1 << c
    # Kahn's algorithm on bitmasks
    indeg = [0] * n
    for p, c in edges:
        indeg[c] += 1
    ready = [v for v in range(n) if indeg[v] == 0]
    seen = 0
    while ready:
        v = ready.pop()
        seen += 1
        m = children[v]
        while m:
            c = (m & -m).bit_length() - 1
            m &= m - 1
            indeg[c] -= 1
            if indeg[c] == 0:
                ready.append(c)
    return seen == n


def enumerate_dags(node_names: Sequence[str]) -> Iterator[Dag]:
    """Yield every labeled DAG on ``node_names`` exactly once.

    Node pairs (i, j), i < j, are taken in adjacency-matrix order; each pair is
    absent, i->j or j->i, and the combinations are walked lexicographically in
    that order. Cyclic combinations are skipped.
    """
    names = tuple(node_names)
    n = len(names)
    if not 1 <= n <= MAX_ENUMERATE:
        raise GraphError(f"enumeration supports 1..{MAX_ENUMERATE} nodes, got {n}")
    if len(set(names)) != n:
        raise GraphError("duplicate node names")
    pairs = list(itertools.combinations(range(n), 2))
    for states in itertools.product((0, 1, 2), repeat=len(pairs)):
        edges = []
        for (i, j), s in zip(pairs, states):
            if s == 1:
                edges.append((i, j))
            elif s == 2:
                edges.append((j, i))
        if _acyclic(n, edges):
            yield Dag(names, frozenset((names[p], names[c]) for p, c in edges))


@lru_cache(maxsize=16)
def dag_list(node_names: tuple[str, ...]) -> tuple[Dag, ...]:
    """Cached, indexable form of :func:`enumerate_dags`."""
    return tuple(enumerate_dags(node_names))


def count_dags(n: int) -> int:
    """Number of labeled DAGs on ``n`` nodes (Robinson's recurrence)."""
    from math import comb

    a = [1]
    for m in range(1, n + 1):
        a.append(sum((-1) ** (k + 1) * comb(m, k) * 2 ** (k * (m - k)) * a[m - k] for k in range(1, m + 1)))
    return a[n]


def equivalence_key(g: Dag) -> tuple:
    return (frozenset(g.nodes), g.skeleton(), tuple(unshielded_colliders(g)))


def markov_equivalent(g1: Dag, g2: Dag) -> bool:
    """Same vertices, same adjacencies, same unshielded colliders."""
    if set(g1.nodes) != set(g2.nodes):
        raise GraphError("markov_equivalent needs DAGs over the same nodes")
    return g1.skeleton() == g2.skeleton() and unshielded_colliders(g1) == unshielded_colliders(g2)


@dataclass(frozen=True)
class EquivClass:
    members: tuple[Dag, ...]
    # enumeration indices of the members, ascending
    indices: tuple[int, ...]

    @property
    def representative(self) -> Dag:
        return self.members[0]

    def __len__(self):
        return len(self.members)

    def __contains__(self, g):
        return g in self.members


def equivalence_classes(node_names: Sequence[str]) -> list[EquivClass]:
    """Partition all DAGs on ``node_names`` into Markov equivalence classes.

    The representative of a class is its member with the smallest enumeration
    index; classes are ordered by that index.
    """
    names = tuple(node_names)
    if not 1 <= len(names) <= MAX_CLASSES:
        raise GraphError(f"equivalence_classes supports 1..{MAX_CLASSES} nodes, got {len(names)}")
    groups: dict[tuple, list[int]] = {}
    dags = dag_list(names)
    for i, g in enumerate(dags):
        groups.setdefault(equivalence_key(g), []).append(i)
    classes = [EquivClass(tuple(dags[i] for i in idx), tuple(idx)) for idx in groups.values()]
    classes.sort(key=lambda c: c.indices[0])
    return classes


def class_of(g: Dag) -> EquivClass:
    """The equivalence class containing ``g`` among DAGs on its node set."""
    for cls in equivalence_classes(g.nodes):
        if g in cls:
            return cls
    raise GraphError(f"{g} not found in enumeration")
