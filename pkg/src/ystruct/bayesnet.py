"""Discrete complete-table Bayesian networks, exact joints, sampling and datasets."""

from __future__ import annotations

import csv
import itertools
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from .graph import Dag, GraphError, d_separated

MAX_JOINT_CELLS = 2**24


class DataFormatError(ValueError):
    """Malformed network, graph or dataset file, or inconsistent data."""


@dataclass(frozen=True, eq=False)
class DiscreteBayesNet:
    """A DAG with one conditional probability table per node.

    ``cpts[v]`` has shape ``(q, r)``: one row per parent configuration, parents
    taken in ``dag.parents(v)`` order with the first parent most significant.
    """

    dag: Dag
    arities: Mapping[str, int]
    cpts: Mapping[str, np.ndarray]
    latent: frozenset[str] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "arities", {v: int(self.arities[v]) for v in self.dag.nodes})
        object.__setattr__(self, "latent", frozenset(self.latent))
        cpts = {}
        for v in self.dag.nodes:
            r = self.arities[v]
            if r < 2:
                raise GraphError(f"arity of {v} must be >= 2, got {r}")
            q = math.prod(self.arities[p] for p in self.dag.parents(v))
            table = np.asarray(self.cpts[v], dtype=float)
            if table.shape != (q, r):
                raise GraphError(f"CPT for {v} has shape {table.shape}, expected {(q, r)}")
            if (table < 0).any() or np.abs(table.sum(axis=1) - 1.0).max() > 1e-12:
                raise GraphError(f"CPT rows for {v} are not probability vectors")
            table = table.copy()
            table.flags.writeable = False
            cpts[v] = table
        object.__setattr__(self, "cpts", cpts)
        unknown = self.latent - set(self.dag.nodes)
        if unknown:
            raise GraphError(f"latent flags on unknown nodes {sorted(unknown)}")

    @property
    def observed(self) -> tuple[str, ...]:
        return tuple(v for v in self.dag.nodes if v not in self.latent)

    def with_cpt(self, node: str, table) -> "DiscreteBayesNet":
        cpts = dict(self.cpts)
        cpts[node] = np.asarray(table, dtype=float)
        return DiscreteBayesNet(self.dag, self.arities, cpts, self.latent)


@dataclass(frozen=True, eq=False)
class JointTable:
    variables: tuple[str, ...]
    probs: np.ndarray

    @property
    def arities(self) -> tuple[int, ...]:
        return tuple(self.probs.shape)

    def total(self) -> float:
        return float(self.probs.sum())


@dataclass(eq=False)
class Dataset:
    """``m`` complete discrete cases; ``data[i, j]`` is the category of variable j in case i."""

    variables: tuple[str, ...]
    arities: tuple[int, ...]
    data: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.variables = tuple(self.variables)
        self.arities = tuple(int(r) for r in self.arities)
        if len(self.variables) != len(self.arities):
            raise DataFormatError("variables and arities differ in length")
        if len(set(self.variables)) != len(self.variables):
            raise DataFormatError("duplicate variable names")
        data = np.asarray(self.data)
        if data.size == 0:
            data = data.reshape(0, len(self.variables))
        if data.ndim != 2 or data.shape[1] != len(self.variables):
            raise DataFormatError(f"data shape {data.shape} does not match {len(self.variables)} variables")
        if not np.issubdtype(data.dtype, np.integer):
            raise DataFormatError("dataset values must be integer category codes")
        data = data.astype(np.int64)
        for j, (v, r) in enumerate(zip(self.variables, self.arities)):
            col = data[:, j]
            if col.size and (col.min() < 0 or col.max() >= r):
                raise DataFormatError(f"values of {v} fall outside [0, {r})")
        data.flags.writeable = False
        self.data = data

    @property
    def m(self) -> int:
        return self.data.shape[0]

    def arity(self, v: str) -> int:
        return self.arities[self.variables.index(v)]

    def column(self, v: str) -> np.ndarray:
        try:
            return self.data[:, self.variables.index(v)]
        except ValueError:
            raise DataFormatError(f"variable {v!r} not in dataset") from None

    def select(self, variables: Sequence[str]) -> "Dataset":
        idx = []
        for v in variables:
            if v not in self.variables:
                raise DataFormatError(f"variable {v!r} not in dataset")
            idx.append(self.variables.index(v))
        return Dataset(tuple(variables), tuple(self.arities[i] for i in idx), self.data[:, idx])

    def head(self, m: int) -> "Dataset":
        return Dataset(self.variables, self.arities, self.data[:m])


def random_parameterization(
    dag: Dag,
    arities: Mapping[str, int] | int = 2,
    seed=None,
    concentration: float = 1.0,
    latent: Iterable[str] = (),
) -> DiscreteBayesNet:
    """Draw every CPT row from a symmetric Dirichlet(``concentration``)."""
    if not concentration > 0:
        raise ValueError(f"concentration must be positive, got {concentration}")
    if isinstance(arities, int):
        arities = {v: arities for v in dag.nodes}
    rng = np.random.default_rng(seed)
    cpts = {}
    for v in dag.nodes:
        r = int(arities[v])
        if r < 2:
            raise ValueError(f"arity of {v} must be >= 2")
        q = math.prod(int(arities[p]) for p in dag.parents(v))
        cpts[v] = rng.dirichlet(np.full(r, concentration), size=q)
    return DiscreteBayesNet(dag, arities, cpts, frozenset(latent))


def exact_joint(net: DiscreteBayesNet) -> JointTable:
    nodes = net.dag.nodes
    shape = tuple(net.arities[v] for v in nodes)
    if math.prod(shape) > MAX_JOINT_CELLS:
        raise ValueError(f"joint table with {math.prod(shape)} cells exceeds the {MAX_JOINT_CELLS} guard")
    pos = {v: i for i, v in enumerate(nodes)}
    joint = np.ones(shape)
    for v in nodes:
        fam = list(net.dag.parents(v)) + [v]
        factor = net.cpts[v].reshape([net.arities[u] for u in fam])
        order = sorted(range(len(fam)), key=lambda i: pos[fam[i]])
        factor = factor.transpose(order)
        bshape = [1] * len(nodes)
        for u in fam:
            bshape[pos[u]] = net.arities[u]
        joint = joint * factor.reshape(bshape)
    return JointTable(nodes, joint)


def marginalize(joint: JointTable, keep: Iterable[str]) -> JointTable:
    """Sum out everything but ``keep``; the result keeps the joint's variable order."""
    keep = set(keep)
    unknown = keep - set(joint.variables)
    if unknown:
        raise GraphError(f"unknown variables {sorted(unknown)}")
    drop = tuple(i for i, v in enumerate(joint.variables) if v not in keep)
    kept = tuple(v for v in joint.variables if v in keep)
    return JointTable(kept, joint.probs.sum(axis=drop) if drop else joint.probs.copy())


def forward_sample(net: DiscreteBayesNet, m: int, seed=None) -> Dataset:
    """Ancestral sampling of ``m`` cases; latent columns are dropped."""
    if m < 0:
        raise ValueError("sample size must be nonnegative")
    rng = np.random.default_rng(seed)
    values: dict[str, np.ndarray] = {}
    for v in net.dag.topological_order:
        parents = net.dag.parents(v)
        cpt = net.cpts[v]
        if parents:
            rows = np.ravel_multi_index(
                tuple(values[p] for p in parents), tuple(net.arities[p] for p in parents)
            )
        else:
            rows = np.zeros(m, dtype=np.int64)
        cum = np.cumsum(cpt, axis=1)
        u = rng.random(m)
        draw = (cum[rows] <= u[:, None]).sum(axis=1)
        values[v] = np.minimum(draw, net.arities[v] - 1)
    obs = net.observed
    data = np.column_stack([values[v] for v in obs]) if obs and m else np.zeros((m, len(obs)), dtype=np.int64)
    return Dataset(obs, tuple(net.arities[v] for v in obs), data.astype(np.int64))


def dependence_gap(joint: JointTable, a: str, b: str, cond: Iterable[str] = ()) -> float:
    """max |P(a,b|c) - P(a|c) P(b|c)| over configurations with P(c) > 0."""
    cond = tuple(cond)
    names = (a, b, *cond)
    if len(set(names)) != len(names):
        raise GraphError("a, b and the conditioning set must be disjoint")
    sub = marginalize(joint, names)
    # reorder axes to (a, b, *cond)
    axes = [sub.variables.index(v) for v in names]
    p = sub.probs.transpose(axes)
    ra, rb = p.shape[0], p.shape[1]
    p = p.reshape(ra, rb, -1)
    pc = p.sum(axis=(0, 1))
    mask = pc > 0
    if not mask.any():
        return 0.0
    p = p[:, :, mask] / pc[mask]
    pa = p.sum(axis=1, keepdims=True)
    pb = p.sum(axis=0, keepdims=True)
    return float(np.abs(p - pa * pb).max())


def independent_in_dist(joint: JointTable, a: str, b: str, cond: Iterable[str] = (), tol: float = 1e-9) -> bool:
    return dependence_gap(joint, a, b, cond) <= tol


def perfect_map_violations(net: DiscreteBayesNet, observed: Optional[Iterable[str]] = None, tol: float = 1e-6):
    """(a, b, C, d_separated, gap) for every statement where the graph and the
    marginal distribution over ``observed`` disagree."""
    obs = sorted(net.observed if observed is None else set(observed))
    unknown = set(obs) - set(net.dag.nodes)
    if unknown:
        raise GraphError(f"unknown variables {sorted(unknown)}")
    joint = marginalize(exact_joint(net), obs)
    bad = []
    for a, b in itertools.combinations(obs, 2):
        rest = [v for v in obs if v not in (a, b)]
        for k in range(len(rest) + 1):
            for cond in itertools.combinations(rest, k):
                sep = d_separated(net.dag, a, b, cond)
                gap = dependence_gap(joint, a, b, cond)
                if sep != (gap <= tol):
                    bad.append((a, b, cond, sep, gap))
    return bad


def verify_perfect_map(net: DiscreteBayesNet, observed: Optional[Iterable[str]] = None, tol: float = 1e-6) -> bool:
    """True iff independence in the marginal over ``observed`` coincides with d-separation in the net's DAG."""
    return not perfect_map_violations(net, observed, tol)


# --- file formats ---------------------------------------------------------


def _row_key(config: Sequence[int]) -> str:
    return ",".join(str(c) for c in config)


def net_to_json(net: DiscreteBayesNet) -> dict:
    cpts = {}
    for v in net.dag.nodes:
        parents = net.dag.parents(v)
        configs = itertools.product(*(range(net.arities[p]) for p in parents))
        cpts[v] = {
            "parents": list(parents),
            "rows": {_row_key(c): [float(x) for x in row] for c, row in zip(configs, net.cpts[v])},
        }
    return {
        "variables": [{"name": v, "arity": net.arities[v], "latent": v in net.latent} for v in net.dag.nodes],
        "edges": [list(e) for e in net.dag.sorted_edges()],
        "cpts": cpts,
    }


def _parse_graph_doc(doc) -> tuple[Dag, dict[str, int], frozenset[str]]:
    try:
        variables = doc["variables"]
        names = [str(v["name"]) for v in variables]
        arities = {str(v["name"]): int(v.get("arity", 2)) for v in variables}
        latent = frozenset(str(v["name"]) for v in variables if v.get("latent", False))
        edges = [(str(p), str(c)) for p, c in doc.get("edges", [])]
    except (KeyError, TypeError, ValueError) as exc:
        raise DataFormatError(f"malformed graph document: {exc}") from None
    try:
        dag = Dag(tuple(names), frozenset(edges))
    except GraphError as exc:
        raise DataFormatError(str(exc)) from None
    return dag, arities, latent


def net_from_json(doc) -> DiscreteBayesNet:
    dag, arities, latent = _parse_graph_doc(doc)
    if "cpts" not in doc:
        raise DataFormatError("network document has no cpts")
    cpts = {}
    for v in dag.nodes:
        try:
            entry = doc["cpts"][v]
            parents = tuple(entry["parents"])
            rows = entry["rows"]
        except (KeyError, TypeError) as exc:
            raise DataFormatError(f"missing CPT for {v}: {exc}") from None
        if parents != dag.parents(v):
            raise DataFormatError(f"CPT parents for {v} are {list(parents)}, graph says {list(dag.parents(v))}")
        table = []
        for c in itertools.product(*(range(arities[p]) for p in parents)):
            key = _row_key(c)
            if key not in rows:
                raise DataFormatError(f"CPT for {v} lacks row {key!r}")
            table.append(rows[key])
        cpts[v] = np.array(table, dtype=float).reshape(len(table), -1)
    try:
        return DiscreteBayesNet(dag, arities, cpts, latent)
    except GraphError as exc:
        raise DataFormatError(str(exc)) from None


def _read_json(path) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise DataFormatError(f"{path}: invalid JSON ({exc})") from None


def load_graph(path) -> tuple[Dag, dict[str, int], frozenset[str]]:
    """Read the graph part (variables, edges) of a network file; CPTs are ignored."""
    return _parse_graph_doc(_read_json(path))


def load_net(path) -> DiscreteBayesNet:
    return net_from_json(_read_json(path))


def save_net(net: DiscreteBayesNet, path) -> None:
    Path(path).write_text(json.dumps(net_to_json(net), indent=2) + "\n")


def write_csv(d: Dataset, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(d.variables)
        w.writerows(d.data.tolist())


def read_csv(path, arities: Optional[Mapping[str, int]] = None) -> Dataset:
    """Read a dataset; arities not given default to max(2, largest code + 1)."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or not rows[0]:
        raise DataFormatError(f"{path}: missing header row")
    header = [h.strip() for h in rows[0]]
    body = [r for r in rows[1:] if r]
    data = np.zeros((len(body), len(header)), dtype=np.int64)
    for i, r in enumerate(body):
        if len(r) != len(header):
            raise DataFormatError(f"{path}: row {i + 2} has {len(r)} cells, header has {len(header)}")
        for j, cell in enumerate(r):
            try:
                data[i, j] = int(cell.strip())
            except ValueError:
                raise DataFormatError(f"{path}: row {i + 2}, column {header[j]}: {cell!r} is not a category code") from None
    if (data < 0).any():
        raise DataFormatError(f"{path}: negative category code")
    arity_list = []
    for j, v in enumerate(header):
        observed_max = int(data[:, j].max()) + 1 if len(body) else 0
        r = max(2, observed_max)
        if arities is not None and v in arities:
            if observed_max > arities[v]:
                raise DataFormatError(f"{path}: values of {v} exceed declared arity {arities[v]}")
            r = int(arities[v])
        arity_list.append(r)
    return Dataset(tuple(header), tuple(arity_list), data)
