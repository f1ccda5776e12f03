"""Y-structure discovery: tetrad posteriors, Markov blanket estimation and BLCD search."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .bayesnet import Dataset
from .equivalence import dag_list
from .graph import GraphError, YStructure, classify_tetrad
from .scoring import FamilyScoreCache, ScoreParams, normalize_log_scores

CAVEAT = (
    "P(X=>Z|D) is the normalized score of one measured 4-node DAG; reading it as a "
    "probability that also covers hidden-variable structures is an approximation. "
    "Only its large-sample behavior is guaranteed."
)
DEDUP_RULE = "each ordered pair keeps the maximum posterior over all tetrads that produced it"


@dataclass
class DiscoveryReport:
    """Scores of all 543 DAGs over one tetrad.

    ``tetrad`` is sorted; ``posteriors[i]`` belongs to ``dag_list(tetrad)[i]``.
    ``y_arcs`` lists (x, z, P(X=>Z|D)) for all 12 ordered pairs.
    """

    tetrad: tuple[str, str, str, str]
    posteriors: np.ndarray = field(repr=False)
    log_scores: np.ndarray = field(repr=False)
    y_arcs: list[tuple[str, str, float]]
    y_labelings: dict[tuple[str, str], YStructure]

    @property
    def dags(self):
        return dag_list(self.tetrad)

    def argmax(self) -> int:
        return int(np.argmax(self.posteriors))

    def arc_posterior(self, x: str, z: str) -> float:
        for a, b, p in self.y_arcs:
            if (a, b) == (x, z):
                return p
        raise KeyError((x, z))

    def to_json(self, include_posteriors: bool = False) -> dict:
        out = {
            "tetrad": list(self.tetrad),
            "argmax": self.argmax(),
            "argmax_dag": str(self.dags[self.argmax()]),
            "y_arcs": [
                {"x": x, "z": z, "w": sorted((self.y_labelings[(x, z)].w1, self.y_labelings[(x, z)].w2)), "posterior": p}
                for x, z, p in self.y_arcs
            ],
        }
        if include_posteriors:
            out["posteriors"] = [float(p) for p in self.posteriors]
        return out


@dataclass(frozen=True)
class _YIndex:
    # (x, z) -> (dag index, labeling), built once per tetrad name tuple
    entries: dict


_y_index_cache: dict[tuple[str, ...], _YIndex] = {}


def _y_index(tetrad: tuple[str, ...]) -> _YIndex:
    idx = _y_index_cache.get(tetrad)
    if idx is None:
        entries = {}
        for i, g in enumerate(dag_list(tetrad)):
            lab = classify_tetrad(g)
            if isinstance(lab, YStructure):
                key = (lab.x, lab.z)
                if key in entries:
                    raise AssertionError(f"two Y DAGs share sink arc {key}")
                entries[key] = (i, lab)
        if len(entries) != 12:
            raise AssertionError(f"expected 12 Y DAGs, found {len(entries)}")
        idx = _YIndex(entries)
        _y_index_cache[tetrad] = idx
    return idx


def _tetrad_report(tetrad: tuple[str, ...], cache: FamilyScoreCache) -> DiscoveryReport:
    dags = dag_list(tetrad)
    log_scores = np.array([cache.score(g) for g in dags])
    post = normalize_log_scores(log_scores)
    arcs = []
    labels = {}
    for (x, z), (i, lab) in sorted(_y_index(tetrad).entries.items()):
        arcs.append((x, z, float(post[i])))
        labels[(x, z)] = lab
    return DiscoveryReport(tetrad, post, log_scores, arcs, labels)


def y_posterior(d: Dataset, params: ScoreParams = ScoreParams()) -> DiscoveryReport:
    """Posterior over all DAGs on the dataset's four variables and the 12 Y-arc probabilities."""
    if len(d.variables) != 4:
        raise GraphError(f"y_posterior needs exactly 4 variables, got {len(d.variables)}")
    return _tetrad_report(tuple(sorted(d.variables)), FamilyScoreCache(d, params))


@dataclass
class MbEstimate:
    target: str
    members: frozenset[str]
    # (phase, variable, family score after the step)
    trace: list[tuple[str, str, float]]

    def to_json(self) -> dict:
        return {
            "target": self.target,
            "members": sorted(self.members),
            "trace": [{"step": s, "variable": v, "score": sc} for s, v, sc in self.trace],
        }


def estimate_markov_blanket(
    d: Dataset,
    x: str,
    params: ScoreParams = ScoreParams(),
    max_size: int = 6,
    cache: Optional[FamilyScoreCache] = None,
) -> MbEstimate:
    """Greedy forward-backward selection on the BDe score of x's family.

    Forward: repeatedly add the candidate whose addition as a parent of x
    raises the family score most, until nothing improves or ``max_size`` is
    reached. Backward: repeatedly drop the member whose removal raises the
    score most. Ties go to the lexicographically smallest name.
    """
    if x not in d.variables:
        raise GraphError(f"unknown variable {x!r}")
    if len(d.variables) < 4:
        raise GraphError(f"Markov blanket search needs at least 4 variables, got {len(d.variables)}")
    if max_size < 3:
        raise ValueError("max_size must be at least 3")
    if cache is None:
        cache = FamilyScoreCache(d, params)
    candidates = sorted(v for v in d.variables if v != x)
    members: set[str] = set()
    current = cache.family(x, ())
    trace = [("start", "", current)]

    while len(members) < max_size:
        best, best_score = None, current
        for v in candidates:
            if v in members:
                continue
            s = cache.family(x, members | {v})
            if s > best_score:
                best, best_score = v, s
        if best is None:
            break
        members.add(best)
        current = best_score
        trace.append(("add", best, current))

    while members:
        best, best_score = None, current
        for v in sorted(members):
            s = cache.family(x, members - {v})
            if s > best_score:
                best, best_score = v, s
        if best is None:
            break
        members.remove(best)
        current = best_score
        trace.append(("remove", best, current))

    return MbEstimate(x, frozenset(members), trace)


@dataclass
class SearchResult:
    arcs: list[tuple[str, str, float]]
    blankets: dict[str, MbEstimate]
    tetrads: list[tuple[str, ...]]
    reports: dict[tuple[str, ...], DiscoveryReport] = field(repr=False)

    def to_json(self, include_posteriors: bool = False) -> dict:
        return {
            "arcs": [{"x": x, "z": z, "posterior": p} for x, z, p in self.arcs],
            "dedup_rule": DEDUP_RULE,
            "markov_blankets": {v: mb.to_json() for v, mb in sorted(self.blankets.items())},
            "tetrads": [r.to_json(include_posteriors) for _, r in sorted(self.reports.items())],
        }


def _collect(reports, threshold: float) -> list[tuple[str, str, float]]:
    best: dict[tuple[str, str], float] = {}
    for rep in reports:
        for x, z, p in rep.y_arcs:
            if p >= threshold and p > best.get((x, z), -1.0):
                best[(x, z)] = p
    return sorted(((x, z, p) for (x, z), p in best.items()), key=lambda t: (-t[2], t[0], t[1]))


def _check_search_args(d: Dataset, threshold: float) -> None:
    if len(d.variables) < 4:
        raise GraphError(f"search needs at least 4 variables, got {len(d.variables)}")
    if not 0.0 <= threshold <= 1.0:
        raise ValueError(f"threshold must lie in [0, 1], got {threshold}")


def score_tetrads(tetrads, cache: FamilyScoreCache) -> dict[tuple[str, ...], DiscoveryReport]:
    reports = {}
    for t in tetrads:
        t = tuple(sorted(t))
        if t not in reports:
            reports[t] = _tetrad_report(t, cache)
    return reports


def blcd_search(
    d: Dataset,
    params: ScoreParams = ScoreParams(),
    threshold: float = 0.5,
    max_mb_size: int = 6,
) -> SearchResult:
    """Markov-blanket-guided tetrad search.

    For each variable x, every 3-subset of its estimated blanket joins x to form
    a tetrad; all 12 Y labelings of each tetrad are scored. Arcs with posterior
    at least ``threshold`` are kept, deduplicated per ordered pair by maximum.
    """
    _check_search_args(d, threshold)
    cache = FamilyScoreCache(d, params)
    blankets = {}
    tetrads = []
    for x in sorted(d.variables):
        mb = estimate_markov_blanket(d, x, params, max_mb_size, cache)
        blankets[x] = mb
        for trio in itertools.combinations(sorted(mb.members), 3):
            t = tuple(sorted((x, *trio)))
            if t not in tetrads:
                tetrads.append(t)
    reports = score_tetrads(tetrads, cache)
    return SearchResult(_collect(reports.values(), threshold), blankets, tetrads, reports)


def exhaustive_search(d: Dataset, params: ScoreParams = ScoreParams(), threshold: float = 0.5) -> SearchResult:
    """Score every tetrad of the domain."""
    _check_search_args(d, threshold)
    cache = FamilyScoreCache(d, params)
    tetrads = list(itertools.combinations(sorted(d.variables), 4))
    reports = score_tetrads(tetrads, cache)
    return SearchResult(_collect(reports.values(), threshold), {}, tetrads, reports)
