"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

The lines are collected into an "acceptance criteria" section of the
terminal summary; ``-s`` also shows them inline.
"""
import itertools
import math
import time

import numpy as np
import pytest

from oracles import all_queries, brute_force_dag_count, dsep_by_paths, random_dag
from ystruct.bayesnet import dependence_gap, exact_joint, forward_sample, random_parameterization
from ystruct.equivalence import (
    class_of,
    count_dags,
    dag_list,
    enumerate_dags,
    equivalence_classes,
    markov_equivalent,
)
from ystruct.experiment import ExperimentConfig, run_convergence_experiment
from ystruct.fixtures import OBSERVED, get_fixture
from ystruct.graph import YStructure, classify_tetrad, d_separated, d_separation_signature, near_y_dag, y_dag
from ystruct.pag import epys_holds
from ystruct.scoring import FamilyScoreCache

M = 50_000
REPLICATES = 20
NEEDED = 18


@pytest.fixture
def report(acceptance_log):
    def emit(n, name, ok, detail):
        line = f"criterion {n:2d} {'PASS' if ok else 'FAIL'}  {name}: {detail}"
        acceptance_log.append(line)
        print(line)
        assert ok, line

    return emit


def sweep(generator, **kwargs):
    cfg = ExperimentConfig(generator=generator, replicates=REPLICATES, sample_sizes=[M], **kwargs)
    return run_convergence_experiment(cfg)["records"]


def test_01_enumeration_counts(report):
    t0 = time.perf_counter()
    counts = [sum(1 for _ in enumerate_dags([f"V{i}" for i in range(n)])) for n in range(1, 5)]
    elapsed = time.perf_counter() - t0
    expected = [brute_force_dag_count(1), brute_force_dag_count(2), brute_force_dag_count(3), count_dags(4)]
    ok = counts == expected == [1, 3, 25, 543] and elapsed < 1.0
    report(1, "enumeration counts", ok, f"counts={counts} in {elapsed:.3f}s")


def test_02_equivalence_partition(report):
    t0 = time.perf_counter()
    classes = equivalence_classes(OBSERVED)
    dags = dag_list(OBSERVED)
    sigs = [d_separation_signature(g) for g in dags]
    mismatches = sum(
        markov_equivalent(dags[i], dags[j]) != (sigs[i] == sigs[j])
        for i, j in itertools.combinations(range(len(dags)), 2)
    )
    elapsed = time.perf_counter() - t0
    sizes = sum(len(c.members) for c in classes)
    ok = len(classes) == 185 and sizes == 543 and mismatches == 0 and elapsed < 120
    report(2, "equivalence partition", ok,
           f"{len(classes)} classes, {sizes} DAGs, {mismatches} verdict mismatches over "
           f"{math.comb(543, 2)} pairs in {elapsed:.1f}s")


def test_03_y_structures(report):
    dags = dag_list(OBSERVED)
    y_idx = {i for i, g in enumerate(dags) if isinstance(classify_tetrad(g), YStructure)}
    epys_idx = {i for i, g in enumerate(dags) if epys_holds(d_separation_signature(g), OBSERVED) is not None}
    size = len(class_of(y_dag()).members)
    ok = size == 1 and len(y_idx) == 12 and epys_idx == y_idx
    report(3, "Y class and EPYS", ok, f"class size {size}, {len(y_idx)} Y DAGs, EPYS on {len(epys_idx)} (same set: {epys_idx == y_idx})")


def test_04_score_equivalence(report):
    classes = equivalence_classes(OBSERVED)
    worst = 0.0
    for i in range(20):
        rng = np.random.default_rng([4, i])
        g = random_dag(rng, 4, p_edge=0.5).rename({f"V{k}": v for k, v in enumerate(OBSERVED)})
        net = random_parameterization(g, {v: int(rng.integers(2, 4)) for v in g.nodes}, rng)
        cache = FamilyScoreCache(forward_sample(net, 500, rng))
        for cls in classes:
            s = [cache.score(m) for m in cls.members]
            worst = max(worst, max(s) - min(s))
    report(4, "score equivalence", worst < 1e-9, f"max intra-class spread {worst:.3e} over {len(classes)} classes x 20 datasets")


def test_05_y_net_convergence(report):
    t0 = time.perf_counter()
    recs = sweep("y_net")
    elapsed = time.perf_counter() - t0
    argmax = sum(r["argmax_is_y"] for r in recs)
    high = sum(r["p_xz"] > 0.9 for r in recs)
    ok = argmax >= NEEDED and high >= NEEDED and elapsed < 300
    report(5, "Y net convergence", ok, f"Y argmax {argmax}/20, P(X=>Z)>0.9 {high}/20 in {elapsed:.1f}s")


def test_06_latent_confounder(report):
    recs = sweep("latent_confounder_net")
    low = sum(r["p_xz"] < 0.1 for r in recs)
    not_y = sum(not r["argmax_is_y"] for r in recs)
    ok = low >= NEEDED and not_y >= NEEDED
    report(6, "latent confounder control", ok, f"P(X=>Z)<0.1 {low}/20, Y not argmax {not_y}/20")


def test_07_near_y(report):
    recs = sweep("near_y_net")
    near = sum(r["argmax_dag"] == str(near_y_dag()) for r in recs)
    y_low = sum(r["p_y_total"] < 0.1 for r in recs)
    ok = near >= NEEDED and y_low >= NEEDED
    report(7, "near-Y control", ok, f"near-Y argmax {near}/20, total Y posterior <0.1 {y_low}/20")


def test_08_epys_with_latents(report):
    fixture = get_fixture("epys_latent_net")
    assert len(fixture.dag.nodes) == 6
    recs = sweep("epys_latent_net", blcd=True, blcd_threshold=0.5)
    argmax = sum(r["argmax_is_y"] for r in recs)
    epys = sum(r["epys"] for r in recs)
    exact = sum([(a[0], a[1]) for a in r["blcd_arcs"]] == [("X", "Z")] for r in recs)
    # EPYS is a property of the generating graph, so it must hold in every replicate
    ok = argmax >= NEEDED and epys == REPLICATES and exact >= NEEDED
    report(8, "EPYS with latents", ok, f"Y argmax {argmax}/20, EPYS {epys}/20, BLCD exactly (X, Z) {exact}/20")


def test_09_dsep_oracle(report):
    rng = np.random.default_rng(9)
    queries = 0
    disagreements = 0
    for _ in range(1000):
        g = random_dag(rng, int(rng.integers(2, 7)), p_edge=float(rng.uniform(0.1, 0.8)))
        for a, b, cond in all_queries(g):
            queries += 1
            disagreements += d_separated(g, a, b, cond) != dsep_by_paths(g, a, b, cond)
    report(9, "d-separation oracle", disagreements == 0, f"{disagreements} disagreements over {queries} queries on 1000 DAGs")


def test_10_markov_half(report):
    rng = np.random.default_rng(10)
    checked = 0
    worst = 0.0
    for _ in range(200):
        g = random_dag(rng, int(rng.integers(2, 7)), p_edge=float(rng.uniform(0.2, 0.7)))
        net = random_parameterization(
            g, {v: int(rng.integers(2, 4)) for v in g.nodes}, rng, float(rng.choice([0.2, 1.0, 5.0]))
        )
        joint = exact_joint(net)
        for a, b, cond in all_queries(g):
            if d_separated(g, a, b, cond):
                checked += 1
                worst = max(worst, dependence_gap(joint, a, b, cond))
    report(10, "Markov property", worst <= 1e-9, f"max gap {worst:.3e} over {checked} d-separations in 200 nets")
