import math

import numpy as np
import pytest

from oracles import random_dag, sequential_predictive_log_score
from ystruct.bayesnet import DataFormatError, Dataset, forward_sample, random_parameterization
from ystruct.equivalence import dag_list, equivalence_classes
from ystruct.fixtures import OBSERVED, faithful_net, get_fixture
from ystruct.graph import Dag, near_y_dag, y_dag
from ystruct.scoring import (
    FamilyScoreCache,
    ScoreParams,
    bde_log_score,
    family_counts,
    normalize_log_scores,
    posterior_over_dags,
)


def one_node(values):
    return Dataset(("A",), (2,), np.array(values, dtype=np.int64).reshape(-1, 1))


class TestBde:
    def test_first_observation(self):
        g = Dag(("A",), frozenset())
        # one node: the uniform structure prior is 1
        assert bde_log_score(g, one_node([0]), ScoreParams(1.0)) == pytest.approx(math.log(0.5), abs=1e-12)

    def test_two_observations(self):
        g = Dag(("A",), frozenset())
        assert bde_log_score(g, one_node([0, 0]), ScoreParams(1.0)) == pytest.approx(math.log(0.375), abs=1e-12)

    def test_explicit_structure_prior(self):
        g = Dag(("A",), frozenset())
        s = bde_log_score(g, one_node([0]), ScoreParams(1.0, log_structure_prior=-2.0))
        assert s == pytest.approx(-2.0 + math.log(0.5), abs=1e-12)

    def test_four_node_prior_is_one_over_543(self):
        d = Dataset(OBSERVED, (2, 2, 2, 2), np.zeros((0, 4), dtype=np.int64))
        assert bde_log_score(y_dag(), d) == pytest.approx(-math.log(543), abs=1e-12)

    def test_reversal_score_equivalent(self):
        rng = np.random.default_rng(1)
        for _ in range(10):
            m = int(rng.integers(1, 200))
            d = Dataset(("A", "B"), (2, 3), np.column_stack([rng.integers(0, 2, m), rng.integers(0, 3, m)]))
            ab = bde_log_score(Dag.from_edges([("A", "B")]), d)
            ba = bde_log_score(Dag(("A", "B"), frozenset({("B", "A")})), d)
            assert abs(ab - ba) < 1e-9

    def test_matches_sequential_predictive_oracle(self):
        rng = np.random.default_rng(5)
        for _ in range(25):
            g = random_dag(rng, int(rng.integers(1, 5)), p_edge=0.5)
            net = random_parameterization(g, {v: int(rng.integers(2, 4)) for v in g.nodes}, rng)
            d = forward_sample(net, int(rng.integers(0, 40)), rng)
            ess = float(rng.uniform(0.5, 10))
            params = ScoreParams(ess, log_structure_prior=0.0)
            assert bde_log_score(g, d, params) == pytest.approx(sequential_predictive_log_score(g, d, ess), abs=1e-9)

    def test_decomposable(self):
        net = random_parameterization(y_dag(), 2, seed=3)
        d = forward_sample(net, 500, seed=3)
        cache = FamilyScoreCache(d)
        diff = bde_log_score(near_y_dag(), d) - bde_log_score(y_dag(), d)
        assert diff == pytest.approx(cache.family("Z", ("W1", "X")) - cache.family("Z", ("X",)), abs=1e-9)

    def test_missing_variable(self):
        d = one_node([0, 1])
        with pytest.raises(DataFormatError):
            bde_log_score(Dag.from_edges([("A", "B")]), d)
        with pytest.raises(DataFormatError):
            bde_log_score(Dag(("Q",), frozenset()), d)

    def test_invalid_ess(self):
        with pytest.raises(ValueError):
            ScoreParams(0.0)

    def test_counts(self):
        d = Dataset(("A", "B"), (2, 2), np.array([[0, 1], [1, 1], [1, 0], [1, 1]]))
        ct = family_counts(d, "B", ("A",))
        assert ct.counts.tolist() == [[0, 1], [1, 2]]
        assert ct.row_sums.tolist() == [1, 3]
        assert ct.counts.sum() == d.m


class TestPosterior:
    def test_no_data_is_uniform(self):
        d = Dataset(OBSERVED, (2, 2, 2, 2), np.zeros((0, 4), dtype=np.int64))
        post = posterior_over_dags(dag_list(OBSERVED), d)
        assert np.allclose(post, 1 / 543)
        assert abs(post.sum() - 1) < 1e-12

    def test_shift_invariant(self):
        s = np.array([-1000.0, -1001.5, -1003.0])
        assert np.allclose(normalize_log_scores(s), normalize_log_scores(s + 12345.0))

    def test_extreme_scores_stable(self):
        p = normalize_log_scores([-1e6, -1e6 - 1, -2e6])
        assert np.isfinite(p).all() and abs(p.sum() - 1) < 1e-12

    def test_mixed_node_sets(self):
        d = one_node([0])
        with pytest.raises(ValueError):
            posterior_over_dags([Dag(("A",), frozenset()), Dag(("B",), frozenset())], d)

    def test_near_y_wins(self):
        net, _ = faithful_net(get_fixture("near_y_net"), (0, 0, 0), tol=0.01)
        d = forward_sample(net, 50_000, seed=1)
        dags = dag_list(OBSERVED)
        post = posterior_over_dags(dags, d)
        assert dags[int(np.argmax(post))].edges == near_y_dag().edges


def test_score_equivalence_small():
    rng = np.random.default_rng(0)
    classes = equivalence_classes(OBSERVED)
    for _ in range(3):
        g = random_dag(rng, 4, prefix="Q").rename({f"Q{i}": n for i, n in enumerate(OBSERVED)})
        d = forward_sample(random_parameterization(g, {v: int(rng.integers(2, 4)) for v in g.nodes}, rng), 300, rng)
        cache = FamilyScoreCache(d)
        for cls in classes:
            s = [cache.score(m) for m in cls.members]
            assert max(s) - min(s) < 1e-9


def test_score_ratio_shrinks_with_m():
    sub = Dag(OBSERVED, frozenset({("W1", "X"), ("W2", "X")}))
    fixture = get_fixture("y_net")
    for other in (sub, near_y_dag()):
        medians = []
        for m in (100, 1000, 10_000, 50_000):
            ratios = []
            for s in range(20):
                net, _ = faithful_net(fixture, (0, 0, s), tol=0.01)
                cache = FamilyScoreCache(forward_sample(net, m, np.random.SeedSequence([0, 1, s, m])))
                ratios.append(cache.score(other) - cache.score(y_dag()))
            medians.append(np.median(ratios))
        assert all(b < a for a, b in zip(medians, medians[1:])), medians
