import json
import os
import subprocess
import sys

import pytest

from ystruct.bayesnet import random_parameterization, save_net
from ystruct.experiment import (
    ExperimentConfig,
    report_json,
    report_table,
    run_convergence_experiment,
)
from ystruct.fixtures import FIXTURES, SetupError, faithful_net, get_fixture
from ystruct.graph import y_dag

SWEEP = [100, 1000, 10_000, 50_000]


def by_m(report):
    return {row["m"]: row for row in report["summary"]}


class TestConfig:
    @pytest.mark.parametrize(
        "kwargs",
        [
            {"replicates": 0},
            {"sample_sizes": [1000, 100]},
            {"sample_sizes": [0, 10]},
            {"generator": "nope"},
            {"generator": "custom"},
        ],
    )
    def test_invalid(self, kwargs):
        with pytest.raises(ValueError):
            ExperimentConfig(**kwargs)

    def test_unknown_keys(self):
        with pytest.raises(ValueError):
            ExperimentConfig.from_dict({"generator": "y_net", "colour": "red"})


def test_deterministic_report():
    cfg = ExperimentConfig(replicates=3, sample_sizes=[200, 2000])
    a = report_json(run_convergence_experiment(cfg))
    b = report_json(run_convergence_experiment(cfg))
    assert a == b
    doc = json.loads(a)
    assert [(r["m"], r["replicate"]) for r in doc["records"]] == [(200, 0), (200, 1), (200, 2), (2000, 0), (2000, 1), (2000, 2)]


def test_worker_pool_matches_serial(monkeypatch):
    cfg = ExperimentConfig(replicates=2, sample_sizes=[500])
    serial = report_json(run_convergence_experiment(cfg))
    monkeypatch.setenv("YSTRUCT_THREADS", "2")
    assert report_json(run_convergence_experiment(cfg)) == serial


def test_table_is_aligned():
    table = report_table(run_convergence_experiment(ExperimentConfig(replicates=2, sample_sizes=[100, 1000])))
    lines = table.splitlines()
    assert lines[0].startswith("generator=y_net")
    assert len({len(line) for line in lines[1:]}) == 1


def test_faithfulness_retry_exhausted():
    with pytest.raises(SetupError):
        faithful_net(get_fixture("y_net"), (0,), tol=0.99, max_retries=3)


def test_fixture_nets_pass_the_basic_screen():
    for name, fx in FIXTURES.items():
        net, _ = faithful_net(fx, (0, 0, 0))
        assert net.observed == fx.observed, name


def test_custom_net_file(tmp_path):
    path = tmp_path / "net.json"
    save_net(random_parameterization(y_dag(), 2, seed=4), path)
    cfg = ExperimentConfig(generator="custom", net_file=str(path), replicates=2, sample_sizes=[50_000])
    row = by_m(run_convergence_experiment(cfg))[50_000]
    assert row["expected_argmax_rate"] is None
    assert row["y_argmax_rate"] == 1.0


def test_y_net_sweep():
    rows = by_m(run_convergence_experiment(ExperimentConfig(generator="y_net", sample_sizes=SWEEP)))
    rates = [rows[m]["y_argmax_rate"] for m in SWEEP]
    assert rates == sorted(rates)
    assert rates[-1] >= 0.9


def test_latent_confounder_sweep():
    rows = by_m(run_convergence_experiment(ExperimentConfig(generator="latent_confounder_net", sample_sizes=SWEEP)))
    assert rows[50_000]["p_xz_low_rate"] >= 18 / 20
    assert rows[50_000]["epys_rate"] == 0.0


def test_epys_latent_sweep():
    rows = by_m(run_convergence_experiment(ExperimentConfig(generator="epys_latent_net", sample_sizes=SWEEP)))
    assert rows[50_000]["y_argmax_rate"] >= 18 / 20
    assert rows[50_000]["epys_rate"] == 1.0


def test_independent_net_has_no_y():
    rows = by_m(run_convergence_experiment(ExperimentConfig(generator="independent_net", sample_sizes=[50_000])))
    assert rows[50_000]["y_argmax_rate"] == 0.0
    assert rows[50_000]["expected_argmax_rate"] >= 0.9


def test_report_independent_of_hash_seed():
    script = (
        "from ystruct.experiment import ExperimentConfig, report_json, run_convergence_experiment\n"
        "cfg = ExperimentConfig(generator='epys_latent_net', replicates=2, sample_sizes=[300], blcd=True)\n"
        "print(report_json(run_convergence_experiment(cfg)), end='')\n"
    )
    outs = []
    for seed in ("0", "3"):
        env = {**os.environ, "PYTHONHASHSEED": seed}
        proc = subprocess.run([sys.executable, "-c", script], env=env, capture_output=True, text=True, check=True)
        outs.append(proc.stdout)
    assert outs[0] == outs[1]
