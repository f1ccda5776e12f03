"""Seeded convergence experiments over named generating networks."""

from __future__ import annotations

import json
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .bayesnet import DiscreteBayesNet, forward_sample, load_net, perfect_map_violations
from .discovery import CAVEAT, blcd_search, y_posterior
from .fixtures import OBSERVED, FIXTURES, Fixture, SetupError, faithful_net
from .graph import Dag, d_separation_signature, y_dag
from .pag import epys_holds
from .scoring import ScoreParams

log = logging.getLogger(__name__)

# stream tags keep parameter draws and sampling draws independent
_NET_STREAM = 0
_SAMPLE_STREAM = 1


@dataclass
class ExperimentConfig:
    generator: str = "y_net"
    net_file: Optional[str] = None
    master_seed: int = 0
    replicates: int = 20
    sample_sizes: list[int] = field(default_factory=lambda: [100, 1000, 10000, 50000])
    ess: float = 1.0
    arity: int = 2
    concentration: float = 1.0
    # dependence margin the generating net must clear on every d-connected statement
    faithfulness_tol: float = 0.01
    max_retries: int = 1000
    high_threshold: float = 0.9
    low_threshold: float = 0.1
    blcd_threshold: float = 0.5
    # None: run BLCD only when more than four variables are observed
    blcd: Optional[bool] = None
    x: str = "X"
    z: str = "Z"

    def __post_init__(self):
        if self.replicates < 1:
            raise ValueError("replicates must be >= 1")
        if not self.sample_sizes or any(m <= 0 for m in self.sample_sizes):
            raise ValueError("sample sizes must be positive")
        if list(self.sample_sizes) != sorted(set(self.sample_sizes)):
            raise ValueError("sample sizes must be strictly ascending")
        if self.generator == "custom":
            if not self.net_file:
                raise ValueError("custom generator needs net_file")
        elif self.generator not in FIXTURES:
            raise ValueError(f"unknown generator {self.generator!r}; choose from {sorted(FIXTURES)} or 'custom'")

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentConfig":
        known = set(cls.__dataclass_fields__)
        extra = set(doc) - known
        if extra:
            raise ValueError(f"unknown config keys {sorted(extra)}")
        return cls(**doc)


@dataclass
class ReplicateRecord:
    replicate: int
    m: int
    attempt: int
    argmax: int
    argmax_dag: str
    argmax_is_y: bool
    argmax_is_expected: Optional[bool]
    p_xz: float
    # posterior mass on all twelve Y DAGs of the tetrad
    p_y_total: float
    epys: bool
    blcd_arcs: Optional[list]


def _replicate_net(cfg: ExperimentConfig, fixture: Optional[Fixture], replicate: int):
    if fixture is None:
        return load_net(cfg.net_file), 0
    return faithful_net(
        fixture,
        (cfg.master_seed, _NET_STREAM, replicate),
        cfg.arity,
        cfg.concentration,
        cfg.faithfulness_tol,
        cfg.max_retries,
    )


def _observed_four(net: DiscreteBayesNet) -> tuple[str, ...]:
    obs = net.observed
    if set(OBSERVED) <= set(obs):
        return OBSERVED
    if len(obs) == 4:
        return tuple(obs)
    raise SetupError(f"cannot pick a tetrad from observed variables {obs}")


def run_replicate(cfg: ExperimentConfig, replicate: int) -> list[ReplicateRecord]:
    fixture = None if cfg.generator == "custom" else FIXTURES[cfg.generator]
    net, attempt = _replicate_net(cfg, fixture, replicate)
    tetrad = _observed_four(net)
    sig = d_separation_signature(net.dag, tetrad)
    epys = epys_holds(sig, tetrad) is not None
    target_y = y_dag()
    params = ScoreParams(cfg.ess)
    run_blcd = cfg.blcd if cfg.blcd is not None else len(net.observed) > 4

    records = []
    for m in cfg.sample_sizes:
        seed = np.random.SeedSequence([cfg.master_seed, _SAMPLE_STREAM, replicate, m])
        data = forward_sample(net, m, seed)
        rep = y_posterior(data.select(tetrad), params)
        best = rep.dags[rep.argmax()]
        expected = None
        if fixture is not None:
            expected = _same_dag(best, fixture.expected)
        arcs = None
        if run_blcd:
            arcs = [[x, z, p] for x, z, p in blcd_search(data, params, cfg.blcd_threshold).arcs]
        records.append(
            ReplicateRecord(
                replicate=replicate,
                m=m,
                attempt=attempt,
                argmax=rep.argmax(),
                argmax_dag=str(best),
                argmax_is_y=_same_dag(best, target_y) if set(tetrad) == set(OBSERVED) else False,
                argmax_is_expected=expected,
                p_xz=rep.arc_posterior(cfg.x, cfg.z),
                p_y_total=float(sum(p for _, _, p in rep.y_arcs)),
                epys=epys,
                blcd_arcs=arcs,
            )
        )
    return records


def _same_dag(a: Dag, b: Dag) -> bool:
    return set(a.nodes) == set(b.nodes) and a.edges == b.edges


def _worker_count() -> int:
    try:
        return max(1, int(os.environ.get("YSTRUCT_THREADS", "1")))
    except ValueError:
        return 1


def _summarize(cfg: ExperimentConfig, records: list[ReplicateRecord]) -> list[dict]:
    rows = []
    for m in cfg.sample_sizes:
        recs = [r for r in records if r.m == m]
        n = len(recs)
        p = np.array([r.p_xz for r in recs])
        row = {
            "m": m,
            "replicates": n,
            "y_argmax_rate": sum(r.argmax_is_y for r in recs) / n,
            "expected_argmax_rate": (
                sum(bool(r.argmax_is_expected) for r in recs) / n
                if recs[0].argmax_is_expected is not None else None
            ),
            "p_xz_median": float(np.median(p)),
            "p_xz_high_rate": float(np.mean(p > cfg.high_threshold)),
            "p_xz_low_rate": float(np.mean(p < cfg.low_threshold)),
            "epys_rate": sum(r.epys for r in recs) / n,
        }
        if recs[0].blcd_arcs is not None:
            row["blcd_exact_xz_rate"] = sum(
                [(a[0], a[1]) for a in r.blcd_arcs] == [(cfg.x, cfg.z)] for r in recs
            ) / n
        rows.append(row)
    return rows


def run_convergence_experiment(cfg: ExperimentConfig) -> dict:
    """Run every replicate at every sample size and summarize per sample size.

    The report depends only on ``cfg``.
    """
    workers = min(_worker_count(), cfg.replicates)
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            chunks = list(pool.map(run_replicate, [cfg] * cfg.replicates, range(cfg.replicates)))
    else:
        chunks = [run_replicate(cfg, r) for r in range(cfg.replicates)]
    records = sorted((r for chunk in chunks for r in chunk), key=lambda r: (r.m, r.replicate))
    return {
        "config": asdict(cfg),
        "note": CAVEAT,
        "summary": _summarize(cfg, records),
        "records": [asdict(r) for r in records],
    }


def report_json(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def report_table(report: dict) -> str:
    """Aligned plain-text table of the per-m summary."""
    rows = report["summary"]
    cols = ["m", "replicates", "y_argmax_rate", "expected_argmax_rate", "p_xz_median",
            "p_xz_high_rate", "p_xz_low_rate", "epys_rate"]
    if rows and "blcd_exact_xz_rate" in rows[0]:
        cols.append("blcd_exact_xz_rate")

    def fmt(v):
        if v is None:
            return "-"
        if isinstance(v, float):
            return f"{v:.3f}"
        return str(v)

    cells = [cols] + [[fmt(r.get(c)) for c in cols] for r in rows]
    widths = [max(len(row[i]) for row in cells) for i in range(len(cols))]
    lines = ["  ".join(c.rjust(w) for c, w in zip(row, widths)) for row in cells]
    header = f"generator={report['config']['generator']} master_seed={report['config']['master_seed']}"
    return "\n".join([header, *lines]) + "\n"
