"""Named generating networks used by experiments and the ``gen`` command."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .bayesnet import DiscreteBayesNet, perfect_map_violations, random_parameterization
from .graph import Dag, near_y_dag, y_dag
from .pag import y_latent_witness

log = logging.getLogger(__name__)

OBSERVED = ("W1", "W2", "X", "Z")


class SetupError(RuntimeError):
    """No faithful parameterization found within the retry budget."""


@dataclass(frozen=True)
class Fixture:
    name: str
    dag: Dag
    latent: frozenset[str]
    # the 4-node DAG over the observed variables that should win in the limit
    expected: Dag

    @property
    def observed(self) -> tuple[str, ...]:
        return tuple(v for v in self.dag.nodes if v not in self.latent)


def _collider_dag() -> Dag:
    return Dag(OBSERVED, frozenset({("W1", "X"), ("W2", "X"), ("Z", "X")}))


FIXTURES: dict[str, Fixture] = {
    "y_net": Fixture("y_net", y_dag(), frozenset(), y_dag()),
    "near_y_net": Fixture("near_y_net", near_y_dag(), frozenset(), near_y_dag()),
    "latent_confounder_net": Fixture(
        "latent_confounder_net",
        Dag(("H", "W1", "W2", "X", "Z"), frozenset({("H", "X"), ("H", "Z"), ("W1", "X"), ("W2", "X")})),
        frozenset({"H"}),
        _collider_dag(),
    ),
    "epys_latent_net": Fixture("epys_latent_net", y_latent_witness(), frozenset({"H1", "H2"}), y_dag()),
    "independent_net": Fixture("independent_net", Dag(OBSERVED, frozenset()), frozenset(), Dag(OBSERVED, frozenset())),
}


def get_fixture(name: str) -> Fixture:
    try:
        return FIXTURES[name]
    except KeyError:
        raise KeyError(f"unknown fixture {name!r}; choose from {sorted(FIXTURES)}") from None


def faithful_net(
    fixture: Fixture,
    seed_words: tuple[int, ...],
    arity: int = 2,
    concentration: float = 1.0,
    tol: float = 1e-6,
    max_retries: int = 50,
) -> tuple[DiscreteBayesNet, int]:
    """First parameterization of ``fixture`` that passes the perfect-map screen.

    Attempt ``k`` is seeded with ``SeedSequence([*seed_words, k])``. Returns the
    net and the attempt index.
    """
    for attempt in range(max_retries):
        seed = np.random.SeedSequence([*seed_words, attempt])
        net = random_parameterization(fixture.dag, arity, seed, concentration, fixture.latent)
        bad = perfect_map_violations(net, fixture.observed, tol)
        if not bad:
            return net, attempt
        log.info("fixture %s seed %s attempt %d rejected: %d violations, e.g. %s",
                 fixture.name, seed_words, attempt, len(bad), bad[0])
    raise SetupError(f"{fixture.name}: no faithful parameterization in {max_retries} attempts (seed {seed_words})")


def generate(name: str, seed: int, arity: int = 2, concentration: float = 1.0,
             tol: float = 1e-6, max_retries: int = 50) -> DiscreteBayesNet:
    net, _ = faithful_net(get_fixture(name), (seed,), arity, concentration, tol, max_retries)
    return net
