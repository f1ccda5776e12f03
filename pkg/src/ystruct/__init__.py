"""Score-based local causal discovery with Y structures on discrete data."""

__version__ = "0.1.0"

from .bayesnet import (
    Dataset,
    DiscreteBayesNet,
    JointTable,
    exact_joint,
    forward_sample,
    independent_in_dist,
    marginalize,
    random_parameterization,
    verify_perfect_map,
)
from .discovery import DiscoveryReport, MbEstimate, blcd_search, estimate_markov_blanket, exhaustive_search, y_posterior
from .equivalence import EquivClass, enumerate_dags, equivalence_classes, markov_equivalent
from .graph import (
    Dag,
    NearY,
    YStructure,
    classify_tetrad,
    d_separated,
    d_separation_signature,
    graphical_markov_blanket,
    unshielded_colliders,
)
from .pag import Mark, Pag, build_pag_from_witnesses, epys_holds, is_dag_pag
from .scoring import ScoreParams, bde_log_score, posterior_over_dags
