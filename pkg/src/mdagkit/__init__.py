"""mdagkit: marginal DAG models with latent variables.

Separation, latent and ancestral projection, fixing, Markov equivalence of
maximal ancestral graphs, constraint classification and an exact discrete
probability oracle.
"""

__version__ = "0.1.0"

from .graph import (
    GraphError,
    MarkedMixedGraph,
    MDag,
    ParseError,
    format_marked,
    format_mdag,
    induced_subgraph,
    parse_marked,
    parse_mdag,
    topological_order,
    validate,
)
from .separation import (
    d_separated,
    districts,
    e_separated,
    is_fixable,
    m_separated,
    markov_blanket,
    open_path,
)
from .projection import CanonicalDag, canonical_dag, latent_project, mag_project
from .equivalence import (
    EquivalenceClass,
    build_pag,
    ci_dag_representable,
    enumerate_class,
    is_ancestral,
    is_maximal,
    markov_equivalent,
    separation_signature,
    skeleton_classes,
)
from .nested import (
    IndependenceModel,
    NestedWitness,
    detect_nondag_pattern,
    find_nested_constraints,
    fix_graph,
    fix_sequence,
    reachable_graphs,
)
from .classify import ClassificationReport, ClassTag, classify
