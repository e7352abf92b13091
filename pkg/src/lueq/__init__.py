"""Local-unitary invariants and equivalence of bipartite mixed states."""
from .equivalence import (
    Conditional,
    Equivalent,
    Inconclusive,
    Inequivalent,
    Verdict,
    Witness,
    decide_bipartite,
    decide_tripartite,
    extract_witness,
)
from .errors import LueqError
from .invariants import Genericity, analyze, classify, compute_invariants, reduced_family
from .numerics import DEFAULT_TOL, Tolerance
from .states import BipartiteState, TripartiteState, eigensystem, validate, validate_pure

__all__ = [
    "BipartiteState",
    "Conditional",
    "DEFAULT_TOL",
    "Equivalent",
    "Genericity",
    "Inconclusive",
    "Inequivalent",
    "LueqError",
    "Tolerance",
    "TripartiteState",
    "Verdict",
    "Witness",
    "analyze",
    "classify",
    "compute_invariants",
    "decide_bipartite",
    "decide_tripartite",
    "eigensystem",
    "extract_witness",
    "reduced_family",
    "validate",
    "validate_pure",
]
