"""Generators of the parasemifields G(F) over rooted forests.

Exact integer arithmetic throughout: forests and leaf minors, the (+, join)
algebra, explicit generator constructions with replayable witnesses,
non-generation certificates, bounded closure search, and the related
ideal-simple semiring constructions.
"""

from __future__ import annotations

__version__ = "0.1.0"

from .forest import (
    ForestFormatError,
    RootedForest,
    build_family,
    canonical_form,
    is_isomorphic,
    is_leaf_minor,
    isol,
    kpn,
    parse_forest,
    path,
    shape_stats,
    tkl,
)
from .parasemifield import ForestMismatch, ForestVector, join, meet
from .derivation import GeneratorSet, parse_genset, parse_sexpr, to_sexpr
from .gensets import gens_generic, gens_isol, gens_kpn, gens_path, gens_tkl, gens_union
from .certify import Certificate, bounds_report, find_certificate
from .closure import SearchBudget, Verdict, goal_search, search_min_gens, verify_generator_set
from .semifield import check_semiring_axioms, make_instance

__all__ = [
    "__version__",
    "ForestFormatError",
    "RootedForest",
    "build_family",
    "canonical_form",
    "is_isomorphic",
    "is_leaf_minor",
    "isol",
    "kpn",
    "parse_forest",
    "path",
    "shape_stats",
    "tkl",
    "ForestMismatch",
    "ForestVector",
    "join",
    "meet",
    "GeneratorSet",
    "parse_genset",
    "parse_sexpr",
    "to_sexpr",
    "gens_generic",
    "gens_isol",
    "gens_kpn",
    "gens_path",
    "gens_tkl",
    "gens_union",
    "Certificate",
    "bounds_report",
    "find_certificate",
    "SearchBudget",
    "Verdict",
    "goal_search",
    "search_min_gens",
    "verify_generator_set",
    "check_semiring_axioms",
    "make_instance",
]
