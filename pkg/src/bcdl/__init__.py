"""Constructive description logic: information terms, realizability, natural
deduction with operator extraction, and realizability-preserving service
composition."""

__version__ = "0.1.0"

from .composition import (
    Composition,
    Environment,
    ServiceSpec,
    check_composition,
    compile_composition,
    execute,
    load_composition,
    verify_uniform,
)
from .infoterm import (
    Fun,
    Pair,
    TT,
    Tag,
    Wit,
    belongs,
    canonical,
    enumerate_terms,
    format_literal,
    format_compact,
    parse_literal,
    realizes,
    space_size,
)
from .ndproof import Proof, Rule, apply_operator, check_proof, extract, load_proof, parse_proof
from .prover import SearchBudget, Unknown, prove
from .runtime import Store, load_environment, load_store, save_store
from .semantics import Model, extension, holds, induced_model
from .syntax import Signature, Substitution, Theory, parse_concept, parse_formula, parse_signature

__all__ = [name for name in dir() if not name.startswith("_")]
