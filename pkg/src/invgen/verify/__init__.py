"""Static verification of candidate invariants."""

from .backends import (BACKENDS, PROVED, REFUTED, UNKNOWN, BackendConfig, BackendUnavailable, ProofResult,
                       check_formulas, discharge, to_smtlib)
from .houdini import AssertionViolation, HoudiniResult, QueryCache, modular_verify, static_infer
from .queries import Verdict, classify_trivial, entails, equivalent
from .vcgen import Note, Source, SymState, UnsupportedConstruct, VerificationQuery, gen_vcs, ghost_axioms

__all__ = [
    "BACKENDS", "PROVED", "REFUTED", "UNKNOWN", "AssertionViolation", "BackendConfig", "BackendUnavailable",
    "HoudiniResult", "Note", "ProofResult", "QueryCache", "Source", "SymState", "UnsupportedConstruct",
    "Verdict", "VerificationQuery", "check_formulas", "classify_trivial", "discharge", "entails",
    "equivalent", "gen_vcs", "ghost_axioms", "modular_verify", "static_infer", "to_smtlib",
]
