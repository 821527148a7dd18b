"""Tableau-based K-satisfiability for BL extended with Delta and an involutive negation."""
from .degrees import DegreeBracket, consistency_degree, strong_r_sat, weak_r_sat
from .formula import FormulaSyntaxError, parse_formula, render_formula
from .kset import KSet, KSetSyntaxError, complement_intervals, contains, parse_kset
from .model import ExtractedModel, OrdinalSum, evaluate, verify_model
from .solver import SolverConfig, check_constraints
from .tableau import ExploreConfig, Satisfiable, Unknown, Unsatisfiable, explore

__all__ = [
    "DegreeBracket", "consistency_degree", "strong_r_sat", "weak_r_sat",
    "FormulaSyntaxError", "parse_formula", "render_formula",
    "KSet", "KSetSyntaxError", "complement_intervals", "contains", "parse_kset",
    "ExtractedModel", "OrdinalSum", "evaluate", "verify_model",
    "SolverConfig", "check_constraints",
    "ExploreConfig", "Satisfiable", "Unknown", "Unsatisfiable", "explore",
]
