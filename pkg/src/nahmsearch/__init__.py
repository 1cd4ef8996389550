"""Nahm sums f_{A,B,C}, CFT characters and the search for modular (B, C) values."""

from .characters import (
    CosetLabel,
    MinimalLabel,
    TargetCombination,
    affine_su2_character,
    combination_series,
    coset_character,
    minimal_character,
    minimal_targets,
    predicted_combinations,
    u1_character,
)
from .liealg import MatrixQ, cartan_matrix, coset_family_matrix, effective_central_charge, minimal_family_matrix
from .nahmsum import NahmDatum, nahm_sum
from .qseries import PuiseuxSeries, TwoVarSeries, dedekind_eta, rational_reconstruct, theta_lattice
from .search import SearchConfig, dual_transform, infinite_family_identity, run_search
from .tba import PrecisionConfig, asymptotic_C, asymptotic_residual, dilog_ceff, solve_x

__all__ = [
    "CosetLabel",
    "MatrixQ",
    "MinimalLabel",
    "NahmDatum",
    "PrecisionConfig",
    "PuiseuxSeries",
    "SearchConfig",
    "TargetCombination",
    "TwoVarSeries",
    "affine_su2_character",
    "asymptotic_C",
    "asymptotic_residual",
    "cartan_matrix",
    "combination_series",
    "coset_character",
    "coset_family_matrix",
    "dedekind_eta",
    "dilog_ceff",
    "dual_transform",
    "effective_central_charge",
    "infinite_family_identity",
    "minimal_character",
    "minimal_family_matrix",
    "minimal_targets",
    "nahm_sum",
    "predicted_combinations",
    "rational_reconstruct",
    "run_search",
    "solve_x",
    "theta_lattice",
    "u1_character",
]
