"""Analytic constants, Moser iteration checks and pinching monitors."""

from ricci_lab.constants.ledger import (
    ConstantLedger,
    LedgerEntry,
    build_ledger,
    croke_constants,
    energy_coefficient,
    interpolation_exponent,
    isoperimetric_lower_bound,
    moser_constants,
    omega_tilde_lower_bound,
    r_kappa,
    sobolev_sigma,
    sphere_measure,
    tilde_volume,
)
from ricci_lab.constants.moser import (
    MoserDomains,
    MoserProblem,
    cutoff,
    epsilon_regularity_check,
    epsilon_regularity_constants,
    moser_domains,
    moser_iteration_trace,
    moser_ladder_constant,
    moser_rung_factors,
    parabolic_sobolev_check,
    scalar_curvature_problem,
)
from ricci_lab.constants.pinching import hamilton_ivey_check, hamilton_ivey_rhs

__all__ = [
    "ConstantLedger",
    "LedgerEntry",
    "MoserDomains",
    "MoserProblem",
    "build_ledger",
    "croke_constants",
    "cutoff",
    "energy_coefficient",
    "epsilon_regularity_check",
    "epsilon_regularity_constants",
    "hamilton_ivey_check",
    "hamilton_ivey_rhs",
    "interpolation_exponent",
    "isoperimetric_lower_bound",
    "moser_constants",
    "moser_domains",
    "moser_iteration_trace",
    "moser_ladder_constant",
    "moser_rung_factors",
    "omega_tilde_lower_bound",
    "parabolic_sobolev_check",
    "r_kappa",
    "scalar_curvature_problem",
    "sobolev_sigma",
    "sphere_measure",
    "tilde_volume",
]
