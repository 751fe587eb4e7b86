"""Locally conformal multisymplectic field theory."""

from ._core import (
    ChartFamily,
    Error,
    Expr,
    Hamiltonian,
    LeeForm,
    NumericAbort,
    ParseError,
    ValidationError,
    connection_residual_is_zero,
    hj_residual,
    integrate_mechanics,
    lchdw_residual,
    mechanics_closed_form,
    parse,
    roundtrip_verify,
    run_identity_suite,
    run_scenario,
    run_scenario_text,
)

__all__ = [
    "ChartFamily",
    "Error",
    "Expr",
    "Hamiltonian",
    "LeeForm",
    "NumericAbort",
    "ParseError",
    "ValidationError",
    "connection_residual_is_zero",
    "hj_residual",
    "integrate_mechanics",
    "lchdw_residual",
    "mechanics_closed_form",
    "parse",
    "roundtrip_verify",
    "run_identity_suite",
    "run_scenario",
    "run_scenario_text",
]
