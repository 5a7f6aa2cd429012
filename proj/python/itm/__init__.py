"""Optimal gradient methods: schedules, runs, certification, PEP bounds, design."""

from _itm import (
    QuadraticOracle,
    Schedule,
    alpha_from_h,
    build_schedule,
    design_distance,
    design_function_value,
    h_from_alpha,
    item_dual_certificate,
    item_h,
    lower_bound_sequence,
    ogm_theta_sequence,
    potential_check,
    run_fixed_step,
    run_item,
    tmm_limit_params,
    verify_item_certificate,
    worst_case_bound,
)

__all__ = [
    "QuadraticOracle",
    "Schedule",
    "alpha_from_h",
    "build_schedule",
    "design_distance",
    "design_function_value",
    "h_from_alpha",
    "item_dual_certificate",
    "item_h",
    "lower_bound_sequence",
    "ogm_theta_sequence",
    "potential_check",
    "run_fixed_step",
    "run_item",
    "tmm_limit_params",
    "verify_item_certificate",
    "worst_case_bound",
]

__version__ = "0.1.0"
