"""Radial compressible-flow simulator with density-dependent viscosity."""

from ._core import (
    admissible_alpha,
    check_dimension_bounds,
    refine_config,
    simulate_config,
    v1,
    v2,
    validate_config,
)

__all__ = [
    "admissible_alpha",
    "check_dimension_bounds",
    "refine_config",
    "simulate_config",
    "v1",
    "v2",
    "validate_config",
]
