"""Kernels, gap probabilities and simulations for non-intersecting Brownian motions."""

from ._core import (
    DomainError,
    Measure,
    NumericalError,
    airy,
    airy_ext,
    conn_rhs,
    critical_time,
    density_on_support,
    forward_map,
    gap_probability,
    jet_at,
    merging_initial_point,
    pearcey_ext,
    rescaled_kernel,
    scaling_frame,
    simulate,
    stieltjes,
    support,
    tracy_widom_cdf,
    transition,
    y_function,
)

__all__ = [
    "DomainError",
    "Measure",
    "NumericalError",
    "airy",
    "airy_ext",
    "conn_rhs",
    "critical_time",
    "density_on_support",
    "forward_map",
    "gap_probability",
    "jet_at",
    "merging_initial_point",
    "pearcey_ext",
    "rescaled_kernel",
    "scaling_frame",
    "simulate",
    "stieltjes",
    "support",
    "tracy_widom_cdf",
    "transition",
    "y_function",
]
