"""Recursive l_p instances, potential-function distortion certificates and embedding experiments."""

from ._core import (
    Embedding,
    Instance,
    LaaksoError,
    build_instance,
    certified_lower_bound,
    closed_form_counts,
    distortion,
    doubling_estimate,
    edge_potential,
    envelope_check,
    epsilon_for,
    gaussian_projection,
    identity_embedding,
    lp_dist,
    normalize_nonexpansive,
    point_segment_distance,
    potential_cap,
    stress_minimize,
    witness_chain,
)

__all__ = [
    "Embedding",
    "Instance",
    "LaaksoError",
    "build_instance",
    "certified_lower_bound",
    "closed_form_counts",
    "distortion",
    "doubling_estimate",
    "edge_potential",
    "envelope_check",
    "epsilon_for",
    "gaussian_projection",
    "identity_embedding",
    "lp_dist",
    "normalize_nonexpansive",
    "point_segment_distance",
    "potential_cap",
    "stress_minimize",
    "witness_chain",
]
