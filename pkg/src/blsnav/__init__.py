"""Bounded Local Space navigation of a mapping network's intermediate latent space."""

from .basis import (
    LocalFrame,
    bounded_update,
    clamp_coefficients,
    coefficients,
    compute_frame,
    contains,
    reconstruct_delta,
)
from .errors import BlsError, ConfigurationError, DegenerateFrameError, InputError, NumericError
from .linalg import SingularSystem, svd, trace_sqrt_product
from .mapnet import LatentPair, MappingNetwork, Network, forward, forward_with_jacobian, jacobian
from .metrics import cosine_similarity, fit_gaussian, frechet_distance
from .traversal import Method, TraversalConfig, run_traversal

__version__ = "0.1.0"

__all__ = [
    "BlsError",
    "ConfigurationError",
    "DegenerateFrameError",
    "InputError",
    "LatentPair",
    "LocalFrame",
    "MappingNetwork",
    "Method",
    "Network",
    "NumericError",
    "SingularSystem",
    "TraversalConfig",
    "bounded_update",
    "clamp_coefficients",
    "coefficients",
    "compute_frame",
    "contains",
    "cosine_similarity",
    "fit_gaussian",
    "forward",
    "forward_with_jacobian",
    "frechet_distance",
    "jacobian",
    "reconstruct_delta",
    "run_traversal",
    "svd",
    "trace_sqrt_product",
]
