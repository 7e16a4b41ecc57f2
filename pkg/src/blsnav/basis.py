"""Bounded Local Space around a latent point.

At ``w = M(z)`` the left singular vectors ``u_i`` of the mapping network's
Jacobian form the Local Basis. The Bounded Local Space is the box

    { w + sum_i lam_i u_i  :  |lam_i| <= alpha * sigma_i }

Coefficient vectors are row vectors in the Local Basis: a w-space displacement
``dw`` has coefficients ``a = dw @ U`` and ``dw = a @ U.T``. Directions whose
singular value is at or below ``sv_threshold`` are treated as unreliable; their
coefficients are zeroed and the matching pseudo-inverse entry is 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg, mapnet
from .errors import InputError

DEFAULT_ALPHA = 1.0
DEFAULT_SV_THRESHOLD = 0.05


@dataclass(frozen=True, eq=False)
class LocalFrame:
    z: np.ndarray
    w: np.ndarray
    sys: linalg.SingularSystem
    alpha: float = DEFAULT_ALPHA
    sv_threshold: float = DEFAULT_SV_THRESHOLD

    def __post_init__(self):
        if not self.alpha > 0.0:
            raise InputError(f"alpha must be positive, got {self.alpha}")
        if not self.sv_threshold >= 0.0:
            raise InputError(f"sv_threshold must be non-negative, got {self.sv_threshold}")

    @property
    def n(self) -> int:
        return self.sys.n

    @property
    def retained(self) -> np.ndarray:
        """Mask of directions whose singular value exceeds the threshold."""
        return self.sys.sigma > self.sv_threshold

    @property
    def half_widths(self) -> np.ndarray:
        """Box half-widths ``alpha * sigma_i`` (zero on thresholded directions)."""
        return np.where(self.retained, self.alpha * self.sys.sigma, 0.0)

    @property
    def sigma_pinv(self) -> np.ndarray:
        sigma = self.sys.sigma
        safe = np.where(self.retained, sigma, 1.0)
        return np.where(self.retained, 1.0 / safe, 0.0)


def frame_from_jacobian(z, w, jac, alpha=DEFAULT_ALPHA, sv_threshold=DEFAULT_SV_THRESHOLD):
    return LocalFrame(
        z=np.asarray(z, dtype=np.float64),
        w=np.asarray(w, dtype=np.float64),
        sys=linalg.svd(jac),
        alpha=float(alpha),
        sv_threshold=float(sv_threshold),
    )


def compute_frame(
    net: mapnet.MappingNetwork,
    z,
    alpha: float = DEFAULT_ALPHA,
    sv_threshold: float = DEFAULT_SV_THRESHOLD,
) -> LocalFrame:
    if not alpha > 0.0:
        raise InputError(f"alpha must be positive, got {alpha}")
    if not sv_threshold >= 0.0:
        raise InputError(f"sv_threshold must be non-negative, got {sv_threshold}")
    w, jac = mapnet.forward_with_jacobian(net, z)
    return frame_from_jacobian(z, w, jac, alpha, sv_threshold)


def _vec(frame, x, name):
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (frame.n,):
        raise InputError(f"{name} has shape {x.shape}, expected ({frame.n},)")
    return x


def coefficients(frame: LocalFrame, delta_w) -> np.ndarray:
    # U is orthonormal, so (U^T)^-1 == U
    return _vec(frame, delta_w, "delta_w") @ frame.sys.u


def clamp_coefficients(frame: LocalFrame, a) -> np.ndarray:
    a = _vec(frame, a, "coefficients")
    bound = frame.alpha * frame.sys.sigma
    return np.where(frame.retained, np.minimum(np.maximum(a, -bound), bound), 0.0)


def reconstruct_delta(frame: LocalFrame, a_c) -> np.ndarray:
    return _vec(frame, a_c, "coefficients") @ frame.sys.u.T


def latent_delta(frame: LocalFrame, a_c) -> np.ndarray:
    """Z-space update ``a_c @ pinv(Sigma) @ V.T`` matching a w-space step."""
    return (_vec(frame, a_c, "coefficients") * frame.sigma_pinv) @ frame.sys.v.T


def contains(frame: LocalFrame, w_point, tol: float = 0.0) -> bool:
    """Whether ``w_point`` lies in the frame's Bounded Local Space.

    Thresholded directions admit no motion beyond ``tol``.
    """
    lam = coefficients(frame, _vec(frame, w_point, "w_point") - frame.w)
    return bool(np.all(np.abs(lam) <= frame.half_widths + tol))


@dataclass(frozen=True, eq=False)
class BoundedUpdate:
    frame: LocalFrame
    coeffs: np.ndarray
    clamped: np.ndarray
    delta_w: np.ndarray  # linearized w-space step a_c @ U.T
    delta_z: np.ndarray


def bounded_update(frame: LocalFrame, w_target) -> BoundedUpdate:
    """Move toward ``w_target`` as far as the frame's box allows."""
    a = coefficients(frame, _vec(frame, w_target, "w_target") - frame.w)
    a_c = clamp_coefficients(frame, a)
    return BoundedUpdate(
        frame=frame,
        coeffs=a,
        clamped=a_c,
        delta_w=reconstruct_delta(frame, a_c),
        delta_z=latent_delta(frame, a_c),
    )
