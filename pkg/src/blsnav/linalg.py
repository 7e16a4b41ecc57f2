"""Dense kernels: one-sided Jacobi SVD and the Frechet trace term.

The SVD is computed with Hestenes' one-sided Jacobi method in a fixed cyclic
pair order, so a given matrix always yields the same bytes. Output conventions:

* singular values in non-increasing order (stable with respect to column index
  on exact ties);
* each left singular vector is flipped so its largest-magnitude entry is
  positive (lowest index wins ties), and the matching right vector is flipped
  with it;
* left vectors belonging to numerically zero singular values are completed to
  an orthonormal basis from the standard basis.
"""

from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np

from .errors import InputError, NumericError

EPS = np.finfo(np.float64).eps

#: Convergence threshold on |<g_p, g_q>| / (|g_p| |g_q|) for every column pair.
JACOBI_TOL = 1e-14

#: Sweep cap is ``SWEEPS_PER_DIM * n``.
SWEEPS_PER_DIM = 100


@numba.njit(cache=True)
def _jacobi_sweeps(g, v, tol, max_sweeps):
    n = g.shape[1]
    m = g.shape[0]
    for sweep in range(1, max_sweeps + 1):
        rotated = False
        for p in range(n - 1):
            for q in range(p + 1, n):
                alpha = 0.0
                beta = 0.0
                gamma = 0.0
                for i in range(m):
                    gp = g[i, p]
                    gq = g[i, q]
                    alpha += gp * gp
                    beta += gq * gq
                    gamma += gp * gq
                if gamma == 0.0 or abs(gamma) <= tol * np.sqrt(alpha) * np.sqrt(beta):
                    continue
                rotated = True
                zeta = (beta - alpha) / (2.0 * gamma)
                if zeta >= 0.0:
                    t = 1.0 / (zeta + np.sqrt(1.0 + zeta * zeta))
                else:
                    t = -1.0 / (-zeta + np.sqrt(1.0 + zeta * zeta))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = c * t
                for i in range(m):
                    gp = g[i, p]
                    gq = g[i, q]
                    g[i, p] = c * gp - s * gq
                    g[i, q] = s * gp + c * gq
                for i in range(n):
                    vp = v[i, p]
                    vq = v[i, q]
                    v[i, p] = c * vp - s * vq
                    v[i, q] = s * vp + c * vq
        if not rotated:
            return sweep, True
    return max_sweeps, False


@dataclass(frozen=True, eq=False)
class SingularSystem:
    """``J = u @ diag(sigma) @ v.T`` with orthonormal ``u`` and ``v``."""

    u: np.ndarray
    sigma: np.ndarray
    v: np.ndarray

    @property
    def n(self) -> int:
        return self.sigma.shape[0]

    def reconstruct(self) -> np.ndarray:
        return (self.u * self.sigma) @ self.v.T


def orthogonality_residual(q) -> float:
    """Frobenius norm of ``q.T @ q - I``."""
    q = np.asarray(q, dtype=np.float64)
    return float(np.linalg.norm(q.T @ q - np.eye(q.shape[1])))


def _complete_basis(u, keep):
    # fill columns not in `keep` with orthonormal vectors drawn from the standard basis
    n = u.shape[0]
    basis = [u[:, j] for j in range(n) if keep[j]]
    for j in range(n):
        if keep[j]:
            continue
        best, best_norm = None, -1.0
        for k in range(n):
            e = np.zeros(n)
            e[k] = 1.0
            for _ in range(2):
                for b in basis:
                    e -= (b @ e) * b
            norm = np.linalg.norm(e)
            if norm > best_norm + 1e-12:
                best, best_norm = e, norm
        col = best / best_norm
        u[:, j] = col
        basis.append(col)
    return u


def svd(J) -> SingularSystem:
    """Full SVD of a square real matrix via one-sided Jacobi rotations."""
    a = np.asarray(J, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InputError(f"svd expects a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InputError("svd input contains non-finite entries")
    n = a.shape[0]
    g = np.array(a, order="F")
    v = np.eye(n, order="F")
    tol = max(JACOBI_TOL, n * EPS)
    max_sweeps = int(SWEEPS_PER_DIM * n)
    sweeps, converged = _jacobi_sweeps(g, v, tol, max_sweeps)
    if not converged:
        raise NumericError("one-sided Jacobi SVD did not converge", iteration=sweeps)

    norms = np.sqrt(np.sum(g * g, axis=0))
    order = np.argsort(-norms, kind="stable")
    sigma = norms[order]
    g = g[:, order]
    v = np.ascontiguousarray(v[:, order])

    cutoff = sigma[0] * n * EPS if n else 0.0
    keep = sigma > cutoff
    u = np.zeros((n, n))
    u[:, keep] = g[:, keep] / sigma[keep]
    if not np.all(keep):
        u = _complete_basis(u, keep)

    idx = np.argmax(np.abs(u), axis=0)
    signs = np.where(u[idx, np.arange(n)] < 0.0, -1.0, 1.0)
    u = u * signs
    v = v * signs
    for arr in (u, sigma, v):
        arr.flags.writeable = False
    return SingularSystem(u=u, sigma=sigma, v=v)


# --- Frechet trace term ------------------------------------------------------

SYMMETRY_TOL = 1e-10
PSD_TOL = 1e-10
CLAMP_FLOOR = 1e-8


def _scale(c):
    return max(1.0, float(np.max(np.abs(c))) if c.size else 1.0)


def _checked_psd(c, name):
    c = np.asarray(c, dtype=np.float64)
    if c.ndim != 2 or c.shape[0] != c.shape[1]:
        raise InputError(f"{name} must be square, got shape {c.shape}")
    if not np.all(np.isfinite(c)):
        raise InputError(f"{name} contains non-finite entries")
    scale = _scale(c)
    if np.max(np.abs(c - c.T), initial=0.0) > SYMMETRY_TOL * scale:
        raise InputError(f"{name} is not symmetric")
    c = 0.5 * (c + c.T)
    evals, evecs = np.linalg.eigh(c)
    if evals.size and evals[0] < -PSD_TOL * scale:
        raise InputError(f"{name} is indefinite (min eigenvalue {evals[0]:.3e})")
    return c, np.clip(evals, 0.0, None), evecs


def _drop_noise(evals):
    # eigenvalues at rounding level of the largest one are indistinguishable from
    # zero, and their square roots (~sqrt(eps)) would otherwise dominate the error
    if not evals.size:
        return evals
    return np.where(evals > evals.size * EPS * np.max(evals), evals, 0.0)


def psd_sqrt(c) -> np.ndarray:
    """Symmetric square root of a PSD matrix."""
    _, evals, evecs = _checked_psd(c, "matrix")
    return (evecs * np.sqrt(evals)) @ evecs.T


def trace_sqrt_product(c1, c2) -> float:
    """``Tr((c1 @ c2) ** 0.5)`` for symmetric PSD ``c1``, ``c2``.

    Uses the eigenvalues of ``c1^1/2 c2 c1^1/2``, which share the spectrum of
    ``c1 c2`` but are real and non-negative in exact arithmetic.
    """
    _, e1, q1 = _checked_psd(c1, "c1")
    c2, _, _ = _checked_psd(c2, "c2")
    if c2.shape != q1.shape:
        raise InputError(f"covariance shapes differ: {q1.shape} vs {c2.shape}")
    root = (q1 * np.sqrt(_drop_noise(e1))) @ q1.T
    inner = root @ c2 @ root
    inner = 0.5 * (inner + inner.T)
    evals = np.linalg.eigvalsh(inner)
    floor = -CLAMP_FLOOR * _scale(inner)
    if evals.size and evals[0] < floor:
        raise InputError(f"product has eigenvalue {evals[0]:.3e} below the clamp floor")
    return float(np.sum(np.sqrt(_drop_noise(np.clip(evals, 0.0, None)))))
