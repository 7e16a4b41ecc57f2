"""Objectives on W and the two descent drivers.

``sgd`` updates ``w`` directly by plain (deterministic) gradient descent.
``bounded`` treats ``w - lr * grad`` as a target code and moves toward it only
as far as the Bounded Local Space at the current ``z`` allows, updating ``z``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Union

import numpy as np

from . import basis, mapnet
from .errors import InputError, NumericError


def _vec(w, dim):
    w = np.asarray(w, dtype=np.float64)
    if w.shape != (dim,):
        raise InputError(f"latent code has shape {w.shape}, expected ({dim},)")
    return w


@dataclass(frozen=True, eq=False)
class LatentDistance:
    """``(|w - w0|^2 - d_t)^2``: keep a fixed squared distance from ``w0``."""

    w0: np.ndarray
    d_t: float

    def __post_init__(self):
        object.__setattr__(self, "w0", np.asarray(self.w0, dtype=np.float64))
        if not self.d_t >= 0.0:
            raise InputError(f"d_t must be non-negative, got {self.d_t}")

    @property
    def dim(self):
        return self.w0.shape[0]

    def value(self, w):
        diff = _vec(w, self.dim) - self.w0
        r = diff @ diff - self.d_t
        return float(r * r)

    def grad(self, w):
        diff = _vec(w, self.dim) - self.w0
        r = diff @ diff - self.d_t
        return 4.0 * r * diff


@dataclass(frozen=True, eq=False)
class ScoreMatch:
    """``(scorer(w) - s)^2`` for a scalar-output scorer network."""

    scorer: mapnet.Network
    s: float

    def __post_init__(self):
        if self.scorer.output_dim != 1:
            raise InputError(f"scorer must have one output, has {self.scorer.output_dim}")

    @property
    def dim(self):
        return self.scorer.input_dim

    def value(self, w):
        e = mapnet.forward(self.scorer, _vec(w, self.dim))[0] - self.s
        return float(e * e)

    def grad(self, w):
        y, jac = mapnet.forward_with_jacobian(self.scorer, _vec(w, self.dim))
        return 2.0 * (y[0] - self.s) * jac[0]


@dataclass(frozen=True, eq=False)
class FeatureMatch:
    """``|mask * (extractor(w) - target)|^2``."""

    extractor: mapnet.Network
    target: np.ndarray
    mask: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "target", np.asarray(self.target, dtype=np.float64))
        object.__setattr__(self, "mask", np.asarray(self.mask, dtype=np.float64))
        m = self.extractor.output_dim
        if self.target.shape != (m,) or self.mask.shape != (m,):
            raise InputError(
                f"target {self.target.shape} and mask {self.mask.shape} must match extractor output ({m},)"
            )
        if not np.all((self.mask == 0.0) | (self.mask == 1.0)):
            raise InputError("mask entries must be 0 or 1")

    @property
    def dim(self):
        return self.extractor.input_dim

    def value(self, w):
        r = self.mask * (mapnet.forward(self.extractor, _vec(w, self.dim)) - self.target)
        return float(r @ r)

    def grad(self, w):
        f, jac = mapnet.forward_with_jacobian(self.extractor, _vec(w, self.dim))
        return 2.0 * (self.mask * (f - self.target)) @ jac


LossSpec = Union[LatentDistance, ScoreMatch, FeatureMatch]


def loss_value(spec: LossSpec, w) -> float:
    return spec.value(w)


def loss_grad_w(spec: LossSpec, w) -> np.ndarray:
    return spec.grad(w)


class Driver(str, enum.Enum):
    SGD = "sgd"
    BOUNDED = "bounded"


@dataclass(frozen=True, eq=False)
class OptState:
    pair: mapnet.LatentPair
    iter: int
    loss: float


def _checked_grad(spec, w, it=None):
    g = spec.grad(w)
    if not np.all(np.isfinite(g)):
        raise NumericError("non-finite loss gradient", iteration=it)
    return g


def sgd_step(spec: LossSpec, w, lr: float) -> np.ndarray:
    if not lr > 0.0:
        raise InputError(f"learning rate must be positive, got {lr}")
    w = np.asarray(w, dtype=np.float64)
    return w - lr * _checked_grad(spec, w)


def bounded_opt_update(net, spec, state: OptState, lr, alpha, sv_threshold) -> basis.BoundedUpdate:
    """The clamped update toward ``w - lr * grad`` at ``state``."""
    w = state.pair.w
    target = w - lr * _checked_grad(spec, w, state.iter + 1)
    frame = basis.compute_frame(net, state.pair.z, alpha, sv_threshold)
    return basis.bounded_update(frame, target)


def bounded_opt_step(
    net,
    spec: LossSpec,
    state: OptState,
    lr: float,
    alpha: float = basis.DEFAULT_ALPHA,
    sv_threshold: float = basis.DEFAULT_SV_THRESHOLD,
) -> OptState:
    if not lr > 0.0:
        raise InputError(f"learning rate must be positive, got {lr}")
    update = bounded_opt_update(net, spec, state, lr, alpha, sv_threshold)
    z = state.pair.z + update.delta_z
    w = mapnet.forward(net, z)
    it = state.iter + 1
    if not (np.all(np.isfinite(z)) and np.all(np.isfinite(w))):
        raise NumericError("non-finite latent update", iteration=it)
    return OptState(mapnet.LatentPair(z, w), it, spec.value(w))


def run_optimization(
    net,
    spec: LossSpec,
    init_z,
    iters: int,
    lr: float,
    driver: Driver = Driver.SGD,
    alpha: float = basis.DEFAULT_ALPHA,
    sv_threshold: float = basis.DEFAULT_SV_THRESHOLD,
) -> list[OptState]:
    """Run ``iters`` descent steps; the returned list starts with the initial state."""
    driver = Driver(driver)
    if iters < 1:
        raise InputError(f"iters must be >= 1, got {iters}")
    z0 = np.asarray(init_z, dtype=np.float64)
    w0 = mapnet.forward(net, z0)
    state = OptState(mapnet.LatentPair(z0 if driver is Driver.BOUNDED else None, w0), 0, spec.value(w0))
    states = [state]
    for t in range(iters):
        if driver is Driver.BOUNDED:
            state = bounded_opt_step(net, spec, state, lr, alpha, sv_threshold)
        else:
            try:
                w = sgd_step(spec, state.pair.w, lr)
            except NumericError as exc:
                raise NumericError(str(exc), iteration=t + 1) from None
            if not np.all(np.isfinite(w)):
                raise NumericError("non-finite latent update", iteration=t + 1)
            state = OptState(mapnet.LatentPair(None, w), t + 1, spec.value(w))
        states.append(state)
    return states
