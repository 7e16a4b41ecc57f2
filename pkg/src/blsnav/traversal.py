"""Latent traversal toward a fixed target direction in W.

Four methods share one runner:

* ``bounded`` -- step toward ``w_t + L * d`` restricted to the Bounded Local
  Space at ``z_t``, applied in Z through the pseudo-inverse of the Jacobian;
* ``ict`` -- step along the single retained Local Basis vector most aligned
  with ``d``, scaled so the linearized W-step has length ``L``;
* ``linear`` -- ``w += L * d`` directly in W;
* ``random`` -- ``w += L * r`` for a fresh random unit ``r`` flipped to face ``d``.

Metrics for every method are computed from the realized displacement
``w_{t+1} - w_t``; for ``bounded`` and ``ict`` that is ``M(z_{t+1}) - M(z_t)``.
Cumulative distance is the running sum of ``(w_{t+1} - w_t) . d``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import basis, mapnet
from .errors import BlsError, DegenerateFrameError, InputError, NumericError
from .fixtures import make_rng

#: Typical per-iteration W distances for generators of different scales,
#: keyed by the kind of data they model.
STEP_PRESETS = {
    "lhq-like": 2.0,
    "butterfly-like": 10.0,
    "ffhq-like": 20.0,
    "wikiart-like": 20.0,
    "semantic-like": 5.0,
    "eg3d-like": 20.0,
}


class Method(str, enum.Enum):
    BOUNDED = "bounded"
    LINEAR = "linear"
    RANDOM = "random"
    ICT = "ict"

    @property
    def uses_z(self) -> bool:
        return self in (Method.BOUNDED, Method.ICT)


@dataclass(frozen=True)
class TraversalConfig:
    method: Method = Method.BOUNDED
    steps: int = 500
    step_length: float = 2.0
    alpha: float = basis.DEFAULT_ALPHA
    sv_threshold: float = basis.DEFAULT_SV_THRESHOLD
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "method", Method(self.method))
        if self.steps < 1:
            raise InputError(f"steps must be >= 1, got {self.steps}")
        if not self.step_length > 0.0:
            raise InputError(f"step_length must be positive, got {self.step_length}")
        if not self.alpha > 0.0:
            raise InputError(f"alpha must be positive, got {self.alpha}")
        if not self.sv_threshold >= 0.0:
            raise InputError(f"sv_threshold must be non-negative, got {self.sv_threshold}")


@dataclass(frozen=True, eq=False)
class TraversalState:
    pair: mapnet.LatentPair
    direction: np.ndarray
    cum_dist: float = 0.0
    iter: int = 0


@dataclass(frozen=True)
class TraversalRecord:
    iter: int
    cos_sim: float
    step_len: float
    cum_dist: float
    w_norm: float


def initial_state(net, z, direction, method=Method.BOUNDED, w=None) -> TraversalState:
    direction = np.asarray(direction, dtype=np.float64)
    if abs(np.linalg.norm(direction) - 1.0) > 1e-9:
        raise InputError("direction must be a unit vector")
    z = np.asarray(z, dtype=np.float64)
    if w is None:
        w = mapnet.forward(net, z)
    if not Method(method).uses_z:
        z = None
    return TraversalState(mapnet.LatentPair(z, np.asarray(w, dtype=np.float64)), direction)


def _advance(state: TraversalState, z_next, w_next) -> tuple[TraversalState, TraversalRecord]:
    it = state.iter + 1
    if not np.all(np.isfinite(w_next)) or (z_next is not None and not np.all(np.isfinite(z_next))):
        raise NumericError("non-finite latent update", iteration=it)
    dw = w_next - state.pair.w
    step_len = float(np.linalg.norm(dw))
    if step_len > 0.0:
        cos = float(np.clip((dw @ state.direction) / step_len, -1.0, 1.0))
    else:
        cos = 0.0
    cum = state.cum_dist + float(dw @ state.direction)
    new_state = TraversalState(mapnet.LatentPair(z_next, w_next), state.direction, cum, it)
    record = TraversalRecord(it, cos, step_len, cum, float(np.linalg.norm(w_next)))
    return new_state, record


def bounded_target_update(net, state: TraversalState, config: TraversalConfig) -> basis.BoundedUpdate:
    """The clamped update the bounded method would apply from ``state``."""
    frame = basis.compute_frame(net, state.pair.z, config.alpha, config.sv_threshold)
    target = state.pair.w + config.step_length * state.direction
    return basis.bounded_update(frame, target)


def step_bounded(net, state: TraversalState, config: TraversalConfig):
    update = bounded_target_update(net, state, config)
    z_next = state.pair.z + update.delta_z
    w_next = mapnet.forward(net, z_next)
    return _advance(state, z_next, w_next)


def step_linear(state: TraversalState, config: TraversalConfig):
    w_next = state.pair.w + config.step_length * state.direction
    return _advance(state, None, w_next)


def step_random(state: TraversalState, config: TraversalConfig, rng: np.random.Generator):
    r = rng.standard_normal(state.direction.shape[0])
    r /= np.linalg.norm(r)
    if r @ state.direction < 0.0:
        r = -r
    w_next = state.pair.w + config.step_length * r
    return _advance(state, None, w_next)


def ict_axis(frame: basis.LocalFrame, direction) -> tuple[int, float]:
    """Index and sign of the retained Local Basis vector best aligned with ``direction``."""
    retained = frame.retained
    if not np.any(retained):
        raise DegenerateFrameError(
            f"all singular values are <= {frame.sv_threshold}; no direction to follow"
        )
    align = np.where(retained, np.abs(direction @ frame.sys.u), -1.0)
    i = int(np.argmax(align))
    if align[i] == 0.0:
        return 0, 1.0
    return i, (1.0 if direction @ frame.sys.u[:, i] >= 0.0 else -1.0)


def step_ict(net, state: TraversalState, config: TraversalConfig):
    frame = basis.compute_frame(net, state.pair.z, config.alpha, config.sv_threshold)
    try:
        i, sign = ict_axis(frame, state.direction)
    except DegenerateFrameError as exc:
        raise DegenerateFrameError(str(exc), iteration=state.iter + 1) from None
    scale = sign * config.step_length / frame.sys.sigma[i]
    z_next = state.pair.z + scale * frame.sys.v[:, i]
    w_next = mapnet.forward(net, z_next)
    return _advance(state, z_next, w_next)


def step(net, state: TraversalState, config: TraversalConfig, rng=None):
    method = config.method
    if method is Method.BOUNDED:
        return step_bounded(net, state, config)
    if method is Method.ICT:
        return step_ict(net, state, config)
    if method is Method.LINEAR:
        return step_linear(state, config)
    return step_random(state, config, rng)


def iter_traversal(net, config: TraversalConfig, init_z, direction, init_w=None):
    """Yield ``(state, record)`` after every step; errors carry the step index."""
    state = initial_state(net, init_z, direction, config.method, w=init_w)
    rng = make_rng(config.seed) if config.method is Method.RANDOM else None
    yield state, None
    for t in range(config.steps):
        try:
            state, record = step(net, state, config, rng)
        except NumericError as exc:
            if exc.iteration is None:
                raise type(exc)(str(exc), iteration=t + 1) from None
            raise
        except BlsError as exc:
            raise NumericError(str(exc), iteration=t + 1) from None
        yield state, record


def run_traversal(
    net,
    config: TraversalConfig,
    init_z,
    direction,
    init_w: Optional[np.ndarray] = None,
) -> list[TraversalRecord]:
    """Apply ``config.steps`` steps of ``config.method`` and return one record per step.

    ``init_w`` skips the initial forward pass when ``M(init_z)`` is already known.
    """
    steps = iter_traversal(net, config, init_z, direction, init_w)
    next(steps)
    return [record for _, record in steps]
