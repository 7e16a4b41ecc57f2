"""Seeded synthetic networks and latent samples.

Every random quantity in the package is drawn from numpy's Philox4x64
counter-based generator keyed by a ``SeedSequence`` built from integer keys,
see :func:`make_rng`. Key tuples in use:

- ``(seed, 0)``: mapping-network weights
- ``(seed, 1)``: feature-extractor weights
- ``(seed, 2)``: scorer weights
- ``(master_seed, i)``: initial code and direction of trajectory ``i``
- ``(master_seed, i, 1)``: seed of trajectory ``i``'s Random-traversal steps
- ``(feature_seed, 3)``: Frechet reference population
- ``(seed, 10)``: optimization task codes, targets and masks
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, replace
from typing import Optional

import numpy as np

from .errors import ConfigurationError
from .mapnet import LeakyRelu, Linear, MappingNetwork, Network, PixelNorm, Tanh

STREAM_MAPPING = 0
STREAM_EXTRACTOR = 1
STREAM_SCORER = 2
STREAM_REFERENCE = 3
STREAM_TASK = 10

BIAS_STD = 0.1
ACTIVATIONS = ("leaky_relu", "tanh")


def make_rng(*keys: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(k) for k in keys])))


def trajectory_rng(master_seed: int, index: int) -> np.random.Generator:
    return make_rng(master_seed, index)


def step_seed(master_seed: int, index: int) -> int:
    """64-bit seed for the Random-traversal step stream of trajectory ``index``."""
    state = np.random.SeedSequence([int(master_seed), int(index), 1]).generate_state(1, np.uint64)
    return int(state[0])


@dataclass(frozen=True)
class FixtureConfig:
    dim: int = 16
    depth: int = 4
    hidden_dim: Optional[int] = None  # defaults to 4 * dim
    activation: str = "leaky_relu"
    use_pixel_norm: bool = False
    seed: int = 0

    def __post_init__(self):
        if self.dim < 2:
            raise ConfigurationError(f"fixture dim must be >= 2, got {self.dim}")
        if self.depth < 1:
            raise ConfigurationError(f"fixture depth must be >= 1, got {self.depth}")
        if self.hidden_dim is not None and self.hidden_dim < 1:
            raise ConfigurationError(f"hidden_dim must be positive, got {self.hidden_dim}")
        if self.activation not in ACTIVATIONS:
            raise ConfigurationError(
                f"activation must be one of {ACTIVATIONS}, got {self.activation!r}"
            )
        if not 0 <= self.seed < 2**64:
            raise ConfigurationError(f"seed must be an unsigned 64-bit integer, got {self.seed}")

    @property
    def width(self) -> int:
        return self.hidden_dim if self.hidden_dim is not None else 4 * self.dim

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "FixtureConfig":
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise ConfigurationError(f"unknown fixture fields: {sorted(unknown)}")
        return cls(**d)

    def with_seed(self, seed: int) -> "FixtureConfig":
        return replace(self, seed=seed)


def _init_std(activation, fan_in, fan_out):
    if activation == "tanh":
        return np.sqrt(2.0 / (fan_in + fan_out))
    return np.sqrt(2.0 / fan_in)


def _activation(name):
    return Tanh() if name == "tanh" else LeakyRelu(0.2)


def _linear(rng, fan_in, fan_out, activation):
    std = _init_std(activation, fan_in, fan_out)
    weight = rng.standard_normal((fan_out, fan_in)) * std
    bias = rng.standard_normal(fan_out) * BIAS_STD
    return Linear(weight, bias)


def gen_mapping_network(cfg: FixtureConfig) -> MappingNetwork:
    """He/Xavier-initialized Linear layers with the activation between them."""
    rng = make_rng(cfg.seed, STREAM_MAPPING)
    layers = [PixelNorm()] if cfg.use_pixel_norm else []
    for k in range(cfg.depth):
        fan_in = cfg.dim if k == 0 else cfg.width
        fan_out = cfg.dim if k == cfg.depth - 1 else cfg.width
        layers.append(_linear(rng, fan_in, fan_out, cfg.activation))
        if k < cfg.depth - 1:
            layers.append(_activation(cfg.activation))
    return MappingNetwork(cfg.dim, layers)


def _two_layer(rng, dim, width, out_dim):
    return Network(
        dim,
        [_linear(rng, dim, width, "tanh"), Tanh(), _linear(rng, width, out_dim, "tanh")],
    )


def gen_feature_extractor(cfg: FixtureConfig, out_dim: Optional[int] = None) -> Network:
    """Fixed smooth net R^n -> R^m standing in for an image-feature embedding."""
    rng = make_rng(cfg.seed, STREAM_EXTRACTOR)
    return _two_layer(rng, cfg.dim, cfg.width, out_dim or cfg.dim)


def gen_scorer(cfg: FixtureConfig) -> Network:
    """Fixed smooth net R^n -> R standing in for a learned quality score."""
    rng = make_rng(cfg.seed, STREAM_SCORER)
    return _two_layer(rng, cfg.dim, cfg.width, 1)


def _dim(cfg):
    return cfg if isinstance(cfg, (int, np.integer)) else cfg.dim


def sample_z(cfg, rng: np.random.Generator) -> np.ndarray:
    """Standard normal code; ``cfg`` is a FixtureConfig or a plain dimension."""
    return rng.standard_normal(_dim(cfg))


def sample_direction(cfg, rng: np.random.Generator) -> np.ndarray:
    while True:
        d = rng.standard_normal(_dim(cfg))
        norm = np.linalg.norm(d)
        if norm > 0.0:
            return d / norm
