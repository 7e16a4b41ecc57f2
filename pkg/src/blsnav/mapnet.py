"""Feed-forward mapping networks with exact analytic Jacobians.

A network is an ordered stack of layers applied to a single latent vector.
Jacobians are accumulated in forward mode (``J <- D_k @ J``) in float64, so
``jacobian(net, z)[i, j]`` is ``d w_i / d z_j``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

import numpy as np

from .errors import ConfigurationError, InputError


def _frozen(a, ndim):
    arr = np.array(a, dtype=np.float64)
    if arr.ndim != ndim:
        raise ValueError(f"expected a {ndim}-d array, got shape {arr.shape}")
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class Linear:
    weight: np.ndarray
    bias: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "weight", _frozen(self.weight, 2))
        object.__setattr__(self, "bias", _frozen(self.bias, 1))
        if self.weight.shape[0] != self.bias.shape[0]:
            raise ConfigurationError(
                f"weight has {self.weight.shape[0]} rows but bias has length {self.bias.shape[0]}"
            )

    def out_dim(self, in_dim: int) -> int:
        if self.weight.shape[1] != in_dim:
            raise ConfigurationError(
                f"linear layer expects input dim {self.weight.shape[1]}, got {in_dim}"
            )
        return self.weight.shape[0]

    def forward(self, x):
        return self.weight @ x + self.bias

    def backprop(self, x, y, jac):
        return self.weight @ jac


@dataclass(frozen=True)
class LeakyRelu:
    slope: float = 0.2

    def __post_init__(self):
        if not 0.0 < self.slope < 1.0:
            raise ConfigurationError(f"leaky_relu slope must lie in (0, 1), got {self.slope}")

    def out_dim(self, in_dim: int) -> int:
        return in_dim

    def forward(self, x):
        return np.where(x > 0.0, x, self.slope * x)

    def backprop(self, x, y, jac):
        return np.where(x > 0.0, 1.0, self.slope)[:, None] * jac


@dataclass(frozen=True)
class Tanh:
    def out_dim(self, in_dim: int) -> int:
        return in_dim

    def forward(self, x):
        return np.tanh(x)

    def backprop(self, x, y, jac):
        return (1.0 - y * y)[:, None] * jac


@dataclass(frozen=True)
class PixelNorm:
    """``x / sqrt(mean(x**2) + epsilon)``, the StyleGAN input normalization."""

    epsilon: float = 1e-8

    def __post_init__(self):
        if not self.epsilon > 0.0:
            raise ConfigurationError(f"pixel_norm epsilon must be positive, got {self.epsilon}")

    def out_dim(self, in_dim: int) -> int:
        return in_dim

    def forward(self, x):
        return x / np.sqrt(np.mean(x * x) + self.epsilon)

    def backprop(self, x, y, jac):
        n = x.shape[0]
        s = np.mean(x * x) + self.epsilon
        inv = 1.0 / np.sqrt(s)
        # d y / d x = s^-1/2 I - x x^T s^-3/2 / n
        return inv * jac - np.outer(x, (x @ jac)) * (inv / (s * n))


Layer = Union[Linear, LeakyRelu, Tanh, PixelNorm]


@dataclass(frozen=True, eq=False)
class Network:
    """A stack of layers mapping R^input_dim to R^output_dim."""

    input_dim: int
    layers: tuple = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(self.layers))
        if int(self.input_dim) < 1:
            raise ConfigurationError(f"input_dim must be positive, got {self.input_dim}")
        dim = int(self.input_dim)
        for k, layer in enumerate(self.layers):
            try:
                dim = layer.out_dim(dim)
            except ConfigurationError as exc:
                raise ConfigurationError(str(exc), layer=k) from None
        object.__setattr__(self, "_dims", dim)

    @property
    def output_dim(self) -> int:
        return self._dims

    def __len__(self):
        return len(self.layers)


class MappingNetwork(Network):
    """A square network Z -> W; the Local Basis needs an n x n Jacobian."""

    def __post_init__(self):
        super().__post_init__()
        if self.output_dim != self.input_dim:
            raise ConfigurationError(
                f"mapping network must be square, got {self.input_dim} -> {self.output_dim}",
                layer=len(self.layers) - 1,
            )


@dataclass(frozen=True, eq=False)
class LatentPair:
    """An input code ``z`` and its image ``w = M(z)``.

    ``z`` is ``None`` for traversals that move in W only.
    """

    z: Optional[np.ndarray]
    w: np.ndarray


def _check_input(net: Network, z):
    z = np.asarray(z, dtype=np.float64)
    if z.ndim != 1 or z.shape[0] != net.input_dim:
        raise ConfigurationError(
            f"input has shape {z.shape}, network expects ({net.input_dim},)", layer=0
        )
    return z


def forward(net: Network, z) -> np.ndarray:
    x = _check_input(net, z)
    for layer in net.layers:
        x = layer.forward(x)
    return x


def forward_with_jacobian(net: Network, z) -> tuple[np.ndarray, np.ndarray]:
    x = _check_input(net, z)
    jac = np.eye(net.input_dim)
    for layer in net.layers:
        y = layer.forward(x)
        jac = layer.backprop(x, y, jac)
        x = y
    return x, jac


def jacobian(net: Network, z) -> np.ndarray:
    return forward_with_jacobian(net, z)[1]


def layer_inputs(net: Network, z) -> list[np.ndarray]:
    """Input vector seen by every layer, in order (used for kink checks)."""
    x = _check_input(net, z)
    seen = []
    for layer in net.layers:
        seen.append(x)
        x = layer.forward(x)
    return seen


def concat(first: Network, second: Network) -> Network:
    """Network computing ``second(first(z))``."""
    layers = first.layers + second.layers
    cls = MappingNetwork if second.output_dim == first.input_dim else Network
    return cls(first.input_dim, layers)


# --- JSON weight files -------------------------------------------------------


def layer_to_dict(layer: Layer) -> dict:
    if isinstance(layer, Linear):
        return {"type": "linear", "weight": layer.weight.tolist(), "bias": layer.bias.tolist()}
    if isinstance(layer, LeakyRelu):
        return {"type": "leaky_relu", "slope": float(layer.slope)}
    if isinstance(layer, Tanh):
        return {"type": "tanh"}
    if isinstance(layer, PixelNorm):
        return {"type": "pixel_norm", "epsilon": float(layer.epsilon)}
    raise TypeError(f"unknown layer type {type(layer).__name__}")


def layer_from_dict(d: dict, index: int = None) -> Layer:
    kind = d.get("type") if isinstance(d, dict) else None
    try:
        if kind == "linear":
            return Linear(d["weight"], d["bias"])
        if kind == "leaky_relu":
            return LeakyRelu(float(d.get("slope", 0.2)))
        if kind == "tanh":
            return Tanh()
        if kind == "pixel_norm":
            return PixelNorm(float(d.get("epsilon", 1e-8)))
    except ConfigurationError as exc:
        raise ConfigurationError(str(exc), layer=index) from None
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigurationError(f"malformed {kind} layer: {exc}", layer=index) from None
    raise ConfigurationError(f"unknown layer type {kind!r}", layer=index)


def network_to_dict(net: Network) -> dict:
    return {"input_dim": int(net.input_dim), "layers": [layer_to_dict(l) for l in net.layers]}


def network_from_dict(d: dict, square: bool = True) -> Network:
    if not isinstance(d, dict) or "input_dim" not in d or "layers" not in d:
        raise ConfigurationError("network object needs 'input_dim' and 'layers'")
    layers = [layer_from_dict(item, k) for k, item in enumerate(d["layers"])]
    cls = MappingNetwork if square else Network
    return cls(int(d["input_dim"]), layers)


def save_network(net: Network, path) -> None:
    Path(path).write_text(json.dumps(network_to_dict(net)) + "\n")


def load_network(path, square: bool = True) -> Network:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except OSError as exc:
        raise InputError(f"cannot read network file {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"{path}: invalid JSON ({exc})") from None
    try:
        return network_from_dict(data, square=square)
    except ConfigurationError as exc:
        err = ConfigurationError(f"{path}: {exc}")
        err.layer = exc.layer
        raise err from None
