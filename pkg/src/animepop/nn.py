"""A small feed-forward network engine on float64 numpy arrays.

Everything the regressors need is here: linear layers, tanh/relu/sigmoid
activations, inverted dropout, mean-squared-error loss, reverse-mode
gradients, and decoupled-weight-decay Adam. Forward passes cache what the
backward pass needs; gradients accumulate until zero_grad().

Shapes are (batch, features) throughout. All math stays in float64 so
training runs are reproducible to the last bit for a fixed seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import (
    BackwardBeforeForwardError,
    LayerChainError,
    NonFiniteError,
    ShapeMismatchError,
)

ACTIVATIONS = ("tanh", "relu", "sigmoid", "identity")


@dataclass(frozen=True)
class LinearSpec:
    """An affine map with an elementwise activation on its output."""

    in_dim: int
    out_dim: int
    activation: str = "identity"

    def __post_init__(self):
        if self.in_dim < 1 or self.out_dim < 1:
            raise ValueError(f"layer dimensions must be >= 1, got {self.in_dim}x{self.out_dim}")
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {self.activation!r}")


@dataclass(frozen=True)
class DropoutSpec:
    """Inverted dropout: train-time zeroing with 1/(1-rate) rescale."""

    rate: float

    def __post_init__(self):
        if not 0.0 <= self.rate < 1.0:
            raise ValueError(f"dropout rate must be in [0, 1), got {self.rate}")


LayerSpec = LinearSpec | DropoutSpec


@dataclass(frozen=True)
class MlpSpec:
    """An ordered layer chain with validated dimension flow.

    Dropout preserves width; each linear layer must consume exactly the
    width produced so far.
    """

    in_dim: int
    layers: tuple[LayerSpec, ...]

    def __post_init__(self):
        if self.in_dim < 1:
            raise ValueError(f"input dimension must be >= 1, got {self.in_dim}")
        width = self.in_dim
        for i, layer in enumerate(self.layers):
            if isinstance(layer, LinearSpec):
                if layer.in_dim != width:
                    raise LayerChainError(
                        f"layer {i} expects input width {layer.in_dim}, "
                        f"but the chain produces {width}"
                    )
                width = layer.out_dim

    @property
    def out_dim(self) -> int:
        width = self.in_dim
        for layer in self.layers:
            if isinstance(layer, LinearSpec):
                width = layer.out_dim
        return width


def activation_forward(name: str, z: np.ndarray) -> np.ndarray:
    if name == "tanh":
        return np.tanh(z)
    if name == "relu":
        return np.maximum(z, 0.0)
    if name == "sigmoid":
        # Branch on sign so exp never overflows for |z| up to 1e3 and beyond.
        out = np.empty_like(z)
        pos = z >= 0
        out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
        ez = np.exp(z[~pos])
        out[~pos] = ez / (1.0 + ez)
        return out
    if name == "identity":
        return z
    raise ValueError(f"unknown activation {name!r}")


def activation_backward(name: str, grad_out: np.ndarray, out: np.ndarray) -> np.ndarray:
    """Gradient through the activation, expressed via the cached output."""
    if name == "tanh":
        return grad_out * (1.0 - out * out)
    if name == "relu":
        return grad_out * (out > 0.0)
    if name == "sigmoid":
        return grad_out * out * (1.0 - out)
    if name == "identity":
        return grad_out
    raise ValueError(f"unknown activation {name!r}")


@dataclass
class LinearLayer:
    """Weights (out_dim, in_dim) and bias (out_dim,) with gradient buffers."""

    weight: np.ndarray
    bias: np.ndarray
    activation: str = "identity"
    grad_weight: np.ndarray = field(init=False)
    grad_bias: np.ndarray = field(init=False)

    def __post_init__(self):
        self.weight = np.asarray(self.weight, dtype=np.float64)
        self.bias = np.asarray(self.bias, dtype=np.float64)
        if self.weight.ndim != 2 or self.bias.ndim != 1:
            raise ShapeMismatchError(
                f"weight must be 2-d and bias 1-d, got {self.weight.shape} / {self.bias.shape}"
            )
        if self.weight.shape[0] != self.bias.shape[0]:
            raise ShapeMismatchError(
                f"bias length {self.bias.shape[0]} does not match "
                f"weight rows {self.weight.shape[0]}"
            )
        self.grad_weight = np.zeros_like(self.weight)
        self.grad_bias = np.zeros_like(self.bias)

    @property
    def in_dim(self) -> int:
        return self.weight.shape[1]

    @property
    def out_dim(self) -> int:
        return self.weight.shape[0]


def linear_forward(layer: LinearLayer, x: np.ndarray) -> np.ndarray:
    if x.ndim != 2 or x.shape[1] != layer.in_dim:
        raise ShapeMismatchError(
            f"expected input of shape (batch, {layer.in_dim}), got {x.shape}"
        )
    return x @ layer.weight.T + layer.bias


def dropout_forward(
    x: np.ndarray, rate: float, training: bool, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray | None]:
    """Returns (output, mask). Eval mode is the identity and draws nothing
    from the generator, so eval passes never perturb the training stream."""
    if not training or rate == 0.0:
        return x, None
    keep = rng.random(x.shape) >= rate
    scale = 1.0 / (1.0 - rate)
    return x * keep * scale, keep * scale


def mse_loss(pred: np.ndarray, target: np.ndarray) -> tuple[float, np.ndarray]:
    """Mean over every entry; also returns d(loss)/d(pred)."""
    if pred.shape != target.shape:
        raise ShapeMismatchError(
            f"prediction shape {pred.shape} does not match target shape {target.shape}"
        )
    diff = pred - target
    loss = float(np.mean(diff * diff))
    grad = (2.0 / diff.size) * diff
    return loss, grad


class Mlp:
    """A layer chain bound to concrete parameters, with reverse-mode gradients.

    forward() caches activations; backward() consumes the cache once and
    accumulates into each layer's gradient buffers. Dropout masks are drawn
    from the generator passed to forward, in layer order, so a run is
    reproducible whenever the caller seeds that generator.
    """

    def __init__(self, spec: MlpSpec, layers: Sequence[LinearLayer]):
        linear_specs = [l for l in spec.layers if isinstance(l, LinearSpec)]
        if len(linear_specs) != len(layers):
            raise LayerChainError(
                f"spec declares {len(linear_specs)} linear layers, got {len(layers)}"
            )
        for i, (ls, layer) in enumerate(zip(linear_specs, layers)):
            if (layer.out_dim, layer.in_dim) != (ls.out_dim, ls.in_dim):
                raise ShapeMismatchError(
                    f"linear layer {i} has shape {layer.weight.shape}, "
                    f"spec wants ({ls.out_dim}, {ls.in_dim})"
                )
            layer.activation = ls.activation
        self.spec = spec
        self.layers = list(layers)
        self._cache: list[tuple] | None = None

    def forward(
        self,
        x: np.ndarray,
        training: bool = False,
        rng: np.random.Generator | None = None,
    ) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.ndim != 2 or x.shape[1] != self.spec.in_dim:
            raise ShapeMismatchError(
                f"expected input of shape (batch, {self.spec.in_dim}), got {x.shape}"
            )
        if training and rng is None and any(
            isinstance(l, DropoutSpec) and l.rate > 0.0 for l in self.spec.layers
        ):
            raise ValueError("training forward through dropout needs a random generator")
        cache: list[tuple] = []
        cur = x
        li = 0
        for layer_spec in self.spec.layers:
            if isinstance(layer_spec, DropoutSpec):
                cur, mask = dropout_forward(cur, layer_spec.rate, training, rng)
                cache.append(("dropout", mask))
            else:
                layer = self.layers[li]
                z_in = cur
                z = linear_forward(layer, cur)
                cur = activation_forward(layer.activation, z)
                cache.append(("linear", li, z_in, cur))
                li += 1
            if not np.all(np.isfinite(cur)):
                raise NonFiniteError(
                    f"non-finite values after layer {len(cache) - 1}; "
                    "lower the learning rate or check the inputs"
                )
        self._cache = cache
        return cur

    def backward(self, grad_out: np.ndarray) -> np.ndarray:
        """Propagate d(loss)/d(output) back to d(loss)/d(input)."""
        if self._cache is None:
            raise BackwardBeforeForwardError("backward called before forward")
        cache, self._cache = self._cache, None
        grad = np.asarray(grad_out, dtype=np.float64)
        for entry in reversed(cache):
            if entry[0] == "dropout":
                mask = entry[1]
                if mask is not None:
                    grad = grad * mask
            else:
                _, li, z_in, out = entry
                layer = self.layers[li]
                gz = activation_backward(layer.activation, grad, out)
                layer.grad_weight += gz.T @ z_in
                layer.grad_bias += gz.sum(axis=0)
                grad = gz @ layer.weight
        return grad

    def parameters(self) -> list[np.ndarray]:
        out = []
        for layer in self.layers:
            out.append(layer.weight)
            out.append(layer.bias)
        return out

    def gradients(self) -> list[np.ndarray]:
        out = []
        for layer in self.layers:
            out.append(layer.grad_weight)
            out.append(layer.grad_bias)
        return out

    def zero_grad(self) -> None:
        for layer in self.layers:
            layer.grad_weight[...] = 0.0
            layer.grad_bias[...] = 0.0


def build_mlp(spec: MlpSpec, rng: np.random.Generator) -> Mlp:
    """Instantiate with weights uniform on +-sqrt(1/in_dim) and zero biases.

    Layers draw from the generator in declaration order, so a seeded
    generator fixes every parameter.
    """
    layers = []
    for layer_spec in spec.layers:
        if isinstance(layer_spec, LinearSpec):
            bound = float(np.sqrt(1.0 / layer_spec.in_dim))
            weight = rng.uniform(-bound, bound, size=(layer_spec.out_dim, layer_spec.in_dim))
            bias = np.zeros(layer_spec.out_dim)
            layers.append(LinearLayer(weight=weight, bias=bias, activation=layer_spec.activation))
    return Mlp(spec, layers)


class AdamW:
    """Adam with decoupled weight decay.

    Per step, with bias-corrected moments m_hat and v_hat:
        p *= 1 - lr * weight_decay
        p -= lr * m_hat / (sqrt(v_hat) + eps)
    Decay is applied to every parameter tensor handed in; callers that
    want bias tensors exempt should pass them to a separate instance.
    """

    def __init__(
        self,
        params: Sequence[np.ndarray],
        lr: float = 5e-2,
        betas: tuple[float, float] = (0.9, 0.999),
        eps: float = 1e-8,
        weight_decay: float = 0.01,
    ):
        if lr <= 0.0:
            raise ValueError(f"learning rate must be positive, got {lr}")
        if not (0.0 <= betas[0] < 1.0 and 0.0 <= betas[1] < 1.0):
            raise ValueError(f"betas must lie in [0, 1), got {betas}")
        if eps <= 0.0:
            raise ValueError(f"eps must be positive, got {eps}")
        if weight_decay < 0.0:
            raise ValueError(f"weight decay must be non-negative, got {weight_decay}")
        self.params = list(params)
        self.lr = lr
        self.beta1, self.beta2 = betas
        self.eps = eps
        self.weight_decay = weight_decay
        self.step_count = 0
        self.m = [np.zeros_like(p) for p in self.params]
        self.v = [np.zeros_like(p) for p in self.params]

    def step(self, grads: Sequence[np.ndarray]) -> None:
        if len(grads) != len(self.params):
            raise ShapeMismatchError(
                f"got {len(grads)} gradients for {len(self.params)} parameters"
            )
        self.step_count += 1
        t = self.step_count
        bc1 = 1.0 - self.beta1**t
        bc2 = 1.0 - self.beta2**t
        for p, g, m, v in zip(self.params, grads, self.m, self.v):
            if p.shape != g.shape:
                raise ShapeMismatchError(
                    f"gradient shape {g.shape} does not match parameter shape {p.shape}"
                )
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * (g * g)
            m_hat = m / bc1
            v_hat = v / bc2
            p *= 1.0 - self.lr * self.weight_decay
            p -= self.lr * m_hat / (np.sqrt(v_hat) + self.eps)
