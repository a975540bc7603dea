"""Dense neural network substrate written directly on numpy.

Matrices are float64 ``ndarray`` row batches (samples x features). A network
is a plain list of :class:`DenseLayer`; weights are stored ``out x in`` so a
layer computes ``activation(x @ W.T + b)``.
"""
from dataclasses import dataclass, field

import numpy as np

from .errors import NumericError, ShapeError

RELU = "relu"
SIGMOID = "sigmoid"
IDENTITY = "identity"
ACTIVATIONS = (RELU, SIGMOID, IDENTITY)

BCE_EPS = 1e-7


def as_matrix(values, name="input"):
    """2-d C-ordered float64 view or copy.

    Memory order changes the summation order inside matrix products, so
    forcing one layout keeps results bit-identical however the array was built.
    """
    m = np.ascontiguousarray(values, dtype=np.float64)
    if m.ndim == 1:
        m = m.reshape(1, -1)
    if m.ndim != 2:
        raise ShapeError(f"{name} must be 2-d", expected="(rows, cols)", got=m.shape)
    return m


def check_finite(values, what="values"):
    if not np.all(np.isfinite(values)):
        raise NumericError(f"non-finite entries detected in {what}")
    return values


# activations

def sigmoid(v):
    v = np.asarray(v, dtype=np.float64)
    out = np.empty_like(v)
    pos = v >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-v[pos]))
    e = np.exp(v[~pos])  # negative branch never overflows
    out[~pos] = e / (1.0 + e)
    return out


def activation_apply(kind, values):
    values = np.asarray(values, dtype=np.float64)
    if kind == RELU:
        return np.maximum(values, 0.0)
    if kind == SIGMOID:
        return sigmoid(values)
    if kind == IDENTITY:
        return values.copy()
    raise ValueError(f"unknown activation {kind!r}")


def activation_grad(kind, pre_activation):
    """Derivative of the activation, evaluated at the pre-activation values."""
    pre = np.asarray(pre_activation, dtype=np.float64)
    if kind == RELU:
        return (pre > 0).astype(np.float64)
    if kind == SIGMOID:
        s = sigmoid(pre)
        return s * (1.0 - s)
    if kind == IDENTITY:
        return np.ones_like(pre)
    raise ValueError(f"unknown activation {kind!r}")


# layers

@dataclass
class DenseLayer:
    weights: np.ndarray  # out x in
    biases: np.ndarray  # out
    activation: str = IDENTITY

    def __post_init__(self):
        self.weights = np.ascontiguousarray(self.weights, dtype=np.float64)
        self.biases = np.ascontiguousarray(self.biases, dtype=np.float64).reshape(-1)
        if self.weights.ndim != 2:
            raise ShapeError("weights must be 2-d", expected="(out, in)", got=self.weights.shape)
        if self.biases.shape[0] != self.weights.shape[0]:
            raise ShapeError("bias length must equal weight rows",
                             expected=self.weights.shape[0], got=self.biases.shape[0])
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {self.activation!r}")

    @property
    def n_in(self):
        return self.weights.shape[1]

    @property
    def n_out(self):
        return self.weights.shape[0]

    def copy(self):
        return DenseLayer(self.weights.copy(), self.biases.copy(), self.activation)


def init_dense(n_in, n_out, activation, rng, gain=1.0):
    """Scaled-uniform init, +-gain*sqrt(6/(fan_in+fan_out)), with zero biases.

    ``gain=4`` gives the classic sigmoid widening; it saturates sigmoid output
    layers at start and stalls training, so the default is 1.
    """
    limit = gain * np.sqrt(6.0 / (n_in + n_out))
    weights = rng.uniform(-limit, limit, (n_out, n_in))
    return DenseLayer(weights, np.zeros(n_out), activation)


def dense_forward(layer, inputs):
    x = as_matrix(inputs)
    if x.shape[1] != layer.n_in:
        raise ShapeError("dense_forward input width does not match layer",
                         expected=f"(batch, {layer.n_in}) for weights {layer.weights.shape}",
                         got=x.shape)
    return activation_apply(layer.activation, x @ layer.weights.T + layer.biases)


@dataclass
class ForwardCache:
    inputs: list = field(default_factory=list)
    pre_activations: list = field(default_factory=list)


def forward(network, inputs):
    """Run the layer chain; returns ``(output, cache)`` for :func:`backprop`."""
    x = as_matrix(inputs)
    cache = ForwardCache()
    for layer in network:
        if x.shape[1] != layer.n_in:
            raise ShapeError("layer input width mismatch",
                             expected=f"(batch, {layer.n_in})", got=x.shape)
        pre = x @ layer.weights.T + layer.biases
        cache.inputs.append(x)
        cache.pre_activations.append(pre)
        x = activation_apply(layer.activation, pre)
    return x, cache


def predict(network, inputs):
    return forward(network, inputs)[0]


def backprop(network, cache, grad_output):
    """Reverse accumulation through a cached forward pass.

    Returns ``(grads, grad_input)`` where ``grads`` is a list of
    ``(dW, db)`` per layer in network order.
    """
    if cache is None or len(cache.inputs) != len(network):
        raise ValueError("backprop needs the forward cache of this network")
    grad = as_matrix(grad_output, "grad_output")
    grads = [None] * len(network)
    for i in range(len(network) - 1, -1, -1):
        layer = network[i]
        pre = cache.pre_activations[i]
        if grad.shape != pre.shape:
            raise ShapeError("upstream gradient shape mismatch", expected=pre.shape, got=grad.shape)
        delta = grad * activation_grad(layer.activation, pre)
        grads[i] = (delta.T @ cache.inputs[i], delta.sum(axis=0))
        grad = delta @ layer.weights
    return grads, grad


# losses

def mse_loss(x, x_prime):
    """Mean squared error over every scalar entry; gradient is w.r.t. ``x_prime``."""
    x = np.asarray(x, dtype=np.float64)
    x_prime = np.asarray(x_prime, dtype=np.float64)
    if x.shape != x_prime.shape:
        raise ShapeError("mse_loss operands differ", expected=x.shape, got=x_prime.shape)
    n = x.size
    diff = x_prime - x
    loss = float(np.sum(diff * diff) / n)
    return loss, (2.0 / n) * diff


def bce_loss(predicted, target, eps=BCE_EPS):
    """Binary cross-entropy averaged over entries.

    Probabilities are clamped to ``[eps, 1 - eps]`` before the log; the
    gradient is taken w.r.t. the (clamped) probabilities.
    """
    p = np.asarray(predicted, dtype=np.float64)
    y = np.asarray(target, dtype=np.float64)
    if y.shape != p.shape:
        y = y.reshape(p.shape) if y.size == p.size else y
    if y.shape != p.shape:
        raise ShapeError("bce_loss operands differ", expected=p.shape, got=y.shape)
    if not np.all((y == 0) | (y == 1)):
        raise ValueError("bce_loss targets must be 0 or 1")
    p = np.clip(p, eps, 1.0 - eps)
    n = p.size
    loss = -float(np.sum(y * np.log(p) + (1.0 - y) * np.log1p(-p)) / n)
    grad = (p - y) / (p * (1.0 - p)) / n
    return loss, grad


# parameters and Adam

def params_of(network):
    """Flat parameter list ``[W0, b0, W1, b1, ...]`` (views, not copies)."""
    out = []
    for layer in network:
        out.extend((layer.weights, layer.biases))
    return out


def grads_flat(grads):
    out = []
    for dw, db in grads:
        out.extend((dw, db))
    return out


def with_params(network, params):
    if len(params) != 2 * len(network):
        raise ShapeError("parameter count mismatch", expected=2 * len(network), got=len(params))
    return [DenseLayer(params[2 * i], params[2 * i + 1], layer.activation)
            for i, layer in enumerate(network)]


def copy_network(network):
    return [layer.copy() for layer in network]


@dataclass
class AdamState:
    first_moment: list
    second_moment: list
    step: int = 0
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8

    def __post_init__(self):
        if not (0.0 < self.beta1 < 1.0 and 0.0 < self.beta2 < 1.0):
            raise ValueError("Adam betas must lie in (0, 1)")
        if self.epsilon <= 0:
            raise ValueError("Adam epsilon must be positive")
        if len(self.first_moment) != len(self.second_moment):
            raise ValueError("moment buffers disagree in length")


def adam_init(params, learning_rate=1e-3, beta1=0.9, beta2=0.999, epsilon=1e-8):
    return AdamState([np.zeros_like(p) for p in params], [np.zeros_like(p) for p in params],
                     0, learning_rate, beta1, beta2, epsilon)


def adam_step(params, grads, state):
    """One bias-corrected Adam update; returns ``(new_params, new_state)``."""
    if len(params) != len(grads) or len(params) != len(state.first_moment):
        raise ShapeError("adam_step parameter count mismatch",
                         expected=len(state.first_moment), got=(len(params), len(grads)))
    t = state.step + 1
    b1, b2 = state.beta1, state.beta2
    bc1 = 1.0 - b1 ** t
    bc2 = 1.0 - b2 ** t
    new_params, new_m, new_v = [], [], []
    for p, g, m, v in zip(params, grads, state.first_moment, state.second_moment):
        g = np.asarray(g, dtype=np.float64)
        if g.shape != p.shape or m.shape != p.shape:
            raise ShapeError("adam_step gradient shape mismatch", expected=p.shape, got=g.shape)
        m = b1 * m + (1.0 - b1) * g
        v = b2 * v + (1.0 - b2) * (g * g)
        m_hat = m / bc1
        v_hat = v / bc2
        new_params.append(p - state.learning_rate * m_hat / (np.sqrt(v_hat) + state.epsilon))
        new_m.append(m)
        new_v.append(v)
    return new_params, AdamState(new_m, new_v, t, state.learning_rate, b1, b2, state.epsilon)


def iterate_minibatches(n, batch_size, rng):
    """Shuffled index batches covering ``range(n)`` once; the last may be short."""
    order = rng.permutation(n)
    for start in range(0, n, batch_size):
        yield order[start:start + batch_size]
