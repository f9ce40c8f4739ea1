import logging
from fractions import Fraction

import mpmath
import numpy as np

from memnet.core.network import ActivationKind
from memnet.errors import InputShapeError, InvalidArgument, NumericOverflowError

__doc__ = """Forward evaluation

evaluate_exact runs a network over Fractions: STEP(v) is 1 iff v >= 0 exactly. Hard tanh
networks with rational parameters are evaluated exactly too.
evaluate_float runs the standard forward pass in double precision with numpy, or with
mpmath when the network asks for more mantissa bits than a double has.
"""

__all__ = [
    "DOUBLE_PRECISION",
    "evaluate_exact",
    "trace_exact",
    "evaluate_float",
    "evaluate_float_batch",
]

logger = logging.getLogger(__name__)

DOUBLE_PRECISION = 53


def _check_input(net, x, start=0):
    expected = net.layers[start].in_dim
    if len(x) != expected:
        raise InputShapeError(f"input has {len(x)} entries, network expects {expected}")


def _exact_activation(tag, kind, value):
    if tag.kind == ActivationKind.ID:
        return value
    if tag.kind == ActivationKind.STEP:
        return Fraction(1) if value >= 0 else Fraction(0)
    if kind is None or kind.exact is None:
        raise InvalidArgument(f"activation {tag} has no exact evaluation")
    return kind.exact(value)


def trace_exact(net, x):
    """
    Exact forward pass keeping every layer's pre-activations and outputs
    :return: list of (pre_activations, outputs), one pair per layer
    """
    _check_input(net, x)
    kind = getattr(net, "kind", None)
    values = [Fraction(v) for v in x]
    trace = []
    for layer in net.layers:
        pre = layer.pre_activations(values)
        values = [_exact_activation(tag, kind, v) for tag, v in zip(layer.activations, pre)]
        trace.append((pre, values))
    return trace


def evaluate_exact(net, x):
    """Exact output vector of net at x."""
    return [Fraction(v) for v in trace_exact(net, x)[-1][1]]


def evaluate_float(net, x):
    """Scalar output of a single-output network at x, as a float."""
    if net.output_dim != 1:
        raise InputShapeError(f"evaluate_float needs a single output, network has {net.output_dim}")
    return float(evaluate_float_batch(net, [x])[0, 0])


def evaluate_float_batch(net, inputs, start=0):
    """
    Float forward pass over a batch of inputs
    :param start: index of the first layer to run; the inputs then feed that layer
    :return: numpy array of shape (len(inputs), output_dim); mpmath runs are returned as
    float64 after the pass has completed in high precision
    """
    for x in inputs:
        _check_input(net, x, start)
    precision = getattr(net, "precision", DOUBLE_PRECISION)
    if precision <= DOUBLE_PRECISION:
        return _numpy_forward(net, inputs, start)
    return _mp_forward(net, inputs, precision, start)


def _dense_layers(net):
    cached = getattr(net, "_dense_cache", None)
    if cached is None:
        cached = []
        for layer in net.layers:
            matrix = np.zeros((layer.out_dim, layer.in_dim))
            for (row, col), weight in layer.weights.items():
                matrix[row, col] = float(weight)
            bias = np.array([float(b) for b in layer.biases])
            cached.append((matrix, bias))
        net._dense_cache = cached
    return cached


def _numpy_forward(net, inputs, start):
    kind = getattr(net, "kind", None)
    width = net.layers[start].in_dim
    values = np.array([[float(v) for v in x] for x in inputs], dtype=float).reshape(len(inputs), width)
    with np.errstate(over="ignore", invalid="ignore"):
        for layer, (matrix, bias) in zip(net.layers[start:], _dense_layers(net)[start:]):
            pre = values @ matrix.T + bias
            out = pre.copy()
            for col, tag in enumerate(layer.activations):
                if tag.kind == ActivationKind.STEP:
                    out[:, col] = (pre[:, col] >= 0).astype(float)
                elif tag.kind == ActivationKind.SIGMA:
                    out[:, col] = kind.numpy(pre[:, col])
            if not np.all(np.isfinite(out)):
                raise NumericOverflowError("non-finite value in float forward pass")
            values = out
    return values


def _to_mpf(value):
    value = Fraction(value)
    return mpmath.mpf(value.numerator) / value.denominator


def _mp_rows(net, precision):
    cache = getattr(net, "_mp_cache", None)
    if cache is None or cache[0] != precision:
        with mpmath.workprec(precision):
            rows = [
                (
                    [[(c, _to_mpf(w)) for c, w in row] for row in layer.rows()],
                    [_to_mpf(b) for b in layer.biases],
                )
                for layer in net.layers
            ]
        cache = (precision, rows)
        net._mp_cache = cache
    return cache[1]


def _mp_forward(net, inputs, precision, start):
    kind = getattr(net, "kind", None)
    layer_rows = _mp_rows(net, precision)
    result = np.zeros((len(inputs), net.output_dim))
    with mpmath.workprec(precision):
        for index, x in enumerate(inputs):
            values = [_to_mpf(v) if not isinstance(v, mpmath.mpf) else v for v in x]
            for layer, (rows, biases) in zip(net.layers[start:], layer_rows[start:]):
                pre = [mpmath.fsum([w * values[c] for c, w in row]) + b for row, b in zip(rows, biases)]
                out = []
                for tag, v in zip(layer.activations, pre):
                    if tag.kind == ActivationKind.STEP:
                        out.append(mpmath.mpf(1) if v >= 0 else mpmath.mpf(0))
                    elif tag.kind == ActivationKind.SIGMA:
                        out.append(kind.mp(v))
                    else:
                        out.append(v)
                if any(not mpmath.isfinite(v) for v in out):
                    raise NumericOverflowError("non-finite value in float forward pass")
                values = out
            result[index, :] = [float(v) for v in values]
    return result
