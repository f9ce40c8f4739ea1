import logging
import math
from fractions import Fraction

import mpmath
import numpy as np

from memnet.config import executor
from memnet.core.evaluate import DOUBLE_PRECISION, evaluate_float_batch, trace_exact
from memnet.core.network import AffineLayer, SigmoidNetwork, StepIdNetwork, sigma_tag
from memnet.errors import ApproxSearchError, InvalidArgument, NumericOverflowError, TransformBudgetError
from memnet.sigmoid.kinds import get_kind

__doc__ = """STEP/ID to sigmoidal conversion

Every hidden neuron is replaced by a * sigma(c * v + d) + b, with a and b folded into the
next layer, so the converted network keeps the exact layer shape of its source:

* STEP neurons use approx_step: a = 1/(beta - alpha), b = -alpha/(beta - alpha), c = k/delta
  where delta is the neuron's smallest |pre-activation| on the dataset;
* ID neurons use approx_id: d = z, c shrunk until the local linearization of sigma is
  accurate over the neuron's value range.

transform() replaces the hidden layers back to front and checks every stage on the dataset
against a budget of eps / L. A neuron's tolerance is the stage tolerance divided by the
gain of the already converted layer after it, and a stage over budget is retried with the
tolerance cut in proportion to its deviation. exact_hardtanh() builds a hard tanh twin
that is exact on the dataset.
"""

__all__ = ["nudge", "margin", "approx_step", "approx_id", "transform", "exact_hardtanh"]

logger = logging.getLogger(__name__)

_MAX_DOUBLINGS = 64
_MAX_HALVINGS = 200
_GRID_POINTS = 257
_CHECK_PRECISION = 113
_SMALLEST_TOLERANCE = 1e-290


def _check_bits(tolerance):
    """Working precision that resolves errors well below tolerance."""
    return max(_CHECK_PRECISION, math.ceil(-math.log2(tolerance)) + 64)


def _traces(net, ds):
    with executor(ds.size) as pool:
        return list(pool.map(lambda x: trace_exact(net, x), ds.points))


def _column(traces, index, row, part=0):
    return [trace[index][part][row] for trace in traces]


def nudge(net, ds):
    """
    Copy of net where every STEP neuron that sees an exact 0 on the dataset has its bias
    raised by half its smallest nonzero |pre-activation| (1 when there is none).
    The copy agrees with net exactly on ds.
    """
    traces = _traces(net, ds)
    layers = [layer.copy() for layer in net.layers]
    moved = 0
    for index, layer in enumerate(layers[:-1]):
        for row, tag in enumerate(layer.activations):
            if not tag.is_step:
                continue
            pres = _column(traces, index, row)
            if any(p == 0 for p in pres):
                nonzero = [abs(p) for p in pres if p != 0]
                layer.biases[row] += min(nonzero) / 2 if nonzero else Fraction(1)
                moved += 1
    if moved:
        logger.debug("nudged %d STEP biases", moved)
    return StepIdNetwork(layers, net.input_dim, net.meta)


def _step_margins(net, traces):
    """{(layer, row): smallest |pre-activation|} over the STEP neurons of net."""
    margins = {}
    for index, layer in enumerate(net.layers[:-1]):
        for row, tag in enumerate(layer.activations):
            if tag.is_step:
                margins[(index, row)] = min(abs(p) for p in _column(traces, index, row))
    return margins


def margin(net, ds):
    """
    Smallest |pre-activation| of a STEP neuron over ds, after nudging
    @return: positive Fraction, or None when net has no STEP neuron
    """
    nudged = nudge(net, ds)
    margins = _step_margins(nudged, _traces(nudged, ds))
    return min(margins.values()) if margins else None


def approx_step(kind, eps, delta):
    """
    (a, b, c) with |a*sigma(c*x) + b - 1[x >= 0]| < eps whenever |x| >= delta
    """
    kind = get_kind(kind)
    eps, delta = float(eps), float(delta)
    if not eps > 0 or not delta > 0:
        raise InvalidArgument(f"eps and delta must be positive, got {eps} and {delta}")
    gap = kind.beta - kind.alpha
    tolerance = abs(gap) * eps
    k = 1.0
    with mpmath.workprec(_check_bits(tolerance)):
        for _ in range(_MAX_DOUBLINGS):
            low = abs(kind.mp(mpmath.mpf(-k)) - kind.alpha)
            high = abs(kind.mp(mpmath.mpf(k)) - kind.beta)
            if low < tolerance and high < tolerance:
                return 1 / gap, -kind.alpha / gap, k / delta
            k *= 2
    raise ApproxSearchError(f"{kind.name} does not saturate within {eps} below k = {k}")


def _id_error(kind, a, b, c, d, xs, limit):
    """max |a*sigma(c*x + d) + b - x| over xs, in float64 while its rounding stays far below limit."""
    xs = np.asarray(xs, dtype=float)
    rounding = (abs(a) * max(abs(kind.alpha), abs(kind.beta), 1.0) + float(np.max(np.abs(xs)))) * 2.0**-50
    if rounding < limit / 16:
        return float(np.max(np.abs(a * kind.numpy(c * xs + d) + b - xs), initial=0.0))
    with mpmath.workprec(_check_bits(limit)):
        a, b, c, d = (mpmath.mpf(v) for v in (a, b, c, d))
        worst = max(abs(a * kind.mp(c * mpmath.mpf(x) + d) + b - mpmath.mpf(x)) for x in xs)
    return float(worst)


def approx_id(kind, eps, interval, points=None):
    """
    (a, b, c, d) with |a*sigma(c*x + d) + b - x| < eps over interval
    :param interval: (lo, hi), finite
    :param points: values the result must also be accurate on, typically the realized
        pre-activations
    """
    kind = get_kind(kind)
    eps = float(eps)
    lo, hi = (float(v) for v in interval)
    if not eps > 0:
        raise InvalidArgument(f"eps must be positive, got {eps}")
    if not (math.isfinite(lo) and math.isfinite(hi)) or lo > hi:
        raise InvalidArgument(f"invalid interval [{lo}, {hi}]")
    z, slope = kind.smooth_point, kind.derivative
    offset = kind(z)
    grid = np.linspace(lo, hi, _GRID_POINTS)
    extra = None if points is None else np.array([float(p) for p in points], dtype=float)
    c = 1.0
    for _ in range(_MAX_HALVINGS):
        a, b = 1 / (c * slope), -offset / (c * slope)
        if _id_error(kind, a, b, c, z, grid, eps / 2) < eps / 2:
            if extra is None or _id_error(kind, a, b, c, z, extra, eps) < eps:
                return a, b, c, z
        c /= 2
    raise ApproxSearchError(f"{kind.name} is not linear enough on [{lo}, {hi}] for eps {eps}")


def _round_bits(value, precision):
    """Nearest binary float with the given mantissa bits, as an exact Fraction."""
    value = Fraction(value)
    if precision <= DOUBLE_PRECISION:
        return Fraction(float(value))
    if value == 0:
        return value
    exponent = abs(value.numerator).bit_length() - value.denominator.bit_length()
    shift = precision - exponent
    if shift >= 0:
        return Fraction(round(value * 2**shift), 2**shift)
    return Fraction(round(value / 2**-shift) * 2**-shift)


def _convert_layer(layer, in_params, out_params, tag, rounding):
    """
    Layer computing c * (W (a * u + b) + bias) + d on the outputs u of the converted
    previous layer
    @param: in_params per-input (a, b, c, d) of the previous layer, None if it is unconverted
    @param: out_params per-neuron (a, b, c, d) of this layer, None for the output layer
    """
    weights, biases = {}, []
    for row, (entries, bias) in enumerate(zip(layer.rows(), layer.biases)):
        c, d = (out_params[row][2], out_params[row][3]) if out_params else (1, 0)
        total = Fraction(bias)
        for col, weight in entries:
            a_in, b_in = (in_params[col][0], in_params[col][1]) if in_params else (1, 0)
            weights[(row, col)] = rounding(c * weight * a_in)
            total += weight * b_in
        biases.append(rounding(c * total + d))
    activations = [tag] * layer.out_dim if out_params else list(layer.activations)
    return AffineLayer(layer.in_dim, weights, biases, activations)


def _exact_params(params):
    return [tuple(Fraction(v) for v in p) for p in params]


def _sensitivities(next_layer, next_params, kind):
    """
    Per-input bound on how much the converted next layer amplifies an error on that input:
    sum over rows of |weight| * |a * c| * sigma'(z), or |weight| for the output layer
    """
    gains = [Fraction(0)] * next_layer.in_dim
    slope = abs(Fraction(kind.derivative))
    for row, entries in enumerate(next_layer.rows()):
        gain = abs(next_params[row][0] * next_params[row][2]) * slope if next_params else Fraction(1)
        for col, weight in entries:
            gains[col] += abs(weight) * gain
    return [max(Fraction(1), g) for g in gains]


def _layer_params(layer, index, traces, kind, tolerance, gains):
    params = []
    for row, tag in enumerate(layer.activations):
        pres = _column(traces, index, row)
        tolerance_row = float(Fraction(tolerance) / gains[row])
        if tolerance_row < _SMALLEST_TOLERANCE:
            raise ApproxSearchError(f"neuron tolerance {tolerance_row:.3g} underflows at layer {index + 1}")
        if tag.is_step:
            delta = min(abs(p) for p in pres)
            a, b, c = approx_step(kind, tolerance_row, delta)
            params.append((a, b, c, 0.0))
        else:
            params.append(approx_id(kind, tolerance_row, (min(pres), max(pres)), pres))
    return _exact_params(params)


def _log2_ceiling(value):
    """Upper bound on log2 of a positive Fraction."""
    value = Fraction(value)
    return value.numerator.bit_length() - value.denominator.bit_length() + 1


def _initial_precision(source, traces, eps):
    """Mantissa bits covering the weight range, the smallest margin and the tolerance."""
    magnitude = max(
        (abs(Fraction(v)) for layer in source.layers for v in list(layer.weights.values()) + layer.biases),
        default=Fraction(1),
    )
    margins = _step_margins(source, traces)
    delta = min(margins.values()) if margins else Fraction(1)
    bits = (
        max(0, _log2_ceiling(magnitude + 1))
        + max(0, _log2_ceiling(1 / delta))
        + max(0, math.ceil(math.log2(source.hidden_layers / eps)))
        + 10
    )
    if bits <= DOUBLE_PRECISION:
        return DOUBLE_PRECISION
    return 32 * math.ceil(bits / 32)


class _StageFailure(Exception):
    def __init__(self, stage, deviation):
        super().__init__(f"stage {stage} deviation {deviation}")
        self.stage = stage
        self.deviation = deviation


def _convert_at(source, ds, traces, target, eps, kind, precision, max_tightening):
    """Back to front conversion at a fixed precision; raises _StageFailure."""
    hidden = source.hidden_layers
    tag = sigma_tag(kind.name)
    budget = eps / hidden

    def rounding(value):
        return _round_bits(value, precision)

    params = [None] * hidden
    converted = [None] * hidden + [source.layers[-1].copy()]
    previous = target
    deviations = [None] * hidden
    for h in reversed(range(hidden)):
        inputs = ds.points if h == 0 else [trace[h - 1][1] for trace in traces]
        next_params = params[h + 1] if h + 1 < hidden else None
        gains = _sensitivities(source.layers[h + 1], next_params, kind)
        tolerance = budget
        deviation = math.inf
        for _ in range(max_tightening):
            try:
                params[h] = _layer_params(source.layers[h], h, traces, kind, tolerance, gains)
            except ApproxSearchError as e:
                logger.debug("stage %d: %s", h + 1, e)
                raise _StageFailure(h + 1, deviation)
            converted[h] = _convert_layer(source.layers[h], None, params[h], tag, rounding)
            converted[h + 1] = _convert_layer(
                source.layers[h + 1], params[h], next_params, tag, rounding
            )
            hybrid = SigmoidNetwork(converted[h:], kind, precision=precision)
            try:
                outputs = evaluate_float_batch(hybrid, inputs)[:, 0]
            except NumericOverflowError:
                raise _StageFailure(h + 1, math.inf)
            deviation = float(np.max(np.abs(outputs - previous)))
            if deviation < budget:
                break
            # secant step: the deviation scales about linearly with the tolerance
            tolerance *= min(0.5, max(2.0**-16, budget / (4 * deviation)))
            logger.warning(
                "stage %d deviates by %.3g (budget %.3g), retrying with neuron tolerance %.3g",
                h + 1, deviation, budget, tolerance,
            )
        else:
            raise _StageFailure(h + 1, deviation)
        logger.debug("stage %d converted, deviation %.3g", h + 1, deviation)
        deviations[h] = deviation
        previous = outputs
    return converted, previous, deviations


def transform(net, ds, eps, kind, max_tightening=40, max_precision=1024):
    """
    Sigmoidal network with the shape of net, within eps of net on every point of ds
    :param net: StepIdNetwork exact on ds
    :param eps: total tolerance; each of the L stages gets eps / L
    :param kind: SigmoidalKind or registered name
    :param max_tightening: halvings of a stage's neuron tolerance before raising the precision
    :param max_precision: mantissa bits beyond which the conversion gives up
    :raise TransformBudgetError: a stage stays above its budget at every allowed precision
    """
    kind = get_kind(kind)
    eps = float(eps)
    if not eps > 0:
        raise InvalidArgument(f"eps must be positive, got {eps}")
    source = nudge(net, ds)
    meta = {**net.meta, "sigma": kind.name, "eps_target": eps}
    if source.hidden_layers == 0:
        layers = [layer.copy() for layer in source.layers]
        return SigmoidNetwork(layers, kind, source.input_dim, meta, eps=0.0, stage_deviations=[])

    traces = _traces(source, ds)
    target = np.array([float(trace[-1][1][0]) for trace in traces])
    precision = _initial_precision(source, traces, eps)
    while True:
        try:
            layers, outputs, deviations = _convert_at(
                source, ds, traces, target, eps, kind, precision, max_tightening
            )
            break
        except _StageFailure as failure:
            if precision * 2 > max_precision:
                raise TransformBudgetError(
                    f"stage {failure.stage} stays at deviation {failure.deviation:.3g} "
                    f"above eps/L = {eps / source.hidden_layers:.3g} up to {precision} bits"
                )
            precision *= 2
            logger.warning("stage %d failed, raising precision to %d bits", failure.stage, precision)
    achieved = float(np.max(np.abs(outputs - target)))
    logger.info(
        "converted %d hidden layers to %s at %d bits, max deviation %.3g (eps %.3g)",
        source.hidden_layers, kind.name, precision, achieved, eps,
    )
    return SigmoidNetwork(
        layers, kind, source.input_dim, meta, eps=achieved, precision=precision, stage_deviations=deviations
    )


def exact_hardtanh(net, ds):
    """
    Hard tanh twin of net, exact on ds: STEP(v) = (hard_tanh(v/delta) + 1)/2 with delta the
    neuron's margin, ID(v) = M * hard_tanh(v/M) with M above the neuron's largest |v|
    """
    kind = get_kind("hard_tanh")
    source = nudge(net, ds)
    traces = _traces(source, ds)
    tag = sigma_tag(kind.name)
    half = Fraction(1, 2)
    params = []
    for index, layer in enumerate(source.layers[:-1]):
        layer_params = []
        for row, activation in enumerate(layer.activations):
            pres = _column(traces, index, row)
            if activation.is_step:
                layer_params.append((half, half, 1 / min(abs(p) for p in pres), Fraction(0)))
            else:
                scale = max(abs(p) for p in pres) + 1
                layer_params.append((scale, Fraction(0), 1 / scale, Fraction(0)))
        params.append(layer_params)
    layers = []
    for index, layer in enumerate(source.layers):
        in_params = params[index - 1] if index > 0 else None
        out_params = params[index] if index < len(params) else None
        layers.append(_convert_layer(layer, in_params, out_params, tag, Fraction))
    meta = {**net.meta, "sigma": kind.name, "eps_target": 0}
    return SigmoidNetwork(layers, kind, source.input_dim, meta, eps=0.0, stage_deviations=[])
