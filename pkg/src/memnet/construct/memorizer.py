import logging
import math
from enum import Enum, auto
from fractions import Fraction

from memnet.core.network import ID, STEP, AffineLayer, StepIdNetwork
from memnet.core.scalar import ceil_div, ceil_log2, ceil_power, round_half_up
from memnet.errors import ArchitectureError, InvalidArgument, LabelRangeError

__doc__ = """Bit extraction memorizer

Labels of the floors [0, K) are packed A buckets of B floors at a time into A rational
parameters: w_a holds the D-bit label of floor aB + c in bits cD+1 .. cD+D of its binary
expansion. A network then

1. selects w_a and the in-bucket position x mod B (param_extract),
2. reads the D bits at position floor(x mod B) out of w_a (bit_extract or
   bit_extract_width3) and outputs them as the integer label.
"""

__all__ = [
    "MemorizerMode",
    "LabelEncoding",
    "encode_labels",
    "param_extract",
    "bit_extract",
    "bit_extract_width3",
    "bit_extract_params",
    "memorizer_shape",
    "gadget_block",
    "memorize_block",
]

logger = logging.getLogger(__name__)


class MemorizerMode(Enum):
    GADGET = auto()
    WIDTH3 = auto()

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        try:
            return cls[str(value).upper()]
        except KeyError:
            raise InvalidArgument(f"unknown memorizer mode {value!r}")


class LabelEncoding:
    """
    A parameters w_a in [0, 1), each holding B labels of D bits
    """

    def __init__(self, A, B, D, R, weights):
        self.A = A
        self.B = B
        self.D = D
        self.R = R
        self.weights = [Fraction(w) for w in weights]
        self._sanity_check()

    def _sanity_check(self):
        if min(self.A, self.B, self.D, self.R) < 1:
            raise InvalidArgument(f"A, B, D, R must be positive, got {self.A}, {self.B}, {self.D}, {self.R}")
        if len(self.weights) != self.A:
            raise InvalidArgument(f"{len(self.weights)} parameters for A = {self.A}")
        if any(not 0 <= w < 1 for w in self.weights):
            raise InvalidArgument("parameters must lie in [0, 1)")

    def bit(self, a, k):
        """k-th bit (1-based) of w_a."""
        return math.floor(self.weights[a] * 2**k) % 2

    def label(self, floor):
        a, c = divmod(floor, self.B)
        return math.floor(self.weights[a] * 2 ** ((c + 1) * self.D)) % 2**self.D

    def to_json(self):
        return {"A": self.A, "B": self.B, "D": self.D, "R": self.R}


def encode_labels(floor_labels, A, B, D, R=1):
    """
    w_a = sum_c y(aB + c) * 2^-(c+1)D; floors missing from floor_labels encode label 0
    @param: floor_labels {floor: label}
    """
    if floor_labels and max(floor_labels) >= A * B:
        raise InvalidArgument(f"floor {max(floor_labels)} outside [0, {A * B})")
    for floor, label in floor_labels.items():
        if not 0 <= label < 2**D:
            raise LabelRangeError(f"label {label} of floor {floor} needs more than {D} bits")
    weights = []
    for a in range(A):
        w = Fraction(0)
        for c in range(B):
            w += Fraction(floor_labels.get(a * B + c, 0), 2 ** ((c + 1) * D))
        weights.append(w)
    return LabelEncoding(A, B, D, R, weights)


def param_extract(enc, layer_widths=None):
    """
    Segment x -> (w_{floor(x/B)}, x mod B) on [0, A*B)
    :param enc: LabelEncoding
    :param layer_widths: hidden widths; each layer holds an x pass, a w pass and d-2
        bucket indicators 1[x >= iB]. Defaults to the single layer of A+2 neurons.
    """
    A, B = enc.A, enc.B
    widths = [A + 2] if layer_widths is None else list(layer_widths)
    if not widths or any(d < 2 for d in widths):
        raise ArchitectureError(f"bucket selection needs layers of width 2 or more, got {widths}")
    if sum(d - 2 for d in widths) < A:
        raise ArchitectureError(f"widths {widths} hold fewer than {A} bucket indicators")
    w = enc.weights

    def step_weight(g):
        # change of the selected parameter when indicator g fires; silent past A-1
        return w[g] - w[g - 1] if g < A else Fraction(0)

    layers = []
    in_dim, x_row, w_row, w_bias, fired = 1, {0: 1}, {0: 0}, w[0], []
    slot = 0
    for d in widths:
        layer = AffineLayer(in_dim)
        x_pass = dict(x_row)
        w_pass = dict(w_row)
        for col, g in fired:
            x_pass[col] = -B
            w_pass[col] = step_weight(g)
        layer.add_neuron(x_pass, 0, ID)
        layer.add_neuron(w_pass, w_bias, ID)
        current = []
        for i in range(1, d - 1):
            current.append((layer.add_neuron(x_pass, -i * B, STEP), slot + i))
        layers.append(layer.densify())
        slot += d - 2
        in_dim, x_row, w_row, w_bias, fired = layer.out_dim, {0: 1}, {1: 1}, 0, current
    output = AffineLayer(in_dim)
    w_out, x_out = {1: 1}, {0: 1}
    for col, g in fired:
        w_out[col] = step_weight(g)
        x_out[col] = -B
    output.add_neuron(w_out, 0, ID)
    output.add_neuron(x_out, 0, ID)
    return StepIdNetwork(layers + [output.densify()])


def _eta(i, j, R):
    """i-th most significant bit of the R-bit number j."""
    return (j >> (R - i)) & 1


def bit_extract(B, D, R):
    """
    Segment (x, w) -> sum_i u_{floor(x)D+i} * 2^(D-i) for x in [0, B), built from
    ceil(BD/R) two-layer gadgets that each strip an R-bit window off w.

    Gadget layer one: x pass, w pass, 2^R-1 thresholds 1[w >= j*2^-lR] and R upper window
    tests 1[x >= m_i + 1]. Layer two: x pass, w minus the window, and R AND gates firing
    for bit i of the window when m_i <= x < m_i + 1. Fired bits are parked below bit nR
    of w and the final map scales them up to the integer label.
    """
    if min(B, D, R) < 1:
        raise InvalidArgument(f"B, D, R must be positive, got {B}, {D}, {R}")
    n = ceil_div(B * D, R)
    thresholds = 2**R - 1

    def park(ell, i):
        return Fraction(1, 2 ** (n * R + ((ell - 1) * R + i - 1) % D + 1))

    layers = []
    in_dim, x_row, v_row = 2, {0: 1}, {1: 1}
    for ell in range(1, n + 1):
        unit = Fraction(1, 2 ** (ell * R))
        windows = [((ell - 1) * R + i - 1) // D for i in range(1, R + 1)]
        first = AffineLayer(in_dim)
        first.add_neuron(x_row, 0, ID)
        first.add_neuron(v_row, 0, ID)
        for j in range(1, thresholds + 1):
            first.add_neuron(v_row, -j * unit, STEP)
        for m in windows:
            first.add_neuron(x_row, -(m + 1), STEP)
        layers.append(first.densify())

        second = AffineLayer(first.out_dim)
        second.add_neuron({0: 1}, 0, ID)
        second.add_neuron({1: 1, **{1 + j: -unit for j in range(1, thresholds + 1)}}, 0, ID)
        for i, m in enumerate(windows, start=1):
            row = {0: 1, thresholds + 1 + i: -B}
            for j in range(1, thresholds + 1):
                change = _eta(i, j, R) - _eta(i, j - 1, R)
                if change:
                    row[1 + j] = B * change
            second.add_neuron(row, -m - B, STEP)
        layers.append(second.densify())
        in_dim = second.out_dim
        x_row = {0: 1}
        v_row = {1: 1, **{1 + i: park(ell, i) for i in range(1, R + 1)}}
    scale = 2 ** (n * R + D)
    output = AffineLayer(in_dim)
    output.add_neuron({col: value * scale for col, value in v_row.items()}, 0, ID)
    return StepIdNetwork(layers + [output.densify()])


def bit_extract_params(B, D, R):
    """Parameter count of bit_extract(B, D, R) in closed form."""
    n = ceil_div(B * D, R)
    per_gadget = (2 * R + 5) * 2**R + 2 * R * R + 8 * R + 7
    return per_gadget * n - R * 2**R - R * R + 3


def bit_extract_width3(B, D):
    """
    Width-3 segment (x, w) -> sum_i u_{floor(x)D+i} * 2^(D-i) with (2D+1)B hidden layers.
    Per bucket an h layer advances the position counter c (c < 0 only inside the bucket
    of x), then per bit a g layer strips bit l off w and an f layer parks it below bit DB
    when c says the bucket is the right one.
    """
    if min(B, D) < 1:
        raise InvalidArgument(f"B, D must be positive, got {B}, {D}")
    layers = []
    in_dim = 2
    c_row, c_bias = {0: 1}, 0
    w_row, w_bias = {1: 1}, 0

    def layer(third_row, third_bias):
        current = AffineLayer(in_dim)
        current.add_neuron(c_row, c_bias, ID)
        current.add_neuron(w_row, w_bias, ID)
        current.add_neuron(third_row, third_bias, STEP)
        layers.append(current)
        return current

    for bucket in range(B):
        in_dim = layer(c_row, c_bias).out_dim
        # c <- c - 1 + 3B * 1[c < 0]
        c_row, c_bias = {0: 1, 2: -3 * B}, 3 * B - 1
        w_row, w_bias = {1: 1}, 0
        for k in range(1, D + 1):
            ell = bucket * D + k
            bit = Fraction(1, 2**ell)
            in_dim = layer(w_row, w_bias - bit).out_dim
            c_row, c_bias = {0: 1}, 0
            w_row, w_bias = {1: 1, 2: -bit}, 0
            # 1[c - bit + 1 >= 0] is 0 exactly when the bit is set inside x's bucket
            in_dim = layer({0: 1, 2: -1}, 1).out_dim
            park = Fraction(1, 2 ** (D * B + (ell - 1) % D + 1))
            c_row, c_bias = {0: 1}, 0
            w_row, w_bias = {1: 1, 2: -park}, park
    scale = 2 ** (D * B + D)
    output = AffineLayer(in_dim)
    output.add_neuron({col: value * scale for col, value in w_row.items()}, w_bias * scale, ID)
    return StepIdNetwork(layers + [output])


def memorizer_shape(bound, p, classes, mode=MemorizerMode.GADGET, buckets=None):
    """
    (A, B, D, R) used for K = bound floors: A = ceil(K^p), B = ceil(K/A),
    R = max(1, round(1 + (p - 1/2) * log2 K)), D = max(1, ceil(log2 C)).
    An explicit bucket size B gives A = ceil(K/B) instead.
    """
    mode = MemorizerMode.parse(mode)
    if p is None and (buckets is None or mode == MemorizerMode.GADGET):
        raise InvalidArgument("the bucket exponent p is required")
    if buckets is not None:
        B = buckets
        A = ceil_div(bound, B)
    else:
        A = max(1, ceil_power(bound, p))
        B = ceil_div(bound, A)
    R = max(1, round_half_up(1 + (float(p) - 0.5) * math.log2(bound))) if mode == MemorizerMode.GADGET else 1
    D = max(1, ceil_log2(classes))
    return A, B, D, R


def gadget_block(enc, layer_widths=None):
    """
    Segment x -> label at floor(x) for an R-bit gadget encoding: param_extract, an ID
    layer swapping (w, x mod B) to (x mod B, w), then bit_extract(B, D, R).
    Single-layer selection costs 4A + 10 + bit_extract_params(B, D, R) parameters over
    2 ceil(BD/R) + 2 hidden layers.
    """
    segment = param_extract(enc, layer_widths)
    segment = segment.compose(StepIdNetwork.pass_through(2, order=[1, 0]))
    return segment.compose(bit_extract(enc.B, enc.D, enc.R))


def memorize_block(values, classes, p, mode=MemorizerMode.GADGET, buckets=None, layer_widths=None):
    """
    Segment mapping every value to its integer label
    :param values: ScalarizedDataset with distinct floors in [0, K)
    :param classes: class count C; C = 1 gives a constant 0 segment
    :param p: bucket count exponent, A = ceil(K^p); may be None with explicit buckets
    :param mode: GADGET (R-bit window gadgets) or WIDTH3 (width-3 bit chain)
    :param buckets: bucket size B overriding the K^p split
    :param layer_widths: param_extract widths; WIDTH3 defaults to A layers of width 3
    """
    if classes < 1:
        raise InvalidArgument(f"class count must be positive, got {classes}")
    mode = MemorizerMode.parse(mode)
    if classes == 1:
        return StepIdNetwork.constant(1, 0)
    A, B, D, R = memorizer_shape(values.bound, p, classes, mode, buckets)
    enc = encode_labels(values.floor_labels(), A, B, D, R)
    if mode == MemorizerMode.GADGET:
        segment = gadget_block(enc, layer_widths)
    else:
        widths = [3] * A if layer_widths is None else layer_widths
        segment = param_extract(enc, widths)
        segment = segment.compose(StepIdNetwork.permutation([1, 0]))
        segment = segment.compose(bit_extract_width3(B, D))
    stats = segment.stats()
    logger.info(
        "memorizer %s: A=%d B=%d D=%d R=%d, %d hidden layers, %d parameters",
        mode.name.lower(), A, B, D, R, stats.hidden_layers, stats.param_count,
    )
    return segment.with_meta(
        memorizer={
            **enc.to_json(),
            "mode": mode.name.lower(),
            "hidden_layers": stats.hidden_layers,
            "param_count": stats.param_count,
        }
    )
