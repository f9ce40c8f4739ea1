import bisect
import logging
from enum import Enum, auto

from memnet.core.network import ID, STEP, AffineLayer, StepIdNetwork
from memnet.core.scalar import ceil_div, ceil_log2
from memnet.errors import ArchitectureError, CompressionInfeasibleError, InvalidArgument, InvalidTargetError

__doc__ = """Compression rounds on well-separated scalars

Each round is a small STEP/ID fragment mapping values with distinct floors in [0, K) to
values with distinct floors in [0, T), T < K:

* halve_step folds the chunks [iT, (i+1)T) onto [0, T) with shifted modular maps, all in
  one hidden layer of width d;
* squeeze_step folds [T, K) onto [0, T) block by block, spreading its indicators over the
  given hidden layers.

Offsets are searched exhaustively, smallest valid first, so a chain is a pure function of
its input values.
"""

__all__ = ["CompressionMode", "halve_bound", "halve_step", "squeeze_step", "compress_chain"]

logger = logging.getLogger(__name__)


class CompressionMode(Enum):
    WIDTH3 = auto()
    BUDGET = auto()

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        try:
            return cls[str(value).upper()]
        except KeyError:
            raise InvalidArgument(f"unknown compression mode {value!r}")


def _round_record(kind, bound_in, bound_out, fragment, offsets=(), **extra):
    """JSON record of one round; sizes are those of the given fragment."""
    stats = fragment.stats()
    return {
        "kind": kind,
        "bound_in": bound_in,
        "bound_out": bound_out,
        "offsets": list(offsets),
        **extra,
        "hidden_layers": stats.hidden_layers,
        "param_count": stats.param_count,
    }


def halve_bound(n):
    """floor(N^2/4 + 1), the bound halving rounds stop at."""
    return n * n // 4 + 1


def _smallest_offset(shifted, occupied, bound):
    """Smallest b in [0, bound) with every (f + b) mod bound outside occupied."""
    for b in range(bound):
        if all((f + b) % bound not in occupied for f in shifted):
            return b
    return None


def _pass_layers(count):
    segment = StepIdNetwork.identity(1)
    for _ in range(count):
        segment = segment.compose(StepIdNetwork.pass_through(1))
    return segment


def halve_step(values, d=3):
    """
    One hidden layer of width d: x + sum_i c_i*1[x >= iT] - T*sum_i 1[x + b_i >= (i+1)T]
    @param: values ScalarizedDataset with distinct floors in [0, K)
    @param: d layer width, at least 3
    @return: (fragment, ScalarizedDataset bounded by T)
    """
    if d < 3:
        raise ArchitectureError(f"halving needs width 3 or more, got {d}")
    n, bound = values.size, values.bound
    m = (d - 1) // 2
    t = max(ceil_div(bound, m + 1), halve_bound(n))
    if bound <= t:
        return StepIdNetwork.pass_through(1), values
    floors = values.floors()
    occupied = {f for f in floors if f < t}
    offsets = []
    for i in range(1, m + 1):
        shifted = [f - i * t for f in floors if i * t <= f < (i + 1) * t]
        b = _smallest_offset(shifted, occupied, t)
        if b is None:
            raise CompressionInfeasibleError(f"no offset for chunk {i} at bound {t}")
        occupied.update((f + b) % t for f in shifted)
        offsets.append(b)
    logger.debug("halving %d -> %d, offsets %s", bound, t, offsets)

    hidden = AffineLayer(1)
    hidden.add_neuron({0: 1}, 0, ID)
    output = {0: 1}
    previous = 0
    for i, b in enumerate(offsets, start=1):
        indicator = hidden.add_neuron({0: 1}, -i * t, STEP)
        wrap = hidden.add_neuron({0: 1}, b - (i + 1) * t, STEP)
        output[indicator] = b - t if i == 1 else b - previous
        output[wrap] = -t
        previous = b
    out_layer = AffineLayer(hidden.out_dim)
    out_layer.add_neuron(output, 0, ID)
    fragment = StepIdNetwork([hidden, out_layer])

    mapped = []
    for value, f in zip(values.values, floors):
        i = f // t
        if i:
            b = offsets[i - 1]
            value = value + b - i * t - (t if value + b >= (i + 1) * t else 0)
        mapped.append(value)
    record = _round_record("halve", bound, t, fragment, offsets)
    return fragment.with_meta(round=record), values.with_values(mapped, t)


def _squeeze_blocks(floors, t, bound, c_param):
    """Breakpoints M_1 = T <= ... <= M_{C+1} = K with at most ceil(N/C) floors per block."""
    per_block = ceil_div(len(floors), c_param)
    upper = sorted(f for f in floors if f >= t)
    breakpoints = [t]
    for start in range(per_block, len(upper), per_block):
        breakpoints.append(upper[start])
    while len(breakpoints) < c_param:
        breakpoints.append(bound)
    if len(breakpoints) > c_param:
        raise CompressionInfeasibleError(f"{len(upper)} values above {t} need more than {c_param} blocks")
    breakpoints.append(bound)
    return breakpoints


def _indicator_layers(indicators, layer_widths):
    """Split (threshold, coefficient) pairs over the layers: d-2 slots per layer, d-1 in the last."""
    capacity = [w - 2 for w in layer_widths[:-1]] + [layer_widths[-1] - 1]
    layers, start = [], 0
    for slots in capacity:
        layers.append(indicators[start:start + slots])
        start += slots
    return layers


def _accumulator_segment(per_layer):
    """
    Chain of hidden layers [x-pass, acc, indicators...] (the last without x-pass) whose
    output is x + sum of coefficient * 1[x >= threshold] over all indicators
    """
    layers = []
    in_dim, x_col, acc_row, previous = 1, {0: 1}, {0: 1}, []
    for index, indicators in enumerate(per_layer):
        last = index == len(per_layer) - 1
        layer = AffineLayer(in_dim)
        if not last:
            layer.add_neuron(x_col, 0, ID)
        acc = dict(acc_row)
        for col, coefficient in previous:
            acc[col] = coefficient
        layer.add_neuron(acc, 0, ID)
        first = layer.out_dim
        for threshold, _ in indicators:
            layer.add_neuron(x_col, -threshold, STEP)
        layers.append(layer)
        previous = [(first + k, coefficient) for k, (_, coefficient) in enumerate(indicators)]
        in_dim, x_col, acc_row = layer.out_dim, {0: 1}, {1: 1}
    output = AffineLayer(in_dim)
    row = {first - 1: 1}
    for col, coefficient in previous:
        row[col] = coefficient
    output.add_neuron(row, 0, ID)
    return StepIdNetwork(layers + [output])


def squeeze_step(values, c_param, layer_widths, bound=None):
    """
    Folds [T, K) onto [0, T) in c_param blocks; T = min(K, max(N*ceil(N/C), ceil(K/2), bound))
    :param values: ScalarizedDataset with distinct floors in [0, K)
    :param c_param: number of blocks C
    :param layer_widths: hidden layer widths the fragment occupies, sum(d - 2) + 1 >= 2C
    :param bound: optional floor on T used to schedule rounds
    :return: (fragment, ScalarizedDataset bounded by T)
    """
    if c_param < 1:
        raise InvalidArgument(f"block count must be positive, got {c_param}")
    if not layer_widths or any(w < 2 for w in layer_widths):
        raise ArchitectureError(f"squeezing needs layers of width 2 or more, got {layer_widths}")
    if sum(w - 2 for w in layer_widths) + 1 < 2 * c_param:
        raise ArchitectureError(f"widths {layer_widths} cannot hold {2 * c_param} indicators")
    n, k = values.size, values.bound
    t = min(k, max(n * ceil_div(n, c_param), ceil_div(k, 2), bound or 0))
    if t >= k:
        return _pass_layers(len(layer_widths)), values
    floors = values.floors()
    breakpoints = _squeeze_blocks(floors, t, k, c_param)
    occupied = {f for f in floors if f < t}
    offsets = []
    for low, high in zip(breakpoints, breakpoints[1:]):
        shifted = [f - t for f in floors if low <= f < high]
        b = _smallest_offset(shifted, occupied, t)
        if b is None:
            raise CompressionInfeasibleError(f"no offset for block [{low}, {high}) at bound {t}")
        occupied.update((f + b) % t for f in shifted)
        offsets.append(b)
    logger.debug("squeezing %d -> %d, breakpoints %s, offsets %s", k, t, breakpoints, offsets)

    indicators = []
    for i, b in enumerate(offsets):
        low, high = breakpoints[i], breakpoints[i + 1]
        indicators.append((low, b - t if i == 0 else b - offsets[i - 1] + t))
        indicators.append((max(low, min(2 * t - b, high)), -t))
    fragment = _accumulator_segment(_indicator_layers(indicators, layer_widths))

    mapped = []
    for value, f in zip(values.values, floors):
        if f >= t:
            i = bisect.bisect_right(breakpoints, f) - 1
            b = offsets[i]
            value = value + b - t - (t if value + b >= 2 * t else 0)
        mapped.append(value)
    record = _round_record("squeeze", k, t, fragment, offsets, breakpoints=breakpoints, c_param=c_param)
    return fragment.with_meta(round=record), values.with_values(mapped, t)


def compress_chain(values, target_bound, mode=CompressionMode.WIDTH3):
    """
    Halve at width 3 down to floor(N^2/4 + 1), then squeeze on a schedule landing on
    target_bound. BUDGET squeezes use one wide layer plus a width-1 bypass layer,
    WIDTH3 squeezes 2C-1 layers of width 3.
    @return: (segment, ScalarizedDataset); segment.meta["compression"] lists the rounds
    """
    mode = CompressionMode.parse(mode)
    n = values.size
    if target_bound < n:
        raise InvalidTargetError(f"target bound {target_bound} is below the {n} distinct floors")
    segment = StepIdNetwork.identity(1)
    rounds = []

    def append(fragment):
        nonlocal segment
        record = fragment.meta.pop("round", None)
        if record is not None:
            stats = fragment.stats()
            record.update(hidden_layers=stats.hidden_layers, param_count=stats.param_count)
            rounds.append(record)
            logger.info(
                "compression %s: %d -> %d, %d hidden layers, %d parameters",
                record["kind"], record["bound_in"], record["bound_out"],
                stats.hidden_layers, stats.param_count,
            )
        segment = segment.compose(fragment)

    while values.bound > max(halve_bound(n), target_bound):
        fragment, values = halve_step(values, 3)
        append(fragment)
    if values.bound > target_bound:
        count = ceil_log2(ceil_div(values.bound, target_bound))
        for i in range(1, count + 1):
            scheduled = target_bound * 2 ** (count - i)
            c_param = ceil_div(4 * n * n, values.bound)
            if mode == CompressionMode.BUDGET:
                fragment, values = squeeze_step(values, c_param, [2 * c_param + 1], scheduled)
                bypass = fragment.compose(StepIdNetwork.pass_through(1))
                fragment = bypass.with_meta(round=fragment.meta.get("round"))
            else:
                fragment, values = squeeze_step(values, c_param, [3] * (2 * c_param - 1), scheduled)
            append(fragment)
    segment.meta["compression"] = rounds
    return segment, values
