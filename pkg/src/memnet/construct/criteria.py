import logging
import math
from fractions import Fraction

from memnet.construct.compression import halve_bound, halve_step, squeeze_step
from memnet.construct.memorizer import MemorizerMode, memorize_block
from memnet.construct.pipeline import BuildReport
from memnet.construct.projection import find_direction, scalarize
from memnet.construct.separateness import measure
from memnet.core.network import ID, AffineLayer, StepIdNetwork
from memnet.core.scalar import PI_UPPER, ceil_div, ceil_log2, ceil_sqrt, to_exact, upper_sqrt
from memnet.errors import ArchitectureError, CertificateError, InvalidArgument
from memnet.version import VERSION

__doc__ = """Capacity certificates for fixed architectures

An architecture (hidden widths d_1..d_L, all >= 3) memorizes every N-point set of ratio
below delta in dimension d_x with C classes when some 0 < L_1 < ... < L_K < L,
2 <= K <= floor(log2 N), satisfies

1. prod_{l <= L_1} floor((d_l + 1)/2) >= delta * sqrt(2 pi d_x)
2. sum_{L_(i-1) < l <= L_i} (d_l - 2) >= 2^(i+3) for 2 <= i <= K-1
3. 2^K * sum_{L_(K-1) < l <= L_K} (d_l - 2) * floor((L - L_K) / (2 ceil(log2 C) + 1)) >= N^2 + 4

All three are decided in exact arithmetic; sqrt(2 pi d_x) is replaced by a rational upper
bound, which only makes the check stricter.
"""

__all__ = [
    "CapacityCertificate",
    "check",
    "find_certificate",
    "max_memorizable",
    "width3_architecture",
    "build_from_certificate",
]

logger = logging.getLogger(__name__)


class CapacityCertificate:
    """
    Witness (K, L_1 < ... < L_K) of the three capacity conditions
    """

    def __init__(self, K, cut_points):
        self.K = K
        self.cut_points = [int(c) for c in cut_points]
        self._sanity_check()

    def _sanity_check(self):
        if len(self.cut_points) != self.K:
            raise InvalidArgument(f"{len(self.cut_points)} cut points for K = {self.K}")
        if any(b <= a for a, b in zip(self.cut_points, self.cut_points[1:])):
            raise InvalidArgument(f"cut points {self.cut_points} are not increasing")
        if self.cut_points and self.cut_points[0] <= 0:
            raise InvalidArgument("the first cut point must be positive")

    def to_json(self):
        return {"K": self.K, "cut_points": self.cut_points}

    @classmethod
    def from_json(cls, data):
        return cls(int(data["K"]), data["cut_points"])

    def render_summary(self, report):
        with report.block("certificate") as block:
            block(f"K: {self.K}")
            block(f"cut points: {', '.join(str(c) for c in self.cut_points)}")

    def __eq__(self, other):
        return isinstance(other, CapacityCertificate) and self.to_json() == other.to_json()

    def __repr__(self):
        return f"CapacityCertificate(K={self.K}, cut_points={self.cut_points})"


def _check_widths(arch):
    arch = [int(d) for d in arch]
    if not arch:
        raise ArchitectureError("architecture has no hidden layer")
    for index, d in enumerate(arch, start=1):
        if d < 3:
            raise ArchitectureError(f"hidden layer {index} has width {d}, at least 3 is required")
    return arch


def _projection_ok(product, delta_sq, d_x):
    scale = upper_sqrt(2 * PI_UPPER * d_x)
    return product * product >= to_exact(delta_sq) * scale * scale


def _label_bits(classes):
    return ceil_log2(classes)


def _capacity(arch, cuts, classes):
    """2^K * S_K * floor((L - L_K) / (2D + 1)), the left side of condition 3."""
    k = len(cuts)
    low = cuts[-2] if k > 1 else 0
    slots = sum(d - 2 for d in arch[low:cuts[-1]])
    buckets = (len(arch) - cuts[-1]) // (2 * _label_bits(classes) + 1)
    return 2**k * slots * buckets


def check(arch, delta_sq, d_x, classes, n, cert):
    """
    True iff cert witnesses the three capacity conditions for (arch, delta_sq, d_x, C, N)
    """
    arch = _check_widths(arch)
    k, cuts = cert.K, cert.cut_points
    if not 2 <= k <= n.bit_length() - 1:
        return False
    if len(cuts) != k or cuts[0] <= 0 or cuts[-1] >= len(arch):
        return False
    if any(b <= a for a, b in zip(cuts, cuts[1:])):
        return False
    product = math.prod((d + 1) // 2 for d in arch[:cuts[0]])
    if not _projection_ok(product, delta_sq, d_x):
        return False
    for i in range(2, k):
        if sum(d - 2 for d in arch[cuts[i - 2]:cuts[i - 1]]) < 2 ** (i + 3):
            return False
    return _capacity(arch, cuts, classes) >= n * n + 4


def _greedy(arch, delta_sq, d_x, classes, k):
    """
    Minimal L_1 .. L_(K-1) and the L_K maximizing condition 3, or None
    @return: (CapacityCertificate, capacity)
    """
    product, first = 1, None
    for index, d in enumerate(arch, start=1):
        product *= (d + 1) // 2
        if _projection_ok(product, delta_sq, d_x):
            first = index
            break
    if first is None:
        return None
    cuts = [first]
    for i in range(2, k):
        total, end = 0, None
        for index in range(cuts[-1] + 1, len(arch) + 1):
            total += arch[index - 1] - 2
            if total >= 2 ** (i + 3):
                end = index
                break
        if end is None:
            return None
        cuts.append(end)
    best = None
    for last in range(cuts[-1] + 1, len(arch)):
        capacity = _capacity(arch, cuts + [last], classes)
        if best is None or capacity > best[1]:
            best = (last, capacity)
    if best is None:
        return None
    return CapacityCertificate(k, cuts + [best[0]]), best[1]


def find_certificate(arch, delta_sq, d_x, classes, n):
    """Certificate with the most slack in condition 3 for N points, or None."""
    arch = _check_widths(arch)
    best = None
    for k in range(2, n.bit_length()):
        found = _greedy(arch, delta_sq, d_x, classes, k)
        if found is None:
            break
        cert, capacity = found
        if capacity >= n * n + 4 and (best is None or capacity > best[1]):
            best = (cert, capacity)
    return best[0] if best else None


def max_memorizable(arch, delta_sq, d_x, classes):
    """
    Largest N with a certificate, and that certificate; (0, None) when none exists.
    For each K the greedy spans fix the capacity c_K; N_K = isqrt(c_K - 4) must also
    satisfy K <= floor(log2 N_K).
    """
    arch = _check_widths(arch)
    best = (0, None)
    k = 2
    while k < len(arch):
        found = _greedy(arch, delta_sq, d_x, classes, k)
        if found is None:
            break
        cert, capacity = found
        if capacity >= 4:
            n = math.isqrt(capacity - 4)
            if n >= 2**k and n > best[0]:
                best = (n, cert)
        k += 1
    logger.info("architecture of %d layers certifies up to %d points", len(arch), best[0])
    return best


def width3_architecture(n, delta_sq, d_x, classes):
    """
    Width-3 architecture designed for N points, with its certificate:
    K = min(floor(log2 N), max(2, ceil(2/3 log2 N))), condition 2 blocks of exactly
    2^(i+3) layers, and the condition 3 product split evenly between the parameter
    layers and the bit extraction buckets.
    """
    if n < 4:
        raise InvalidArgument(f"width-3 certificates need at least 4 points, got {n}")
    if classes < 1:
        raise InvalidArgument(f"class count must be positive, got {classes}")
    k = min(n.bit_length() - 1, max(2, ceil_div(ceil_log2(n * n), 3)))
    first, product = 0, 1
    while not _projection_ok(product, delta_sq, d_x):
        first += 1
        product *= 2
    cuts = [max(first, 1)]
    for i in range(2, k):
        cuts.append(cuts[-1] + 2 ** (i + 3))
    need = ceil_div(n * n + 4, 2**k)
    buckets = ceil_sqrt(need)
    slots = ceil_div(need, buckets)
    cuts.append(cuts[-1] + slots)
    length = cuts[-1] + (2 * _label_bits(classes) + 1) * buckets
    return [3] * length, CapacityCertificate(k, cuts)


def _inert_network(input_dim, widths, value):
    layers, in_dim = [], input_dim
    for width in widths:
        layer = AffineLayer(in_dim)
        for _ in range(width):
            layer.add_neuron({}, 0, ID)
        layers.append(layer)
        in_dim = width
    output = AffineLayer(in_dim)
    output.add_neuron({}, Fraction(value), ID)
    return StepIdNetwork(layers + [output], input_dim)


def _pass_chain(count):
    segment = StepIdNetwork.identity(1)
    for _ in range(count):
        segment = segment.compose(StepIdNetwork.pass_through(1))
    return segment


def build_from_certificate(arch, cert, ds, seed=0, delta_sq=None, max_attempts=64, sink=None):
    """
    Exact STEP/ID memorizer of ds with hidden widths exactly arch
    :param cert: CapacityCertificate the build follows
    :param delta_sq: certified squared ratio, the dataset ratio must lie strictly below it;
        defaults to the measured ratio
    :raise CertificateError: when cert does not certify ds on arch
    """
    arch = _check_widths(arch)
    n, classes = ds.size, ds.classes
    sink = sink if sink is not None else BuildReport("certificate", seed=seed, certificate=cert.to_json())
    if n == 1 or classes == 1:
        net = _inert_network(ds.dim, arch, ds.labels[0])
        sink.add_stage("constant", net)
    else:
        report = measure(ds)
        if delta_sq is None:
            delta_sq = report.ratio_sq
        else:
            delta_sq = to_exact(delta_sq)
            # separation is strict: max distance < delta * min distance
            if report.ratio_sq >= delta_sq:
                raise CertificateError(f"dataset ratio {report.ratio_sq} is not below the certified {delta_sq}")
        if not check(arch, delta_sq, ds.dim, classes, n, cert):
            raise CertificateError(f"{cert} does not certify {n} points on this architecture")
        cuts = cert.cut_points
        u = find_direction(ds, max_attempts, seed, report)
        values = scalarize(ds, u, report).tightened()
        net = values.segment()
        sink.add_stage("projection", net, None, values.bound)

        stage, bound_in = StepIdNetwork.identity(1), values.bound
        for d in arch[:cuts[0]]:
            fragment, values = halve_step(values, d)
            fragment.meta.pop("round", None)
            stage = stage.compose(fragment)
        if values.bound > halve_bound(n):
            raise CertificateError(f"halving layers end at bound {values.bound}")
        sink.add_stage("halving", stage, bound_in, values.bound)
        net = net.compose(stage)

        for low, high in zip(cuts, cuts[1:-1]):
            widths = arch[low:high]
            bound_in = values.bound
            stage, values = squeeze_step(values, (sum(d - 2 for d in widths) + 1) // 2, widths)
            stage.meta.pop("round", None)
            sink.add_stage("squeeze", stage, bound_in, values.bound)
            net = net.compose(stage)

        param_widths = arch[cuts[-2] if cert.K > 1 else 0:cuts[-1]]
        buckets = (len(arch) - cuts[-1]) // (2 * max(1, _label_bits(classes)) + 1)
        if ceil_div(values.bound, buckets) > sum(d - 2 for d in param_widths):
            raise CertificateError(f"bound {values.bound} does not fit {buckets} buckets")
        memorizer = memorize_block(
            values, classes, None, MemorizerMode.WIDTH3, buckets=buckets, layer_widths=param_widths
        )
        sink.add_stage("memorizer", memorizer, values.bound, None, **memorizer.meta.pop("memorizer"))
        net = net.compose(memorizer)
        net = net.compose(_pass_chain(len(arch) - net.hidden_layers)).padded(arch)
    net = net.with_meta(
        mode="certificate", certificate=cert.to_json(), seed=seed, version=VERSION,
        n=n, d_x=ds.dim, classes=classes,
    )
    sink.finish(net)
    return net
