import logging
import math
from fractions import Fraction

from memnet.config import executor
from memnet.construct.compression import CompressionMode, compress_chain, halve_bound
from memnet.construct.memorizer import MemorizerMode, memorize_block
from memnet.construct.projection import find_direction, scalarize
from memnet.construct.separateness import measure
from memnet.core.dataset import Dataset
from memnet.core.evaluate import evaluate_exact, evaluate_float_batch
from memnet.core.network import StepIdNetwork
from memnet.core.scalar import ceil_div, ceil_log2, ceil_power, format_exact, to_exact
from memnet.errors import InputShapeError, InvalidArgument
from memnet.version import VERSION

__doc__ = """End-to-end builds

build_theorem1:  projection -> compression down to ceil(N^(2-w)) -> R-bit gadget memorizer
build_width3:    projection -> width-3 compression -> width-3 memorizer
build_regression: targets in [0, 1] rounded onto ceil(1/eps) classes, built as above

Every build records its stages in a BuildReport; verify checks a network on a dataset,
exactly for STEP/ID (and hard tanh) networks, in floating point otherwise.
"""

__all__ = [
    "BuildReport",
    "VerifyReport",
    "parse_w",
    "build_theorem1",
    "width3_target",
    "build_width3",
    "regression_wrap",
    "build_regression",
    "verify",
]

logger = logging.getLogger(__name__)

W_RANGE = (Fraction(2, 3), Fraction(1))


class BuildReport:
    """
    Stage by stage record of a build: bounds, hidden layers and parameters per stage
    """

    def __init__(self, mode, seed=None, **params):
        self.mode = mode
        self.seed = seed
        self.params = params
        self.stages = []
        self.network = None
        self.verification = None

    def add_stage(self, name, segment, bound_in=None, bound_out=None, **details):
        stats = segment.stats()
        stage = {
            "stage": name,
            "bound_in": bound_in,
            "bound_out": bound_out,
            "hidden_layers": stats.hidden_layers,
            "param_count": stats.param_count,
            **details,
        }
        self.stages.append(stage)
        logger.info(
            "stage %s: bound %s -> %s, %d hidden layers, %d parameters",
            name, bound_in, bound_out, stats.hidden_layers, stats.param_count,
        )
        return stage

    def finish(self, net):
        self.network = net.stats()
        return self

    def to_json(self):
        return {
            "version": VERSION,
            "mode": self.mode,
            "seed": self.seed,
            **self.params,
            "stages": self.stages,
            "network": self.network.to_json() if self.network else None,
            "verification": self.verification.to_json() if self.verification else None,
        }

    def render_summary(self, report):
        with report.block(f"build ({self.mode})") as block:
            for stage in self.stages:
                bounds = ""
                if stage["bound_out"] is not None:
                    bounds = f"bound {stage['bound_in']} -> {stage['bound_out']}, "
                block(
                    f"{stage['stage']}: {bounds}"
                    f"{stage['hidden_layers']} hidden layers, {stage['param_count']} parameters"
                )
        if self.network is not None:
            self.network.render_summary(report)
        if self.verification is not None:
            self.verification.render_summary(report)


class VerifyReport:
    """
    Per-point errors of a network against dataset targets
    """

    def __init__(self, outputs, targets, eps, exact):
        self.exact = exact
        self.eps = eps
        self.outputs = list(outputs)
        self.targets = list(targets)
        if exact:
            self.errors = [abs(o - t) for o, t in zip(self.outputs, self.targets)]
        else:
            self.errors = [abs(float(o) - float(t)) for o, t in zip(self.outputs, self.targets)]
        self.max_error = max(self.errors) if self.errors else 0
        self.passed = self.max_error <= (eps if exact else float(eps))

    def failures(self):
        bound = self.eps if self.exact else float(self.eps)
        return [i for i, e in enumerate(self.errors) if e > bound]

    def _number(self, value):
        return format_exact(value) if self.exact else float(value)

    def to_json(self):
        return {
            "mode": "exact" if self.exact else "float",
            "eps": format_exact(self.eps),
            "max_error": self._number(self.max_error),
            "pass": self.passed,
            "per_point": [
                {"index": i, "output": self._number(o), "target": format_exact(t), "error": self._number(e)}
                for i, (o, t, e) in enumerate(zip(self.outputs, self.targets, self.errors))
            ],
        }

    def render_summary(self, report):
        with report.block("verification") as block:
            block(f"mode: {'exact' if self.exact else 'float'}")
            block(f"points: {len(self.errors)}, failing: {len(self.failures())}")
            block(f"max error: {self._number(self.max_error)} (eps {format_exact(self.eps)})")
            block("PASS" if self.passed else "FAIL")


def parse_w(w):
    """w as an exact rational in [2/3, 1]; floats go through their decimal repr."""
    w = Fraction(str(w)) if isinstance(w, float) else to_exact(w)
    if not W_RANGE[0] <= w <= W_RANGE[1]:
        raise InvalidArgument(f"w must lie in [2/3, 1], got {w}")
    return w


def _constant_build(ds, sink):
    net = StepIdNetwork.constant(ds.dim, ds.labels[0])
    sink.add_stage("constant", net)
    return net


def _project(ds, seed, max_attempts, sink):
    report = measure(ds)
    u = find_direction(ds, max_attempts, seed, report)
    values = scalarize(ds, u, report).tightened()
    segment = values.segment()
    sink.add_stage("projection", segment, None, values.bound, ratio_sq=format_exact(report.ratio_sq))
    return segment, values


def build_theorem1(ds, w=W_RANGE[0], seed=0, max_attempts=64, sink=None):
    """
    Exact STEP/ID memorizer of ds with O(N^w) parameters
    :param w: trade-off exponent in [2/3, 1]
    :param seed: direction sampling seed
    :param sink: BuildReport collecting the stages, created when omitted
    """
    w = parse_w(w)
    sink = sink if sink is not None else BuildReport("theorem1", seed=seed, w=format_exact(w))
    n, classes = ds.size, ds.classes
    if n == 1 or classes == 1:
        net = _constant_build(ds, sink)
    else:
        projection, values = _project(ds, seed, max_attempts, sink)
        target = max(n, ceil_power(n, 2 - w))
        bound_in = values.bound
        compression, values = compress_chain(values, target, CompressionMode.BUDGET)
        rounds = compression.meta.pop("compression")
        sink.add_stage("compression", compression, bound_in, values.bound, rounds=rounds)
        values = values.with_bound(max(values.bound, target))
        memorizer = memorize_block(values, classes, w / (2 - w), MemorizerMode.GADGET)
        sink.add_stage("memorizer", memorizer, values.bound, None, **memorizer.meta.pop("memorizer"))
        net = projection.compose(compression).compose(memorizer)
    net = net.with_meta(mode="theorem1", w=format_exact(w), seed=seed, version=VERSION, n=n, d_x=ds.dim, classes=classes)
    sink.finish(net)
    return net


def width3_target(n):
    """max(N, ceil(floor(N^2/4 + 1) / 2^e)) with e = ceil(2/3 * log2 N)."""
    extra = ceil_div(ceil_log2(n * n), 3)
    return max(n, ceil_div(halve_bound(n), 2**extra))


def build_width3(ds, seed=0, max_attempts=64, sink=None):
    """
    Exact STEP/ID memorizer of ds whose hidden layers are at most 3 wide
    """
    sink = sink if sink is not None else BuildReport("width3", seed=seed)
    n, classes = ds.size, ds.classes
    if n == 1 or classes == 1:
        net = _constant_build(ds, sink)
    else:
        projection, values = _project(ds, seed, max_attempts, sink)
        bound_in = values.bound
        compression, values = compress_chain(values, width3_target(n), CompressionMode.WIDTH3)
        rounds = compression.meta.pop("compression")
        sink.add_stage("compression", compression, bound_in, values.bound, rounds=rounds)
        buckets = ceil_power(n, Fraction(2, 3))
        memorizer = memorize_block(values, classes, None, MemorizerMode.WIDTH3, buckets=buckets)
        sink.add_stage("memorizer", memorizer, values.bound, None, **memorizer.meta.pop("memorizer"))
        net = projection.compose(compression).compose(memorizer)
    net = net.with_meta(mode="width3", seed=seed, version=VERSION, n=n, d_x=ds.dim, classes=classes)
    sink.finish(net)
    return net


def regression_wrap(targets, eps):
    """
    Round regression targets in [0, 1] onto the class grid c * eps
    @return: (labels, C = ceil(1/eps), decode) with decode(c) = c * eps
    """
    eps = to_exact(eps)
    if eps <= 0:
        raise InvalidArgument(f"eps must be positive, got {eps}")
    classes = math.ceil(1 / eps)
    labels = []
    for index, target in enumerate(targets):
        target = to_exact(target)
        if not 0 <= target <= 1:
            raise InvalidArgument(f"target {index} = {target} outside [0, 1]")
        # nearest grid point, ties to the smaller class
        labels.append(min(max(math.ceil(target / eps - Fraction(1, 2)), 0), classes - 1))

    def decode(c):
        return c * eps

    return labels, classes, decode


def build_regression(points, targets, eps, w=W_RANGE[0], seed=0, sink=None):
    """Network whose output is within eps of every target; the output map is scaled by eps."""
    labels, classes, _ = regression_wrap(targets, eps)
    ds = Dataset(points, labels, classes)
    net = build_theorem1(ds, w, seed, sink=sink)
    return net.scaled_output(to_exact(eps)).with_meta(regression_eps=format_exact(to_exact(eps)))


def _is_exact(net):
    if isinstance(net, StepIdNetwork):
        return True
    kind = getattr(net, "kind", None)
    return kind is not None and kind.exact is not None


def verify(net, ds, eps=0, targets=None):
    """
    Compare net(x_i) with the label (or the given target) of every point
    :param eps: tolerance, pass iff max error <= eps
    :param targets: regression targets replacing the labels
    """
    eps = to_exact(eps)
    if net.input_dim != ds.dim:
        raise InputShapeError(f"network takes {net.input_dim} inputs, dataset has dimension {ds.dim}")
    if targets is None:
        targets = [Fraction(y) for y in ds.labels]
    else:
        targets = [to_exact(t) for t in targets]
        if len(targets) != ds.size:
            raise InputShapeError(f"{len(targets)} targets for {ds.size} points")
    exact = _is_exact(net)
    if exact:
        with executor(ds.size) as pool:
            outputs = list(pool.map(lambda x: evaluate_exact(net, x)[0], ds.points))
    else:
        outputs = evaluate_float_batch(net, ds.points)[:, 0].tolist()
    result = VerifyReport(outputs, targets, eps, exact)
    level = logging.INFO if result.passed else logging.WARNING
    logger.log(level, "verify: max error %s over %d points, %s", result.max_error, ds.size,
               "pass" if result.passed else "fail")
    return result
