import logging
import math
from fractions import Fraction
from functools import reduce

import numpy as np

from memnet.config import executor
from memnet.core.scalar import format_exact, upper_sqrt
from memnet.errors import DuplicateInputError, InvalidArgument

__doc__ = """Delta-separateness of a point set

A set is Delta-separated when its largest pairwise distance is strictly below Delta
times its smallest one. Everything here works on squared distances so the exact path
never takes a square root; a set of one point has ratio 1 by convention.
"""

__all__ = ["SeparatenessReport", "measure", "image_bound", "gaussian_bound", "gaussian_check"]

logger = logging.getLogger(__name__)

# int64 all-pairs path is safe while every squared distance stays below this
_INT64_LIMIT = 1 << 62
_CHUNK = 256


class SeparatenessReport:
    """
    Exact extremal squared distances of a dataset
    """

    def __init__(self, min_sq_dist, max_sq_dist, size, dim):
        self.min_sq_dist = Fraction(min_sq_dist)
        self.max_sq_dist = Fraction(max_sq_dist)
        self.size = size
        self.dim = dim

    @property
    def ratio_sq(self):
        if self.size == 1:
            return Fraction(1)
        return self.max_sq_dist / self.min_sq_dist

    @property
    def log2_delta(self):
        """1/2 * log2(ratio_sq), rounded up at 1e-6."""
        ratio = self.ratio_sq
        value = 0.5 * (math.log2(ratio.numerator) - math.log2(ratio.denominator))
        return math.ceil(value * 1e6) / 1e6

    def delta_upper(self, denominator=10**6):
        """Rational upper bound of Delta = sqrt(ratio_sq)."""
        return upper_sqrt(self.ratio_sq, denominator)

    def is_separated(self, delta):
        """True iff max distance < delta * min distance (strict)."""
        delta = Fraction(delta)
        if self.size == 1:
            return delta > 0
        return delta > 0 and self.max_sq_dist < delta * delta * self.min_sq_dist

    def to_json(self):
        return {
            "n": self.size,
            "d_x": self.dim,
            "min_sq_dist": format_exact(self.min_sq_dist),
            "max_sq_dist": format_exact(self.max_sq_dist),
            "ratio_sq": format_exact(self.ratio_sq),
            "log2_delta": self.log2_delta,
        }

    def render_summary(self, report):
        with report.block("separateness") as block:
            block(f"points: {self.size} in dimension {self.dim}")
            block(f"squared distance ratio: {format_exact(self.ratio_sq)}")
            block(f"log2 delta: {self.log2_delta:.6f}")


def _lcm(a, b):
    return a * b // math.gcd(a, b)


def _integer_points(points):
    scale = reduce(_lcm, (v.denominator for p in points for v in p), 1)
    return scale, [[int(v * scale) for v in p] for p in points]


def _numpy_extremes(coords, start, stop):
    """min/max squared distance between rows start..stop-1 and every later row."""
    best_min, best_max, pair = None, 0, None
    rows = coords[start:stop]
    diff = rows[:, None, :] - coords[None, :, :]
    dist = np.einsum("ijk,ijk->ij", diff, diff)
    index = np.arange(start, stop)[:, None]
    later = np.arange(coords.shape[0])[None, :] > index
    if not later.any():
        return best_min, best_max, pair
    masked = np.where(later, dist, np.iinfo(np.int64).max)
    flat = int(np.argmin(masked))
    best_min = int(masked.flat[flat])
    pair = (start + flat // coords.shape[0], flat % coords.shape[0])
    best_max = int(np.where(later, dist, -1).max())
    return best_min, best_max, pair


def _python_extremes(coords, start, stop):
    best_min, best_max, pair = None, 0, None
    for i in range(start, stop):
        a = coords[i]
        for j in range(i + 1, len(coords)):
            d = sum((x - y) * (x - y) for x, y in zip(a, coords[j]))
            if best_min is None or d < best_min:
                best_min, pair = d, (i, j)
            if d > best_max:
                best_max = d
    return best_min, best_max, pair


def measure(ds):
    """
    Exact extremal pairwise squared distances of ds. Rows are split into chunks that
    run on the worker pool; the min/max reduction is order independent.
    """
    n, dim = ds.size, ds.dim
    if n == 1:
        return SeparatenessReport(0, 0, 1, dim)
    scale, coords = _integer_points(ds.points)
    span = max(max(c) - min(c) for c in zip(*coords))
    if dim * span * span < _INT64_LIMIT:
        coords = np.array(coords, dtype=np.int64)
        extremes = _numpy_extremes
    else:
        extremes = _python_extremes
    chunks = [(start, min(start + _CHUNK, n)) for start in range(0, n - 1, _CHUNK)]
    with executor(len(chunks)) as pool:
        results = list(pool.map(lambda c: extremes(coords, *c), chunks))
    results = [r for r in results if r[0] is not None]
    min_sq, _, pair = min(results, key=lambda r: r[0])
    max_sq = max(r[1] for r in results)
    if min_sq == 0:
        raise DuplicateInputError(f"points {pair[0]} and {pair[1]} are equal")
    report = SeparatenessReport(Fraction(min_sq, scale * scale), Fraction(max_sq, scale * scale), n, dim)
    logger.debug("measured %d points: ratio_sq %s", n, report.ratio_sq)
    return report


def image_bound(a, b, channels, levels):
    """
    log2 of the worst-case distance ratio on a*b images with the given channel count and
    intensity levels: (levels - 1) * sqrt(channels * a * b) over a unit step
    """
    for name, value in (("a", a), ("b", b), ("channels", channels), ("levels", levels)):
        if value < 1:
            raise InvalidArgument(f"{name} must be at least 1, got {value}")
    if levels == 1:
        return -math.inf
    return math.log2(levels - 1) + 0.5 * math.log2(channels * a * b)


def gaussian_bound(n, d_x, delta):
    """(N/sqrt(delta))^(2/d_x) * sqrt(3e + (5e/d_x) * ln(N/sqrt(delta)))"""
    base = n / math.sqrt(delta)
    return base ** (2.0 / d_x) * math.sqrt(3 * math.e + (5 * math.e / d_x) * math.log(base))


def gaussian_check(n, d_x, delta, trials, seed=0):
    """
    Monte Carlo rate at which n i.i.d. standard normal points in d_x dimensions are
    within the separateness bound that holds with probability at least 1 - delta
    """
    if trials < 1:
        raise InvalidArgument(f"trials must be at least 1, got {trials}")
    if n < 2:
        raise InvalidArgument(f"need at least 2 points, got {n}")
    if d_x < 1:
        raise InvalidArgument(f"dimension must be positive, got {d_x}")
    if not 0 < delta < 1:
        raise InvalidArgument(f"delta must lie in (0, 1), got {delta}")
    bound = gaussian_bound(n, d_x, delta)
    rng = np.random.default_rng(seed)
    upper = np.triu_indices(n, k=1)
    successes = 0
    for _ in range(trials):
        x = rng.standard_normal((n, d_x))
        gram = x @ x.T
        norms = np.diag(gram)
        sq = (norms[:, None] + norms[None, :] - 2 * gram)[upper]
        ratio = math.sqrt(sq.max() / sq.min())
        successes += ratio <= bound
    rate = successes / trials
    logger.info("gaussian check n=%d d_x=%d: %d/%d within %.4f", n, d_x, successes, trials, bound)
    return {"success_rate": rate, "bound": bound, "trials": trials, "seed": seed}
