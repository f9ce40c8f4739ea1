import logging
import math
from fractions import Fraction

import numpy as np

from memnet.core.network import StepIdNetwork
from memnet.core.scalar import PI_LOWER, PI_UPPER, ceil_sqrt, format_exact, rationalize
from memnet.errors import DirectionSearchError, InvalidArgument

__doc__ = """Projection of separated points onto well-separated scalars

A random unit direction u is accepted when the projected values keep their spread under
control. The accepted projection is then shifted and scaled so that the smallest gap
becomes 1 and the smallest value 0; every value then sits in its own unit interval
[i, i+1) and the floors are N distinct integers below the bound K.
"""

__all__ = ["ScalarizedDataset", "find_direction", "projections", "scalarize"]

logger = logging.getLogger(__name__)


class ScalarizedDataset:
    """
    Scalars with pairwise distinct floors in [0, K), each carrying its label.
    v, b describe the affine map value = v.x + b when the values come from a projection.
    """

    def __init__(self, values, bound, labels, v=None, b=None):
        self.values = [Fraction(value) for value in values]
        self.bound = int(bound)
        self.labels = list(labels)
        self.v = None if v is None else tuple(Fraction(c) for c in v)
        self.b = None if b is None else Fraction(b)
        self._sanity_check()

    def _sanity_check(self):
        if len(self.values) != len(self.labels):
            raise InvalidArgument(f"{len(self.values)} values but {len(self.labels)} labels")
        floors = self.floors()
        if len(set(floors)) != len(floors):
            raise InvalidArgument("values share a unit interval")
        if floors and not (min(floors) >= 0 and max(floors) < self.bound):
            raise InvalidArgument(f"values outside [0, {self.bound})")

    @property
    def size(self):
        return len(self.values)

    def floors(self):
        return [math.floor(value) for value in self.values]

    def floor_labels(self):
        """{floor: label} over the occupied floors."""
        return dict(zip(self.floors(), self.labels))

    def with_values(self, values, bound):
        return ScalarizedDataset(values, bound, self.labels)

    def tightened(self):
        """Same values with K replaced by floor(max value) + 1."""
        bound = max(self.floors()) + 1
        return ScalarizedDataset(self.values, min(bound, self.bound), self.labels, self.v, self.b)

    def with_bound(self, bound):
        """Same values under a looser bound; the bound may only grow."""
        if bound < self.bound:
            raise InvalidArgument(f"bound {bound} is below the current bound {self.bound}")
        return ScalarizedDataset(self.values, bound, self.labels, self.v, self.b)

    def segment(self):
        """Zero-hidden-layer network computing v.x + b."""
        if self.v is None:
            raise InvalidArgument("values do not come from a projection")
        return StepIdNetwork.affine(len(self.v), [dict(enumerate(self.v))], [self.b])

    def to_json(self):
        data = {"n": self.size, "bound": self.bound}
        if self.v is not None:
            data["v"] = [format_exact(c) for c in self.v]
            data["b"] = format_exact(self.b)
        return data

    def render_summary(self, report):
        with report.block("scalarized") as block:
            block(f"values: {self.size}")
            block(f"bound: {self.bound}")


def _draw(dim, seed, attempt):
    rng = np.random.default_rng([seed, attempt])
    u = rng.standard_normal(dim)
    norm = np.linalg.norm(u)
    if norm == 0:
        return None
    return tuple(rationalize(c) for c in (u / norm).tolist())


def projections(ds, u):
    return [sum((c * x for c, x in zip(u, point)), Fraction(0)) for point in ds.points]


def _spread(values):
    """(max - min, smallest gap between sorted neighbours)."""
    ordered = sorted(values)
    gap = min(b - a for a, b in zip(ordered, ordered[1:]))
    return ordered[-1] - ordered[0], gap


def _accepted(values, ratio_sq, dim):
    # (max - min) / gap < N^2 * delta * sqrt(pi * d_x / 8), squared with pi from below
    n = len(values)
    width, gap = _spread(values)
    if gap == 0:
        return False
    return 8 * width * width < n**4 * ratio_sq * PI_LOWER * dim * gap * gap


def find_direction(ds, max_attempts=64, seed=0, report=None):
    """
    Unit direction (rational entries on the 2^-64 grid) under which the projected
    dataset passes the spread check
    @param: report SeparatenessReport of ds, measured when omitted
    """
    dim = ds.dim
    if ds.size == 1:
        return tuple(Fraction(int(i == 0)) for i in range(dim))
    if dim == 1:
        return (Fraction(1),)
    if report is None:
        from memnet.construct.separateness import measure

        report = measure(ds)
    for attempt in range(max_attempts):
        u = _draw(dim, seed, attempt)
        if u is not None and _accepted(projections(ds, u), report.ratio_sq, dim):
            logger.debug("direction accepted at attempt %d", attempt)
            return u
        logger.debug("direction attempt %d rejected, redrawing", attempt)
    raise DirectionSearchError(f"no direction accepted in {max_attempts} attempts")


def scalarize(ds, u, report=None):
    """
    Shift and scale the projections onto u so that the smallest gap is 1 and the
    smallest value 0; K = ceil(sqrt(N^4 * ratio_sq * pi * d_x / 8)) + 1, pi from above
    """
    p = projections(ds, u)
    if ds.size == 1:
        return ScalarizedDataset([0], 1, ds.labels, u, -p[0])
    if report is None:
        from memnet.construct.separateness import measure

        report = measure(ds)
    low = min(p)
    _, gap = _spread(p)
    if gap == 0:
        raise DirectionSearchError("two points project onto the same value")
    values = [(value - low) / gap for value in p]
    n = ds.size
    bound = ceil_sqrt(Fraction(n**4) * report.ratio_sq * PI_UPPER * ds.dim / 8) + 1
    if max(values) >= bound:
        raise DirectionSearchError(f"direction spreads values past the bound {bound}")
    v = tuple(c / gap for c in u)
    scalarized = ScalarizedDataset(values, bound, ds.labels, v, -low / gap)
    logger.info("projection: %d points onto [0, %d)", n, bound)
    return scalarized
