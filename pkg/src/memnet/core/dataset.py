import csv
import itertools
import logging
import math
from fractions import Fraction

import numpy as np

from memnet.core.scalar import parse_exact
from memnet.errors import DuplicateInputError, InputShapeError, InvalidArgument, LabelRangeError

__doc__ = """Labelled finite datasets with exact coordinates

CSV format: one row per point, d_x numeric columns followed by an integer label column.
Numbers are parsed as exact decimals (digit string to rational), never through floats.
Lines starting with '#' are ignored.
"""

__all__ = ["Dataset", "load_csv", "parse_rows", "grid_dataset", "random_separated_dataset"]

logger = logging.getLogger(__name__)


class Dataset:
    """
    Distinct d_x-dimensional exact points with class labels in [C]
    """

    def __init__(self, points, labels, classes=None):
        """
        :param points: sequence of coordinate sequences (anything Fraction accepts)
        :param labels: one integer label per point
        :param classes: class count C, defaults to max(labels) + 1
        """
        self.points = [tuple(Fraction(v) for v in p) for p in points]
        self.labels = [int(y) for y in labels]
        self.classes = (max(self.labels) + 1 if self.labels else 1) if classes is None else classes
        self._sanity_check()

    def _sanity_check(self):
        if not self.points:
            raise InputShapeError("dataset is empty")
        if len(self.points) != len(self.labels):
            raise InputShapeError(f"{len(self.points)} points but {len(self.labels)} labels")
        dim = len(self.points[0])
        if dim == 0:
            raise InputShapeError("points must have at least one coordinate")
        for index, point in enumerate(self.points):
            if len(point) != dim:
                raise InputShapeError(f"point {index} has {len(point)} coordinates, expected {dim}")
        if self.classes < 1:
            raise InvalidArgument(f"class count must be positive, got {self.classes}")
        for index, label in enumerate(self.labels):
            if not 0 <= label < self.classes:
                raise LabelRangeError(f"label {label} of point {index} outside [0, {self.classes})")
        seen = {}
        for index, point in enumerate(self.points):
            if point in seen:
                raise DuplicateInputError(f"points {seen[point]} and {index} are equal")
            seen[point] = index

    @property
    def size(self):
        return len(self.points)

    @property
    def dim(self):
        return len(self.points[0])

    def __len__(self):
        return len(self.points)

    def with_labels(self, labels, classes=None):
        return Dataset(self.points, labels, classes)


def parse_rows(rows, classes=None):
    """
    Build a Dataset from CSV rows (lists of strings)
    """
    points, labels = [], []
    width = None
    for number, row in enumerate(rows, start=1):
        cells = [cell.strip() for cell in row]
        if not cells or all(not cell for cell in cells) or cells[0].startswith("#"):
            continue
        if len(cells) < 2:
            raise InputShapeError(f"row {number}: need at least one coordinate and a label")
        if width is None:
            width = len(cells)
        elif len(cells) != width:
            raise InputShapeError(f"row {number}: {len(cells)} columns, expected {width}")
        try:
            point = [parse_exact(cell) for cell in cells[:-1]]
        except InputShapeError as e:
            raise InputShapeError(f"row {number}: {e}")
        label = parse_exact(cells[-1]) if cells[-1] else None
        if label is None or label.denominator != 1 or label < 0:
            raise InputShapeError(f"row {number}: label {cells[-1]!r} is not a non-negative integer")
        points.append(point)
        labels.append(int(label))
    if not points:
        raise InputShapeError("no data rows")
    return Dataset(points, labels, classes)


def load_csv(filename, classes=None):
    with open(filename, newline="") as f:
        dataset = parse_rows(csv.reader(f), classes)
    logger.info("loaded %d points of dimension %d from %s", dataset.size, dataset.dim, filename)
    return dataset


def grid_dataset(n, d_x, classes, seed=0, spacing=1):
    """
    n distinct points of the integer grid {0..s-1}^d_x (s the smallest side holding n
    points), chosen and labelled with a seeded generator, scaled by spacing.
    Grid sets are sqrt(d_x)*(s-1)-separated at worst.
    """
    rng = np.random.default_rng(seed)
    side = max(2, math.ceil(round(n ** (1.0 / d_x), 9)))
    while side**d_x < n:
        side += 1
    chosen = sorted(rng.choice(side**d_x, size=n, replace=False).tolist())
    points = []
    for index in chosen:
        coords = []
        for _ in range(d_x):
            index, digit = divmod(index, side)
            coords.append(Fraction(digit) * Fraction(spacing))
        points.append(coords)
    labels = rng.integers(0, classes, size=n).tolist()
    return Dataset(points, labels, classes)


def random_separated_dataset(n, d_x, classes, delta_sq, seed=0, attempts=64):
    """
    Random grid subset whose squared distance ratio stays below delta_sq, or None when
    no such subset was found within the given number of attempts.
    """
    from memnet.construct.separateness import measure

    for attempt in itertools.count():
        if attempt >= attempts:
            return None
        dataset = grid_dataset(n, d_x, classes, seed=(seed, attempt))
        if n == 1 or measure(dataset).ratio_sq < Fraction(delta_sq):
            return dataset
