import os
import tempfile
import unittest
from fractions import Fraction

from memnet.construct import measure
from memnet.core import Dataset, grid_dataset, load_csv, parse_rows, random_separated_dataset
from memnet.errors import DuplicateInputError, InputShapeError, InvalidArgument, LabelRangeError

__doc__ = """Unit tests for dataset validation, CSV ingestion and generators
"""


class TestDataset(unittest.TestCase):
    """
    Data contract checks
    """

    def test_classes_default_to_max_label(self):
        ds = Dataset([[0], [1], [2]], [0, 3, 1])
        self.assertEqual(4, ds.classes)
        self.assertEqual(3, ds.size)
        self.assertEqual(1, ds.dim)

    def test_points_are_exact(self):
        ds = Dataset([["1/3", "0.5"]], [0])
        self.assertEqual((Fraction(1, 3), Fraction(1, 2)), ds.points[0])

    def test_duplicate_points_raise(self):
        with self.assertRaises(DuplicateInputError) as context:
            Dataset([[0, 1], [2, 2], ["0.0", "1"]], [0, 1, 0])
        self.assertIn("points 0 and 2", str(context.exception))

    def test_label_range(self):
        self.assertRaises(LabelRangeError, Dataset, [[0], [1]], [0, 2], classes=2)

    def test_shape_errors(self):
        self.assertRaises(InputShapeError, Dataset, [], [])
        self.assertRaises(InputShapeError, Dataset, [[0], [1, 2]], [0, 0])
        self.assertRaises(InputShapeError, Dataset, [[0]], [0, 1])
        self.assertRaises(InvalidArgument, Dataset, [[0]], [0], classes=0)

    def test_with_labels(self):
        ds = Dataset([[0], [1]], [0, 0]).with_labels([1, 0], classes=3)
        self.assertEqual([1, 0], ds.labels)
        self.assertEqual(3, ds.classes)


class TestCsv(unittest.TestCase):
    def test_rows_with_comments_and_blanks(self):
        rows = [["# x", "label"], ["0.5", "1"], [], ["1/3", " 0 "]]
        ds = parse_rows(rows)
        self.assertEqual([(Fraction(1, 2),), (Fraction(1, 3),)], ds.points)
        self.assertEqual([1, 0], ds.labels)

    def test_row_number_in_errors(self):
        with self.assertRaises(InputShapeError) as context:
            parse_rows([["0", "1"], ["1", "0"], ["2", "3", "0"]])
        self.assertIn("row 3", str(context.exception))
        with self.assertRaises(InputShapeError) as context:
            parse_rows([["0", "1"], ["abc", "0"]])
        self.assertIn("row 2", str(context.exception))

    def test_label_must_be_integer(self):
        self.assertRaises(InputShapeError, parse_rows, [["0", "1.5"]])
        self.assertRaises(InputShapeError, parse_rows, [["0", "-1"]])
        self.assertRaises(InputShapeError, parse_rows, [["0"]])

    def test_empty_input(self):
        self.assertRaises(InputShapeError, parse_rows, [])
        self.assertRaises(InputShapeError, parse_rows, [["# only a comment"]])

    def test_load_csv(self):
        with tempfile.TemporaryDirectory() as directory:
            filename = os.path.join(directory, "data.csv")
            with open(filename, "w") as f:
                f.write("0,0,1\n3,4,0\n")
            ds = load_csv(filename, classes=2)
        self.assertEqual(2, ds.dim)
        self.assertEqual(2, ds.classes)
        self.assertEqual((Fraction(3), Fraction(4)), ds.points[1])


class TestGenerators(unittest.TestCase):
    """
    Seeded dataset generators
    """

    def test_grid_dataset_is_deterministic(self):
        first = grid_dataset(12, 2, 3, seed=5)
        second = grid_dataset(12, 2, 3, seed=5)
        self.assertEqual(first.points, second.points)
        self.assertEqual(first.labels, second.labels)
        self.assertEqual(12, first.size)
        self.assertTrue(all(0 <= y < 3 for y in first.labels))

    def test_grid_dataset_spacing(self):
        ds = grid_dataset(4, 1, 2, seed=0, spacing=Fraction(1, 2))
        self.assertTrue(all(p[0].denominator in (1, 2) for p in ds.points))

    def test_random_separated_dataset(self):
        ds = random_separated_dataset(10, 3, 2, delta_sq=16, seed=1)
        self.assertIsNotNone(ds)
        self.assertLess(measure(ds).ratio_sq, 16)

    def test_random_separated_dataset_gives_up(self):
        self.assertIsNone(random_separated_dataset(6, 1, 2, delta_sq=2, seed=0, attempts=3))


if __name__ == "__main__":
    unittest.main()
