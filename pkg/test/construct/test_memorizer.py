import unittest
from fractions import Fraction

from hypothesis import assume, given, settings
from hypothesis import strategies as st

from memnet.construct import (
    LabelEncoding,
    MemorizerMode,
    ScalarizedDataset,
    bit_extract,
    bit_extract_params,
    bit_extract_width3,
    encode_labels,
    gadget_block,
    memorize_block,
    memorizer_shape,
    param_extract,
)
from memnet.core import evaluate_exact
from memnet.core.scalar import ceil_div
from memnet.errors import ArchitectureError, InvalidArgument, LabelRangeError
from test.comparing_tools import label_bits, reference_forward

__doc__ = """Unit tests for label packing, parameter selection and bit extraction
"""

fractional_parts = st.fractions(min_value=0, max_value=Fraction(7, 8), max_denominator=8)


def expected_label(labels, floor, depth):
    bits = label_bits(labels, floor, depth)
    return sum(bit << (depth - k) for k, bit in enumerate(bits, start=1))


def gadget_cost(R):
    return (2 * R + 5) * 2**R + 2 * R * R + 8 * R + 7


GRID_AB = (1, 2, 4, 8)
GRID_D = (1, 2, 4)
GRID_R = (1, 2, 3)


class TestEncoding(unittest.TestCase):
    def test_two_labels_of_one_bit(self):
        enc = encode_labels({0: 1, 1: 0}, 1, 2, 1)
        self.assertEqual([Fraction(1, 2)], enc.weights)
        self.assertEqual(1, enc.label(0))
        self.assertEqual(0, enc.label(1))

    def test_one_label_of_two_bits(self):
        enc = encode_labels({0: 3}, 1, 1, 2)
        self.assertEqual([Fraction(3, 4)], enc.weights)
        self.assertEqual(1, enc.bit(0, 1))
        self.assertEqual(1, enc.bit(0, 2))

    def test_missing_floors_encode_zero(self):
        enc = encode_labels({5: 2}, 2, 3, 2)
        self.assertEqual(0, enc.weights[0])
        self.assertEqual(2, enc.label(5))
        self.assertEqual(0, enc.label(4))

    @settings(max_examples=60, deadline=None)
    @given(st.integers(min_value=1, max_value=4), st.integers(min_value=1, max_value=5),
           st.integers(min_value=1, max_value=3), st.data())
    def test_labels_round_trip(self, A, B, D, data):
        labels = data.draw(st.lists(st.integers(min_value=0, max_value=2**D - 1), min_size=A * B, max_size=A * B))
        enc = encode_labels(dict(enumerate(labels)), A, B, D)
        self.assertTrue(all(0 <= w < 1 for w in enc.weights))
        self.assertEqual(labels, [enc.label(f) for f in range(A * B)])

    def test_errors(self):
        self.assertRaises(LabelRangeError, encode_labels, {0: 4}, 1, 2, 2)
        self.assertRaises(InvalidArgument, encode_labels, {4: 1}, 2, 2, 1)
        self.assertRaises(InvalidArgument, LabelEncoding, 1, 1, 1, 1, [1])
        self.assertRaises(InvalidArgument, LabelEncoding, 2, 1, 1, 1, [0])
        self.assertRaises(InvalidArgument, LabelEncoding, 1, 0, 1, 1, [0])


class TestParamExtract(unittest.TestCase):
    """
    Bucket selection x -> (w_{floor(x/B)}, x mod B)
    """

    def test_example(self):
        enc = LabelEncoding(2, 2, 1, 1, [Fraction(1, 2), Fraction(1, 4)])
        self.assertEqual([Fraction(1, 4), 1], evaluate_exact(param_extract(enc), [3]))
        self.assertEqual([Fraction(1, 2), Fraction(3, 2)], evaluate_exact(param_extract(enc), [Fraction(3, 2)]))

    def test_single_layer_size(self):
        enc = encode_labels({}, 5, 2, 1)
        stats = param_extract(enc).stats()
        self.assertEqual(1, stats.hidden_layers)
        self.assertEqual(4 * 5 + 10, stats.param_count)

    def test_too_narrow(self):
        enc = encode_labels({}, 3, 2, 1)
        self.assertRaises(ArchitectureError, param_extract, enc, [4])
        self.assertRaises(ArchitectureError, param_extract, enc, [1, 5])

    @settings(max_examples=60, deadline=None)
    @given(st.integers(min_value=1, max_value=5), st.integers(min_value=1, max_value=4),
           st.booleans(), st.data())
    def test_selection(self, A, B, narrow, data):
        weights = data.draw(st.lists(st.fractions(min_value=0, max_value=Fraction(63, 64), max_denominator=64),
                                     min_size=A, max_size=A))
        floor = data.draw(st.integers(min_value=0, max_value=A * B - 1))
        x = floor + data.draw(fractional_parts)
        enc = LabelEncoding(A, B, 1, 1, weights)
        segment = param_extract(enc, [3] * A if narrow else None)
        expected = [weights[floor // B], x - (floor // B) * B]
        self.assertEqual(expected, evaluate_exact(segment, [x]))
        self.assertEqual(expected, reference_forward(segment, [x]))
        if narrow:
            self.assertLessEqual(max(segment.layer_widths()), 3)


class TestBitExtract(unittest.TestCase):
    """
    Reading the label bits at position floor(x) out of w
    """

    def test_examples(self):
        point = [Fraction(13, 10), Fraction(11, 16)]
        for r in (1, 2, 3):
            self.assertEqual([3], evaluate_exact(bit_extract(2, 2, r), point))
        self.assertEqual([3], evaluate_exact(bit_extract_width3(2, 2), point))
        self.assertEqual([1], evaluate_exact(bit_extract(1, 1, 1), [0, Fraction(1, 2)]))
        self.assertEqual([1], evaluate_exact(bit_extract_width3(1, 1), [0, Fraction(1, 2)]))

    def test_gadget_widths(self):
        self.assertEqual([4, 3] * 3, bit_extract(3, 1, 1).layer_widths())
        net = bit_extract(2, 2, 2)
        self.assertEqual(2 * 2, net.hidden_layers)
        self.assertEqual([2 + 3 + 2, 2 + 2] * 2, net.layer_widths())

    def test_closed_form_parameter_count(self):
        for B, D, R in ((1, 1, 1), (3, 1, 1), (2, 2, 2), (4, 3, 2), (5, 2, 3), (7, 1, 4)):
            net = bit_extract(B, D, R)
            self.assertEqual(bit_extract_params(B, D, R), net.stats().param_count, (B, D, R))
            self.assertEqual(2 * ceil_div(B * D, R), net.hidden_layers)

    def test_closed_form_grid(self):
        for B in GRID_AB:
            for D in GRID_D:
                for R in GRID_R:
                    n = ceil_div(B * D, R)
                    expected = gadget_cost(R) * n - R * 2**R - R * R + 3
                    self.assertEqual(expected, bit_extract_params(B, D, R))
                    self.assertEqual(expected, bit_extract(B, D, R).stats().param_count, (B, D, R))

    def test_width3_shape(self):
        for B, D in ((1, 1), (3, 2), (4, 3)):
            net = bit_extract_width3(B, D)
            self.assertEqual((2 * D + 1) * B, net.hidden_layers)
            self.assertEqual(3, max(net.layer_widths()))

    def test_arguments(self):
        self.assertRaises(InvalidArgument, bit_extract, 0, 1, 1)
        self.assertRaises(InvalidArgument, bit_extract_width3, 1, 0)

    @settings(max_examples=150, deadline=None)
    @given(st.integers(min_value=1, max_value=24), st.integers(min_value=1, max_value=4),
           st.integers(min_value=1, max_value=3), st.data())
    def test_matches_bit_oracle(self, B, D, R, data):
        assume(B * D <= 24)
        labels = data.draw(st.lists(st.integers(min_value=0, max_value=2**D - 1), min_size=B, max_size=B))
        floor = data.draw(st.integers(min_value=0, max_value=B - 1))
        x = floor + data.draw(fractional_parts)
        w = encode_labels(dict(enumerate(labels)), 1, B, D, R).weights[0]
        expected = [expected_label(labels, floor, D)]
        self.assertEqual(expected, evaluate_exact(bit_extract(B, D, R), [x, w]))
        self.assertEqual(expected, reference_forward(bit_extract_width3(B, D), [x, w]))


class TestMemorizeBlock(unittest.TestCase):
    """
    Whole memorizer: value -> integer label
    """

    def sample(self):
        floors = [0, 2, 3, 7, 9, 12, 15]
        labels = [2, 0, 1, 1, 2, 0, 2]
        return ScalarizedDataset([f + Fraction(1, 4) for f in floors], 16, labels)

    def test_shape(self):
        self.assertEqual((4, 4, 2, 1), memorizer_shape(16, Fraction(1, 2), 3))
        self.assertEqual((16, 4, 1, 2), memorizer_shape(64, Fraction(2, 3), 2))
        self.assertEqual((4, 3, 1, 1), memorizer_shape(10, None, 2, MemorizerMode.WIDTH3, buckets=3))
        self.assertRaises(InvalidArgument, memorizer_shape, 16, None, 2)

    def test_gadget_mode(self):
        values = self.sample()
        segment = memorize_block(values, 3, Fraction(1, 2))
        for value, label in zip(values.values, values.labels):
            self.assertEqual([label], evaluate_exact(segment, [value]))
        A, B, D, R = memorizer_shape(16, Fraction(1, 2), 3)
        stats = segment.stats()
        self.assertEqual(4 * A + 10 + bit_extract_params(B, D, R), stats.param_count)
        self.assertEqual(2 * ceil_div(B * D, R) + 2, stats.hidden_layers)
        self.assertEqual("gadget", segment.meta["memorizer"]["mode"])

    def test_assembled_block_grid(self):
        for A in GRID_AB:
            for B in GRID_AB:
                for D in GRID_D:
                    for R in GRID_R:
                        labels = [(5 * f + 1) % 2**D for f in range(A * B)]
                        enc = encode_labels(dict(enumerate(labels)), A, B, D, R)
                        block = gadget_block(enc)
                        n = ceil_div(B * D, R)
                        stats = block.stats()
                        with self.subTest(A=A, B=B, D=D, R=R):
                            self.assertEqual(4 * A + 10 + bit_extract_params(B, D, R), stats.param_count)
                            self.assertEqual(
                                4 * A + gadget_cost(R) * n - R * 2**R - R * R + 13, stats.param_count
                            )
                            self.assertEqual(2 * n + 2, stats.hidden_layers)
                            for floor in (0, A * B // 2, A * B - 1):
                                x = floor + Fraction(1, 2)
                                self.assertEqual([labels[floor]], evaluate_exact(block, [x]))

    def test_width3_mode(self):
        values = self.sample()
        segment = memorize_block(values, 3, None, "width3", buckets=4)
        for value, label in zip(values.values, values.labels):
            self.assertEqual([label], reference_forward(segment, [value]))
        self.assertLessEqual(max(segment.layer_widths()), 3)
        self.assertEqual(4 + (2 * 2 + 1) * 4, segment.hidden_layers)

    def test_single_class_is_constant(self):
        segment = memorize_block(self.sample(), 1, Fraction(1, 2))
        self.assertEqual(0, segment.hidden_layers)
        self.assertEqual([0], evaluate_exact(segment, [5]))

    def test_arguments(self):
        self.assertRaises(InvalidArgument, memorize_block, self.sample(), 0, Fraction(1, 2))
        self.assertRaises(InvalidArgument, memorize_block, self.sample(), 3, Fraction(1, 2), "fastest")


if __name__ == "__main__":
    unittest.main()
