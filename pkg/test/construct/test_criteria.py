import unittest
from fractions import Fraction

import numpy as np

from memnet.construct import (
    CapacityCertificate,
    build_from_certificate,
    check,
    find_certificate,
    max_memorizable,
    measure,
    verify,
    width3_architecture,
)
from memnet.core import Dataset, grid_dataset, random_separated_dataset
from memnet.errors import ArchitectureError, CertificateError, InvalidArgument
from test.comparing_tools import assert_memorizes

__doc__ = """Unit tests for capacity certificates and certificate driven builds
"""


def line_dataset(n, classes=2):
    return Dataset([[i] for i in range(n)], [(i * 7 + 3) % classes for i in range(n)], classes)


class TestCertificate(unittest.TestCase):
    def test_sanity(self):
        self.assertRaises(InvalidArgument, CapacityCertificate, 2, [3])
        self.assertRaises(InvalidArgument, CapacityCertificate, 2, [4, 4])
        self.assertRaises(InvalidArgument, CapacityCertificate, 2, [0, 4])

    def test_json(self):
        cert = CapacityCertificate(3, [6, 38, 44])
        self.assertEqual({"K": 3, "cut_points": [6, 38, 44]}, cert.to_json())
        self.assertEqual(cert, CapacityCertificate.from_json(cert.to_json()))


class TestCheck(unittest.TestCase):
    """
    The three capacity conditions in exact arithmetic
    """

    def test_four_points(self):
        arch = [3] * 20
        cert = CapacityCertificate(2, [4, 5])
        self.assertTrue(check(arch, 16, 1, 2, 4, cert))
        # 2^3 < 4 * sqrt(2 pi)
        self.assertFalse(check(arch, 16, 1, 2, 4, CapacityCertificate(2, [3, 5])))
        # 4 * 1 * 5 < 5^2 + 4
        self.assertFalse(check(arch, 16, 1, 2, 5, cert))
        # K = 2 exceeds floor(log2 3)
        self.assertFalse(check(arch, 16, 1, 2, 3, cert))

    def test_cut_points_must_fit(self):
        arch = [3] * 20
        self.assertFalse(check(arch, 16, 1, 2, 4, CapacityCertificate(2, [4, 20])))
        self.assertFalse(check(arch, 16, 1, 2, 4, CapacityCertificate(3, [4, 5, 6])))

    def test_middle_blocks(self):
        arch, cert = width3_architecture(16, 225, 1, 2)
        self.assertEqual(62, len(arch))
        self.assertEqual(CapacityCertificate(3, [6, 38, 44]), cert)
        self.assertTrue(check(arch, 225, 1, 2, 16, cert))
        self.assertFalse(check(arch, 225, 1, 2, 17, cert))
        short = CapacityCertificate(3, [6, 37, 44])
        self.assertFalse(check(arch, 225, 1, 2, 16, short))

    def test_narrow_layer_raises(self):
        self.assertRaises(ArchitectureError, check, [3, 2, 3], 4, 1, 2, 4, CapacityCertificate(2, [1, 2]))
        self.assertRaises(ArchitectureError, max_memorizable, [], 4, 1, 2)

    def test_more_classes_need_more_layers(self):
        arch, cert = width3_architecture(16, 225, 1, 3)
        self.assertEqual(74, len(arch))
        self.assertTrue(check(arch, 225, 1, 3, 16, cert))
        self.assertFalse(check(arch[:62], 225, 1, 3, 16, CapacityCertificate(3, [6, 38, 44])))


class TestSearch(unittest.TestCase):
    def test_too_shallow(self):
        self.assertEqual((0, None), max_memorizable([3, 3, 3], 16, 1, 2))

    def test_max_memorizable(self):
        arch, _ = width3_architecture(16, 225, 1, 2)
        n, cert = max_memorizable(arch, 225, 1, 2)
        self.assertGreaterEqual(n, 16)
        self.assertTrue(check(arch, 225, 1, 2, n, cert))
        self.assertFalse(check(arch, 225, 1, 2, n + 1, cert))

    def test_monotone(self):
        arch, _ = width3_architecture(16, 225, 1, 2)
        n, _ = max_memorizable(arch, 225, 1, 2)
        self.assertGreaterEqual(max_memorizable(arch + [3], 225, 1, 2)[0], n)
        wider = list(arch)
        wider[40] = 7
        self.assertGreaterEqual(max_memorizable(wider, 225, 1, 2)[0], n)

    def test_find_certificate(self):
        arch, _ = width3_architecture(16, 225, 1, 2)
        cert = find_certificate(arch, 225, 1, 2, 16)
        self.assertIsNotNone(cert)
        self.assertTrue(check(arch, 225, 1, 2, 16, cert))
        self.assertIsNone(find_certificate(arch, 225, 1, 2, 40))

    def test_width3_architecture_arguments(self):
        self.assertRaises(InvalidArgument, width3_architecture, 3, 16, 1, 2)
        self.assertRaises(InvalidArgument, width3_architecture, 8, 16, 1, 0)


class TestBuildFromCertificate(unittest.TestCase):
    """
    Builds follow the given widths exactly and memorize
    """

    def test_four_points(self):
        arch = [3] * 20
        cert = CapacityCertificate(2, [4, 5])
        ds = random_separated_dataset(4, 1, 2, delta_sq=16, seed=3)
        self.assertIsNotNone(ds)
        net = build_from_certificate(arch, cert, ds, delta_sq=16)
        self.assertEqual(arch, net.layer_widths())
        assert_memorizes(self, net, ds)

    def test_line(self):
        arch, cert = width3_architecture(16, 226, 1, 2)
        ds = line_dataset(16)
        net = build_from_certificate(arch, cert, ds, delta_sq=226)
        self.assertEqual(arch, net.layer_widths())
        assert_memorizes(self, net, ds)
        self.assertEqual(cert.to_json(), net.meta["certificate"])

    def test_designed_architectures_are_sound(self):
        for n, dim, classes, seed in ((4, 1, 2, 0), (6, 2, 2, 1), (9, 2, 3, 2), (10, 1, 4, 3), (12, 3, 2, 4)):
            ds = grid_dataset(n, dim, classes, seed=seed)
            ratio = measure(ds).ratio_sq
            arch, cert = width3_architecture(n, ratio, dim, classes)
            self.assertTrue(check(arch, ratio, dim, classes, n, cert))
            net = build_from_certificate(arch, cert, ds, seed=seed)
            self.assertEqual(arch, net.layer_widths())
            assert_memorizes(self, net, ds)

    def test_random_certified_instances(self):
        # grid subsets of at most 32 points in d_x <= 3 have ratio at most 961
        delta_sq = 1000
        built = 0
        for trial in range(200):
            rng = np.random.default_rng(trial)
            arch = rng.integers(3, 9, size=int(rng.integers(24, 72))).tolist()
            d_x, classes, n = int(rng.integers(1, 4)), int(rng.integers(2, 5)), int(rng.integers(4, 33))
            cert = find_certificate(arch, delta_sq, d_x, classes, n)
            if cert is None:
                continue
            ds = random_separated_dataset(n, d_x, classes, delta_sq, seed=trial)
            with self.subTest(trial=trial, n=n, d_x=d_x, classes=classes, cert=cert):
                self.assertIsNotNone(ds)
                self.assertTrue(check(arch, delta_sq, d_x, classes, n, cert))
                net = build_from_certificate(arch, cert, ds, seed=trial, delta_sq=delta_sq)
                self.assertEqual(arch, net.layer_widths())
                self.assertTrue(verify(net, ds).passed)
            built += 1
            if built == 20:
                break
        self.assertEqual(20, built)

    def test_single_point(self):
        arch = [3, 4, 3]
        net = build_from_certificate(arch, CapacityCertificate(2, [1, 2]), Dataset([[2, 2]], [1]))
        self.assertEqual(arch, net.layer_widths())
        assert_memorizes(self, net, Dataset([[2, 2]], [1]))

    def test_rejects_uncertified(self):
        arch, cert = width3_architecture(16, 225, 1, 2)
        self.assertRaises(CertificateError, build_from_certificate, arch, cert, line_dataset(17), 0, 289)
        self.assertRaises(CertificateError, build_from_certificate, arch, cert, line_dataset(16), 0, Fraction(224))

    def test_separation_is_strict(self):
        ds = line_dataset(16)
        self.assertEqual(225, measure(ds).ratio_sq)
        arch, cert = width3_architecture(16, 226, 1, 2)
        self.assertRaises(CertificateError, build_from_certificate, arch, cert, ds, 0, 225)
        self.assertEqual(arch, build_from_certificate(arch, cert, ds, 0, 226).layer_widths())


if __name__ == "__main__":
    unittest.main()
