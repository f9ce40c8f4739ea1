import unittest
from fractions import Fraction

from memnet.core import (
    ID,
    STEP,
    ActivationKind,
    ActivationTag,
    AffineLayer,
    SigmoidNetwork,
    StepIdNetwork,
    evaluate_exact,
    sigma_tag,
)
from memnet.errors import ArchitectureError, InputShapeError
from memnet.sigmoid import TANH

__doc__ = """Unit tests for layers, networks and segment composition
"""


def step_segment(threshold):
    """x -> 1[x >= threshold], one hidden STEP neuron."""
    hidden = AffineLayer(1)
    hidden.add_neuron({0: 1}, -threshold, STEP)
    output = AffineLayer(1)
    output.add_neuron({0: 1}, 0, ID)
    return StepIdNetwork([hidden, output])


class TestActivationTag(unittest.TestCase):
    def test_parse_round_trip(self):
        for text in ("step", "id", "sigma:tanh"):
            self.assertEqual(text, str(ActivationTag.parse(text)))

    def test_sigma_tag(self):
        tag = sigma_tag("logistic")
        self.assertEqual(ActivationKind.SIGMA, tag.kind)
        self.assertEqual(tag, ActivationTag.parse("sigma:logistic"))
        self.assertFalse(tag.is_step or tag.is_id)

    def test_unknown_tag_raises(self):
        self.assertRaises(InputShapeError, ActivationTag.parse, "relu")
        self.assertRaises(InputShapeError, ActivationTag.parse, "sigma:")

    def test_sigma_requires_name(self):
        self.assertRaises(ValueError, ActivationTag, ActivationKind.SIGMA)
        self.assertRaises(ValueError, ActivationTag, ActivationKind.STEP, "tanh")


class TestAffineLayer(unittest.TestCase):
    """
    Sparse storage and parameter accounting
    """

    def test_add_neuron_returns_index(self):
        layer = AffineLayer(2)
        self.assertEqual(0, layer.add_neuron({0: 1}, 0, ID))
        self.assertEqual(1, layer.add_neuron({1: 1}, 0, STEP))
        self.assertEqual(2, layer.out_dim)

    def test_stored_zero_counts(self):
        layer = AffineLayer(2)
        layer.add_neuron({0: 1, 1: 0}, -1, STEP)
        self.assertEqual(3, layer.param_count())

    def test_densify(self):
        layer = AffineLayer(3)
        layer.add_neuron({0: 1})
        self.assertEqual(2, layer.param_count())
        self.assertEqual(4, layer.densify().param_count())

    def test_out_of_range_input_raises(self):
        layer = AffineLayer(1)
        self.assertRaises(ArchitectureError, layer.add_neuron, {1: 1})

    def test_inconsistent_construction_raises(self):
        self.assertRaises(ArchitectureError, AffineLayer, 1, {}, [0], [])
        self.assertRaises(ArchitectureError, AffineLayer, 1, {(0, 3): 1}, [0], [ID])

    def test_pre_activations(self):
        layer = AffineLayer(2)
        layer.add_neuron({0: 2, 1: -1}, Fraction(1, 2))
        self.assertEqual([Fraction(9, 2)], layer.pre_activations([Fraction(3), Fraction(2)]))


class TestStepIdNetwork(unittest.TestCase):
    """
    Segment algebra used by every builder
    """

    def test_output_layer_must_be_id(self):
        layer = AffineLayer(1)
        layer.add_neuron({0: 1}, 0, STEP)
        self.assertRaises(ArchitectureError, StepIdNetwork, [layer])

    def test_layers_must_chain(self):
        first = AffineLayer(1)
        first.add_neuron({0: 1}, 0, ID)
        second = AffineLayer(2)
        second.add_neuron({0: 1}, 0, ID)
        self.assertRaises(ArchitectureError, StepIdNetwork, [first, second])

    def test_compose_merges_boundary_maps(self):
        scale = StepIdNetwork.affine(1, [{0: 2}], [1])
        net = scale.compose(step_segment(7))
        self.assertEqual(1, net.hidden_layers)
        self.assertEqual([1], evaluate_exact(net, [3]))
        self.assertEqual([0], evaluate_exact(net, [Fraction(5, 2)]))

    def test_compose_never_adds_hidden_layers(self):
        net = StepIdNetwork.pass_through(1).compose(StepIdNetwork.pass_through(1))
        self.assertEqual(2, net.hidden_layers)
        self.assertEqual(0, StepIdNetwork.identity(1).compose(StepIdNetwork.identity(1)).hidden_layers)

    def test_compose_dimension_mismatch_raises(self):
        self.assertRaises(ArchitectureError, StepIdNetwork.identity(2).compose, StepIdNetwork.identity(1))

    def test_stack_turns_output_into_hidden_layer(self):
        net = StepIdNetwork.identity(1).stack(StepIdNetwork.identity(1))
        self.assertEqual(1, net.hidden_layers)
        self.assertEqual([5], evaluate_exact(net, [5]))

    def test_constant(self):
        net = StepIdNetwork.constant(2, 5)
        self.assertEqual([5], evaluate_exact(net, [1, 2]))
        self.assertEqual(1, net.stats().param_count)

    def test_permutation_and_pass_through(self):
        self.assertEqual([4, 3], evaluate_exact(StepIdNetwork.permutation([1, 0]), [3, 4]))
        net = StepIdNetwork.pass_through(2, [1, 0])
        self.assertEqual(1, net.hidden_layers)
        self.assertEqual([4, 3], evaluate_exact(net, [3, 4]))

    def test_scaled_output(self):
        net = StepIdNetwork.constant(1, 4).scaled_output(Fraction(1, 2))
        self.assertEqual([2], evaluate_exact(net, [0]))

    def test_padded(self):
        net = step_segment(1).padded([3])
        self.assertEqual([3], net.layer_widths())
        self.assertEqual([1], evaluate_exact(net, [2]))
        self.assertEqual(step_segment(1).stats().param_count, net.stats().param_count - 2)

    def test_padding_below_width_raises(self):
        self.assertRaises(ArchitectureError, StepIdNetwork.pass_through(2).padded, [1])
        self.assertRaises(ArchitectureError, StepIdNetwork.pass_through(1).padded, [3, 3])

    def test_with_meta_merges(self):
        net = StepIdNetwork.identity(1).with_meta(a=1).with_meta(b=2)
        self.assertEqual({"a": 1, "b": 2}, net.meta)

    def test_stats(self):
        stats = step_segment(1).padded([4]).stats()
        self.assertEqual(1, stats.hidden_layers)
        self.assertEqual(4, stats.width)
        self.assertEqual(1, stats.input_dim)
        self.assertEqual(1, stats.output_dim)

    def test_sigma_neuron_rejected(self):
        hidden = AffineLayer(1)
        hidden.add_neuron({0: 1}, 0, sigma_tag("tanh"))
        output = AffineLayer(1)
        output.add_neuron({0: 1})
        self.assertRaises(ArchitectureError, StepIdNetwork, [hidden, output])


class TestSigmoidNetwork(unittest.TestCase):
    def test_hidden_layers_must_match_kind(self):
        hidden = AffineLayer(1)
        hidden.add_neuron({0: 1}, 0, STEP)
        output = AffineLayer(1)
        output.add_neuron({0: 1})
        self.assertRaises(ArchitectureError, SigmoidNetwork, [hidden, output], TANH)

    def test_keeps_precision_and_deviations(self):
        hidden = AffineLayer(1)
        hidden.add_neuron({0: 1}, 0, sigma_tag("tanh"))
        output = AffineLayer(1)
        output.add_neuron({0: 1})
        net = SigmoidNetwork([hidden, output], TANH, eps=0.5, precision=113, stage_deviations=[0.5])
        self.assertEqual(113, net.precision)
        self.assertEqual([0.5], net.stage_deviations)
        self.assertEqual(1, net.hidden_layers)


if __name__ == "__main__":
    unittest.main()
