from enum import Enum, auto
from fractions import Fraction

from memnet.errors import ArchitectureError, InputShapeError

__doc__ = """Layered affine networks with per-neuron activation tags

A network is an ordered list of AffineLayer objects. Every layer but the last is a hidden
layer; the last one is the output map and carries ID activations only. Weights are kept
in a sparse map and parameters are counted per stored entry, so a builder decides what
it pays for by what it stores:

    layer = AffineLayer(in_dim=2)
    layer.add_neuron({0: 1, 1: -1}, bias=-1, activation=STEP)   # 1[x0 - x1 - 1 >= 0]
    layer.add_neuron({0: 1}, activation=ID)                     # pass x0 through

Networks built from STEP/ID tags are StepIdNetwork; after conversion to a sigmoidal
activation they become SigmoidNetwork with the same layer shape.
"""

__all__ = [
    "ActivationKind",
    "ActivationTag",
    "STEP",
    "ID",
    "sigma_tag",
    "AffineLayer",
    "FeedForwardNetwork",
    "StepIdNetwork",
    "SigmoidNetwork",
    "NetworkStats",
    "stats",
]


class ActivationKind(Enum):
    STEP = auto()
    ID = auto()
    SIGMA = auto()


class ActivationTag:
    """
    Activation of a single neuron: STEP (x -> 1[x >= 0]), ID or SIGMA(<kind name>)
    """

    __slots__ = ("kind", "sigma")

    def __init__(self, kind, sigma=None):
        if not isinstance(kind, ActivationKind):
            raise TypeError(f"kind must be an instance of {ActivationKind.__name__}")
        if (kind == ActivationKind.SIGMA) != (sigma is not None):
            raise ValueError("sigma kind name is required for SIGMA tags only")
        self.kind = kind
        self.sigma = sigma

    @classmethod
    def parse(cls, text):
        if text == "step":
            return STEP
        if text == "id":
            return ID
        if text.startswith("sigma:") and len(text) > len("sigma:"):
            return cls(ActivationKind.SIGMA, text[len("sigma:"):])
        raise InputShapeError(f"unknown activation tag {text!r}")

    @property
    def is_step(self):
        return self.kind == ActivationKind.STEP

    @property
    def is_id(self):
        return self.kind == ActivationKind.ID

    def __str__(self):
        if self.kind == ActivationKind.SIGMA:
            return f"sigma:{self.sigma}"
        return self.kind.name.lower()

    def __repr__(self):
        return f"ActivationTag({self})"

    def __eq__(self, other):
        return isinstance(other, ActivationTag) and (self.kind, self.sigma) == (other.kind, other.sigma)

    def __hash__(self):
        return hash((self.kind, self.sigma))


STEP = ActivationTag(ActivationKind.STEP)
ID = ActivationTag(ActivationKind.ID)


def sigma_tag(name):
    return ActivationTag(ActivationKind.SIGMA, name)


class AffineLayer:
    """
    Affine map followed by per-neuron activations.
    weights: {(out_index, in_index): value}, only stored entries count as parameters
    """

    def __init__(self, in_dim, weights=None, biases=None, activations=None):
        """
        :param in_dim: input dimension
        :param weights: sparse weight map, may be omitted and filled by add_neuron
        :param biases: one bias per neuron
        :param activations: one ActivationTag per neuron
        """
        self.in_dim = in_dim
        self.weights = dict(weights or {})
        self.biases = list(biases or [])
        self.activations = list(activations or [])
        self._rows = None
        self._sanity_check()

    @property
    def out_dim(self):
        return len(self.biases)

    def _sanity_check(self):
        if self.in_dim < 0:
            raise ArchitectureError(f"negative input dimension {self.in_dim}")
        if len(self.biases) != len(self.activations):
            raise ArchitectureError(
                f"{len(self.biases)} biases but {len(self.activations)} activations"
            )
        for (row, col) in self.weights:
            if not (0 <= row < self.out_dim and 0 <= col < self.in_dim):
                raise ArchitectureError(
                    f"weight index ({row}, {col}) outside {self.out_dim}x{self.in_dim}"
                )

    def add_neuron(self, inputs=None, bias=0, activation=ID):
        """
        Append a neuron and return its index
        :param inputs: {in_index: weight}; every listed entry is stored, zeros included
        :param bias: neuron bias
        :param activation: ActivationTag of the neuron
        """
        row = self.out_dim
        for col, weight in (inputs or {}).items():
            if not 0 <= col < self.in_dim:
                raise ArchitectureError(f"input index {col} outside [0, {self.in_dim})")
            self.weights[(row, col)] = weight
        self.biases.append(bias)
        self.activations.append(activation)
        self._rows = None
        return row

    def densify(self):
        """Store an explicit zero for every missing (out, in) entry."""
        for row in range(self.out_dim):
            for col in range(self.in_dim):
                self.weights.setdefault((row, col), 0)
        self._rows = None
        return self

    def rows(self):
        """Per-neuron list of (in_index, weight), in input order."""
        if self._rows is None:
            rows = [[] for _ in range(self.out_dim)]
            for (row, col), weight in sorted(self.weights.items()):
                rows[row].append((col, weight))
            self._rows = rows
        return self._rows

    def param_count(self):
        return len(self.weights) + len(self.biases)

    def pre_activations(self, x):
        return [
            sum((w * x[c] for c, w in row), bias)
            for row, bias in zip(self.rows(), self.biases)
        ]

    def map_values(self, fn):
        """Copy of the layer with fn applied to every weight and bias."""
        return AffineLayer(
            self.in_dim,
            {key: fn(value) for key, value in self.weights.items()},
            [fn(b) for b in self.biases],
            self.activations,
        )

    def copy(self):
        return self.map_values(lambda v: v)

    def __eq__(self, other):
        return (
            isinstance(other, AffineLayer)
            and self.in_dim == other.in_dim
            and self.weights == other.weights
            and self.biases == other.biases
            and self.activations == other.activations
        )


class NetworkStats:
    """
    Size summary: hidden layer count, width (max hidden dim) and parameter count
    """

    def __init__(self, hidden_layers, width, param_count, input_dim=None, output_dim=None):
        self.hidden_layers = hidden_layers
        self.width = width
        self.param_count = param_count
        self.input_dim = input_dim
        self.output_dim = output_dim

    def to_json(self):
        return {
            "hidden_layers": self.hidden_layers,
            "width": self.width,
            "param_count": self.param_count,
            "input_dim": self.input_dim,
            "output_dim": self.output_dim,
        }

    def render_summary(self, report):
        with report.block("network") as block:
            block(f"input dim: {self.input_dim}")
            block(f"hidden layers: {self.hidden_layers}")
            block(f"width: {self.width}")
            block(f"parameters: {self.param_count}")

    def __eq__(self, other):
        return isinstance(other, NetworkStats) and self.to_json() == other.to_json()

    def __repr__(self):
        return (
            f"NetworkStats(hidden_layers={self.hidden_layers}, width={self.width}, "
            f"param_count={self.param_count})"
        )


class FeedForwardNetwork:
    """
    Base class of layered networks. Layers must chain and the output layer is ID only.
    """

    def __init__(self, layers, input_dim=None, meta=None):
        """
        :param layers: ordered AffineLayer list, the last one being the output map
        :param input_dim: defaults to the first layer's in_dim
        :param meta: free-form build parameters stored with the network
        """
        self.layers = list(layers)
        self.input_dim = self.layers[0].in_dim if input_dim is None and self.layers else input_dim
        self.meta = dict(meta or {})
        self._sanity_check()

    def _sanity_check(self):
        if not self.layers:
            raise ArchitectureError("a network needs at least its output layer")
        if self.layers[0].in_dim != self.input_dim:
            raise ArchitectureError(
                f"first layer takes {self.layers[0].in_dim} inputs, network declares {self.input_dim}"
            )
        for index, (prev, layer) in enumerate(zip(self.layers, self.layers[1:]), start=1):
            if prev.out_dim != layer.in_dim:
                raise ArchitectureError(
                    f"layer {index} takes {layer.in_dim} inputs but layer {index - 1} emits {prev.out_dim}"
                )
        if any(not tag.is_id for tag in self.layers[-1].activations):
            raise ArchitectureError("output layer must use ID activations only")

    @property
    def output_dim(self):
        return self.layers[-1].out_dim

    @property
    def hidden_layers(self):
        return len(self.layers) - 1

    def layer_widths(self):
        """Widths of the hidden layers, in order."""
        return [layer.out_dim for layer in self.layers[:-1]]

    def stats(self):
        return stats(self)


class StepIdNetwork(FeedForwardNetwork):
    """
    Network with exact rational parameters and STEP/ID neurons only.

    Builders produce segments (small StepIdNetworks whose output map is affine) and chain
    them with compose(), which folds the output map of one segment into the first layer of
    the next, so chaining never adds a hidden layer.
    """

    def _sanity_check(self):
        super()._sanity_check()
        for index, layer in enumerate(self.layers):
            for tag in layer.activations:
                if tag.kind == ActivationKind.SIGMA:
                    raise ArchitectureError(f"layer {index} holds a sigmoidal neuron")

    @classmethod
    def affine(cls, in_dim, rows, biases=None, meta=None):
        """
        Zero-hidden-layer segment computing an affine map
        :param rows: per output a {in_index: weight} map
        """
        layer = AffineLayer(in_dim)
        biases = biases or [0] * len(rows)
        for row, bias in zip(rows, biases):
            layer.add_neuron(row, bias, ID)
        return cls([layer], meta=meta)

    @classmethod
    def identity(cls, dim=1):
        return cls.affine(dim, [{i: 1} for i in range(dim)])

    @classmethod
    def permutation(cls, order):
        """Zero-hidden-layer segment whose output i is input order[i]."""
        return cls.affine(len(order), [{source: 1} for source in order])

    @classmethod
    def constant(cls, input_dim, value, meta=None):
        return cls.affine(input_dim, [{}], [Fraction(value)], meta=meta)

    @classmethod
    def pass_through(cls, dim=1, order=None):
        """One hidden layer of ID neurons copying (a permutation of) the inputs."""
        order = list(range(dim)) if order is None else list(order)
        hidden = AffineLayer(len(order))
        for source in order:
            hidden.add_neuron({source: 1}, 0, ID)
        output = AffineLayer(len(order))
        for i in range(len(order)):
            output.add_neuron({i: 1}, 0, ID)
        return cls([hidden, output])

    def compose(self, other):
        """
        Network computing other(self(x)); the boundary affine maps are merged.
        A merged entry is stored whenever some path connects its endpoints, even if the
        products cancel to zero.
        """
        if self.output_dim != other.input_dim:
            raise ArchitectureError(
                f"cannot compose: {self.output_dim} outputs feed {other.input_dim} inputs"
            )
        merged = _merge_affine(self.layers[-1], other.layers[0])
        meta = {**self.meta, **other.meta}
        return type(self)(self.layers[:-1] + [merged] + other.layers[1:], self.input_dim, meta)

    def stack(self, other):
        """Plain layer concatenation; self's output layer becomes a hidden ID layer."""
        if self.output_dim != other.input_dim:
            raise ArchitectureError(
                f"cannot stack: {self.output_dim} outputs feed {other.input_dim} inputs"
            )
        return type(self)(self.layers + other.layers, self.input_dim, {**self.meta, **other.meta})

    def scaled_output(self, factor):
        """Same network with its output map multiplied by factor."""
        factor = Fraction(factor)
        layers = self.layers[:-1] + [self.layers[-1].map_values(lambda v: v * factor)]
        return type(self)(layers, self.input_dim, self.meta)

    def padded(self, widths):
        """
        Copy whose hidden layers are filled up to the given widths with inert ID neurons
        (no incoming or outgoing weights, bias 0)
        """
        if len(widths) != self.hidden_layers:
            raise ArchitectureError(f"{len(widths)} widths for {self.hidden_layers} hidden layers")
        layers = [layer.copy() for layer in self.layers]
        for index, width in enumerate(widths):
            layer = layers[index]
            if layer.out_dim > width:
                raise ArchitectureError(
                    f"hidden layer {index + 1} needs {layer.out_dim} neurons, only {width} available"
                )
            for _ in range(width - layer.out_dim):
                layer.add_neuron({}, 0, ID)
            follower = layers[index + 1]
            layers[index + 1] = AffineLayer(width, follower.weights, follower.biases, follower.activations)
        return type(self)(layers, self.input_dim, self.meta)

    def with_meta(self, **meta):
        return type(self)(self.layers, self.input_dim, {**self.meta, **meta})


class SigmoidNetwork(FeedForwardNetwork):
    """
    Network whose hidden neurons all use one sigmoidal kind.

    Parameters are stored as exact rationals; for float kinds they are the exact values of
    the rounded binary floats, so `precision` (mantissa bits) fully describes them.
    """

    def __init__(self, layers, kind, input_dim=None, meta=None, eps=None, precision=53,
                 stage_deviations=None):
        """
        :param kind: SigmoidalKind used by every hidden neuron
        :param eps: achieved deviation from the source network on its dataset
        :param precision: evaluation mantissa bits, 53 selects numpy float64
        :param stage_deviations: measured deviation of each conversion stage
        """
        self.kind = kind
        self.eps = eps
        self.precision = precision
        self.stage_deviations = list(stage_deviations or [])
        super().__init__(layers, input_dim, meta)

    def _sanity_check(self):
        super()._sanity_check()
        expected = sigma_tag(self.kind.name)
        for index, layer in enumerate(self.layers[:-1]):
            if any(tag != expected for tag in layer.activations):
                raise ArchitectureError(f"hidden layer {index + 1} is not purely {expected}")


def _merge_affine(first, second):
    """Affine map second∘first followed by second's activations."""
    first_rows = first.rows()
    merged = AffineLayer(first.in_dim)
    for row, bias, activation in zip(second.rows(), second.biases, second.activations):
        entries = {}
        for k, weight in row:
            bias = bias + weight * first.biases[k]
            for col, inner in first_rows[k]:
                entries[col] = entries.get(col, 0) + weight * inner
        merged.add_neuron(entries, bias, activation)
    return merged


def stats(net):
    """Hidden layer count, width and parameter count (stored weights plus biases)."""
    widths = net.layer_widths()
    return NetworkStats(
        hidden_layers=net.hidden_layers,
        width=max(widths) if widths else 0,
        param_count=sum(layer.param_count() for layer in net.layers),
        input_dim=net.input_dim,
        output_dim=net.output_dim,
    )
