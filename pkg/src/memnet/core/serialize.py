import json
import logging

from memnet.core.network import ActivationKind, ActivationTag, AffineLayer, SigmoidNetwork, StepIdNetwork
from memnet.core.scalar import format_exact, parse_exact
from memnet.errors import InputShapeError

__doc__ = """Network JSON codec

{
  "input_dim": 2,
  "layers": [
    {"in_dim": 2, "out_dim": 1,
     "weights": [[0, 1, "3/4"]],
     "biases": ["-1/1"],
     "activations": ["step"]},
    ...
  ],
  "meta": {...}
}

Rationals are written as "num/den" digit strings, so a round trip is lossless.
Sigmoid networks keep their kind, precision and achieved eps in meta.
"""

__all__ = ["network_to_json", "network_from_json", "dumps", "loads", "save", "load"]

logger = logging.getLogger(__name__)


def _layer_to_json(layer):
    return {
        "in_dim": layer.in_dim,
        "out_dim": layer.out_dim,
        "weights": [[row, col, format_exact(w)] for (row, col), w in sorted(layer.weights.items())],
        "biases": [format_exact(b) for b in layer.biases],
        "activations": [str(tag) for tag in layer.activations],
    }


def _layer_from_json(data, index):
    try:
        layer = AffineLayer(
            int(data["in_dim"]),
            {(int(r), int(c)): parse_exact(w) for r, c, w in data["weights"]},
            [parse_exact(b) for b in data["biases"]],
            [ActivationTag.parse(a) for a in data["activations"]],
        )
    except (KeyError, TypeError, ValueError) as e:
        raise InputShapeError(f"layer {index}: malformed entry ({e})")
    if layer.out_dim != int(data.get("out_dim", layer.out_dim)):
        raise InputShapeError(f"layer {index}: out_dim does not match its biases")
    return layer


def network_to_json(net):
    meta = dict(net.meta)
    if isinstance(net, SigmoidNetwork):
        meta.update(
            sigma=net.kind.name,
            precision=net.precision,
            eps=net.eps,
            stage_deviations=net.stage_deviations,
        )
    return {
        "input_dim": net.input_dim,
        "layers": [_layer_to_json(layer) for layer in net.layers],
        "meta": meta,
    }


def network_from_json(data):
    """Rebuild a StepIdNetwork, or a SigmoidNetwork when hidden neurons are sigmoidal."""
    try:
        layers = [_layer_from_json(layer, i) for i, layer in enumerate(data["layers"])]
        input_dim = int(data["input_dim"])
    except (KeyError, TypeError) as e:
        raise InputShapeError(f"not a network document ({e})")
    meta = dict(data.get("meta") or {})
    sigma_names = {
        tag.sigma for layer in layers for tag in layer.activations if tag.kind == ActivationKind.SIGMA
    }
    if not sigma_names:
        return StepIdNetwork(layers, input_dim, meta)
    if len(sigma_names) > 1:
        raise InputShapeError(f"mixed sigmoidal kinds {sorted(sigma_names)}")
    from memnet.sigmoid.kinds import get_kind

    kind = get_kind(sigma_names.pop())
    meta.pop("sigma", None)
    return SigmoidNetwork(
        layers,
        kind,
        input_dim,
        meta,
        eps=meta.pop("eps", None),
        precision=int(meta.pop("precision", 53)),
        stage_deviations=meta.pop("stage_deviations", None),
    )


def dumps(net, indent=None):
    return json.dumps(network_to_json(net), indent=indent)


def loads(text):
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise InputShapeError(f"invalid JSON: {e}")
    return network_from_json(data)


def save(net, filename):
    with open(filename, "w") as f:
        f.write(dumps(net))
    logger.info("network written to %s", filename)


def load(filename):
    with open(filename) as f:
        return loads(f.read())
