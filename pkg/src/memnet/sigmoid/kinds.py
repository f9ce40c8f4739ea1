import logging
from fractions import Fraction

import mpmath
import numpy as np

from memnet.errors import InvalidArgument

__doc__ = """Sigmoidal activation kinds

A kind is sigmoidal when its limits at -inf and +inf exist and differ, and it has a
point z with a nonzero derivative. Each kind carries a numpy and an mpmath
implementation; hard_tanh is piecewise linear and also evaluates exactly on rationals.
"""

__all__ = ["SigmoidalKind", "register_kind", "get_kind", "available_kinds", "LOGISTIC", "TANH", "HARD_TANH"]

logger = logging.getLogger(__name__)

# far enough out that every built-in kind is saturated well below 1e-100
_FAR_POINT = 2**20


class SigmoidalKind:
    """
    Registered sigmoidal activation
    """

    def __init__(self, name, alpha, beta, smooth_point, numpy_fn, mp_fn, derivative, exact=None):
        """
        :param name: registry key, also the activation tag suffix
        :param alpha: limit at -inf
        :param beta: limit at +inf
        :param smooth_point: z with a nonzero derivative
        :param numpy_fn: vectorized float64 implementation
        :param mp_fn: mpmath implementation (called under the active working precision)
        :param derivative: value of the derivative at z
        :param exact: optional implementation on Fractions
        """
        self.name = name
        self.alpha = float(alpha)
        self.beta = float(beta)
        self.smooth_point = float(smooth_point)
        self.numpy = numpy_fn
        self.mp = mp_fn
        self.derivative = float(derivative)
        self.exact = exact
        self._sanity_check()

    def _sanity_check(self):
        if not self.name or ":" in self.name:
            raise InvalidArgument(f"invalid kind name {self.name!r}")
        if self.alpha == self.beta:
            raise InvalidArgument(f"{self.name}: limits at -inf and +inf must differ")
        if self.derivative == 0:
            raise InvalidArgument(f"{self.name}: derivative at the smooth point must be nonzero")
        gap = abs(self.beta - self.alpha)
        with mpmath.workprec(64):
            low = float(self.mp(mpmath.mpf(-_FAR_POINT)))
            high = float(self.mp(mpmath.mpf(_FAR_POINT)))
        if abs(low - self.alpha) > gap / 4 or abs(high - self.beta) > gap / 4:
            raise InvalidArgument(f"{self.name}: does not approach its declared limits")

    def __call__(self, x):
        return float(self.numpy(np.float64(x)))

    def value(self, x):
        return self(x)

    def __repr__(self):
        return f"SigmoidalKind({self.name!r})"


def _logistic_numpy(x):
    return 0.5 * (1.0 + np.tanh(0.5 * x))


def _logistic_mp(x):
    return 1 / (1 + mpmath.exp(-x))


def _hard_tanh_mp(x):
    return mpmath.mpf(max(-1, min(1, x)))


def _hard_tanh_exact(x):
    return max(Fraction(-1), min(Fraction(1), Fraction(x)))


LOGISTIC = SigmoidalKind("logistic", 0, 1, 0, _logistic_numpy, _logistic_mp, 0.25)
TANH = SigmoidalKind("tanh", -1, 1, 0, np.tanh, mpmath.tanh, 1)
HARD_TANH = SigmoidalKind(
    "hard_tanh", -1, 1, 0, lambda x: np.clip(x, -1.0, 1.0), _hard_tanh_mp, 1, exact=_hard_tanh_exact
)

_KINDS = {}


def register_kind(kind, replace=False):
    """Add a kind to the registry, validated on construction."""
    if not isinstance(kind, SigmoidalKind):
        raise TypeError(f"kind must be an instance of {SigmoidalKind.__name__}")
    if kind.name in _KINDS and not replace:
        raise InvalidArgument(f"sigmoidal kind {kind.name!r} is already registered")
    _KINDS[kind.name] = kind
    logger.debug("registered sigmoidal kind %s", kind.name)
    return kind


def get_kind(name):
    if isinstance(name, SigmoidalKind):
        return name
    try:
        return _KINDS[name]
    except KeyError:
        raise InvalidArgument(f"unknown sigmoidal kind {name!r}, expected one of {available_kinds()}")


def available_kinds():
    return sorted(_KINDS)


for _kind in (LOGISTIC, TANH, HARD_TANH):
    register_kind(_kind)
