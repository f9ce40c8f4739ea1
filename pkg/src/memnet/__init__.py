from . import core
from . import construct
from . import sigmoid
from .errors import *
from .version import VERSION
