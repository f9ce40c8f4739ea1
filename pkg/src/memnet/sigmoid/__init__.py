from .kinds import *
from .approx import *
