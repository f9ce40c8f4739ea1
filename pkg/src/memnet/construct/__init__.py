from .separateness import *
from .projection import *
from .compression import *
from .memorizer import *
from .pipeline import *
from .criteria import *
