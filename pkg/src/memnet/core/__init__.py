from .scalar import *
from .network import *
from .dataset import *
from .evaluate import *
from .serialize import *
from .text_layout import *
from .report_file import *
