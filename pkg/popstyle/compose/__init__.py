from . import compose
from . import monitoring
