from . import config0
from . import config1
