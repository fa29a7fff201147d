from . import generate
from . import evaluate
from . import cli
