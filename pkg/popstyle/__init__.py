from . import songsym
from . import compose
from . import config
from . import task

# Making important interface functions available at root level
generate = task.generate.generate
evaluate = task.evaluate.evaluate
