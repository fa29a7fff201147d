from . import note
from . import song
from . import textscore
from . import midi
from . import stats
from . import structure
from . import chords
from . import contour
from . import rating
from . import melody
from . import bass
