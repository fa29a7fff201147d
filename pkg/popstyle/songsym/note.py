import numpy as np
from collections import namedtuple

# --------------------- PITCH ---------------------
# Diatonic scale degrees over two octaves starting on C (1 = C, 8 = C', 15 = C'')
N_DEGREES = 15
# Distinguished pitch value of rests (never a valid degree)
REST = 0
# Tonic degrees
TONICS = (1, 8, 15)
# Semitone offsets of the major scale steps
MAJOR_SCALE = (0, 2, 4, 5, 7, 9, 11)
# Diatonic intervals between two degrees lie in [-MAX_INTERVAL, MAX_INTERVAL]
MAX_INTERVAL = N_DEGREES - 1
N_INTERVALS  = 2*MAX_INTERVAL + 1

# --------------------- DURATION ---------------------
# 16th note grid in 4/4
SLOTS_PER_BAR = 16
MAX_DURATION  = SLOTS_PER_BAR
# Positions of beats 1 and 3 in a bar
DOWNBEATS = (0, 8)

# --------------------- CHORDS ---------------------
CHORD_NAMES = ("I", "ii", "iii", "IV", "V", "vi", "viio")
N_CHORDS    = len(CHORD_NAMES)
CHORD_NAME_TO_IDX = {name: idx for idx, name in enumerate(CHORD_NAMES)}
# Idx of some chords used by cadence rules
TONIC_CHORD    = CHORD_NAME_TO_IDX["I"]
DOMINANT_CHORD = CHORD_NAME_TO_IDX["V"]

# --------------------- CHORD TONE CATEGORIES ---------------------
CATEGORY_NAMES = ("root", "third", "fifth", "other")
N_CATEGORIES   = len(CATEGORY_NAMES)
ROOT, THIRD, FIFTH, OTHER = 0, 1, 2, 3


class InputError(ValueError):
    """Malformed user input (score text, MIDI, sidecar, structure string, stats file)."""
    pass


class InvariantViolation(ValueError):
    """A song invariant does not hold."""
    pass


class Note (namedtuple("Note", ["pitch", "duration", "onset"])):
    """
    A note: (scale degree or REST, duration in 16ths, onset position within its bar).
    """
    __slots__ = ()

    @property
    def is_rest(self):
        return self.pitch == REST

    def __repr__(self):
        pitch = "Rest" if self.is_rest else str(self.pitch)
        return "Note(%s, %i @%i)" % (pitch, self.duration, self.onset)


SectionSpec = namedtuple("SectionSpec", ["name", "length", "is_variation"])


def chord_idx (name):
    """
    Idx of chord symbol in CHORD_NAMES.
    Parameters
    ----------
    name : str
    Returns
    -------
    idx : int
    """
    try:
        return CHORD_NAME_TO_IDX[name]
    except KeyError:
        raise InvariantViolation("Unknown chord symbol %r, expected one of %s" % (name, CHORD_NAMES))


def chord_root (chord):
    """
    Root degree (in 1..7) of chord of idx chord.
    """
    return int(chord) + 1


def chord_tone_category (pitch, chord):
    """
    Category of degree(s) relative to a chord: ROOT, THIRD, FIFTH or OTHER.
    Parameters
    ----------
    pitch : int or numpy.array of int
        Degrees in 1..15.
    chord : int
        Idx of chord.
    Returns
    -------
    category : int or numpy.array of int
    """
    step = (np.asarray(pitch) - 1 - int(chord)) % 7
    category = np.where(step == 0, ROOT,
               np.where(step == 2, THIRD,
               np.where(step == 4, FIFTH, OTHER)))
    if category.ndim == 0:
        return int(category)
    return category


def is_chord_tone (pitch, chord):
    """
    Is degree(s) a member of the chord triad. Rests are never chord tones.
    """
    pitch = np.asarray(pitch)
    res = (chord_tone_category(pitch, chord) != OTHER) & (pitch != REST)
    if res.ndim == 0:
        return bool(res)
    return res


def chord_tone_degree (chord, category):
    """
    Degree in 1..7 of chord tone category (ROOT, THIRD or FIFTH) of chord.
    """
    assert category in (ROOT, THIRD, FIFTH), "Only root, third and fifth are chord tones."
    return (int(chord) + 2*category) % 7 + 1


def notes_from_pairs (pairs, start = 0):
    """
    Makes notes from (pitch, duration) couples, computing onsets from cumulative durations.
    Parameters
    ----------
    pairs : iterable of (int, int)
        (pitch, duration) couples, pitch = REST for rests.
    start : int
        Position in 16ths of the first note in the track.
    Returns
    -------
    notes : list of Note
    """
    notes = []
    pos = start
    for pitch, duration in pairs:
        notes.append(Note(int(pitch), int(duration), pos % SLOTS_PER_BAR))
        pos += int(duration)
    return notes


def degree_to_midi (degree, octave = 0):
    """
    MIDI key number of a degree, degree 1 at octave 0 being middle C (60).
    """
    degree = int(degree)
    assert 1 <= degree, "Degree must be >= 1."
    step = (degree - 1) % 7
    return 60 + 12*octave + 12*((degree - 1)//7) + MAJOR_SCALE[step]
