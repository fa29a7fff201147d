"""
Text score format.

    #TEMPO 120
    #MODE major
    #OCTAVES melody=0 bass=-2
    #SECTION A 8 var=no
    1___3___5___3___ | I | 1_______5_______
    ...

One line per bar: melody slots | chord | bass slots (bass optional, whole bar rest if absent). Slot tokens: a degree
1..15 starts a note, "_" continues the sounding note (or rest), "." is a rest 16th. Two adjacent degree tokens must be
separated by a space ("1 1" is two notes, "11" is degree 11). Lines starting with "//" are comments.
"""
import re

# Internal imports
from popstyle.songsym import note as N
from popstyle.songsym.note import InputError, InvariantViolation
from popstyle.songsym.song import Song, DEFAULT_MELODY_OCTAVE, DEFAULT_BASS_OCTAVE

COMMENT_PREFIX = "//"
TOKEN_REGEX    = re.compile(r"\d+|_|\.|\s+|.")
DEFAULT_TEMPO  = 120.
DEFAULT_MODE   = "major"


class ScoreSyntaxError(InputError):
    """
    Syntax error in a text score, with 1-based line and column.
    """
    def __init__(self, message, line, column = 1):
        self.line   = line
        self.column = column
        InputError.__init__(self, "line %i, column %i: %s" % (line, column, message))


def _format_number (x):
    x = float(x)
    return "%d" % x if x.is_integer() else repr(x)


# ----------------------------------------------------------------------------------------------------------------------
# ------------------------------------------------------- PARSING ------------------------------------------------------
# ----------------------------------------------------------------------------------------------------------------------

class _TrackParser:
    """
    Accumulates (pitch, duration) couples of one track from slot fields.
    """
    def __init__(self, name):
        self.name  = name
        self.pairs = []
        self.section_start = 0   # idx in pairs of first note of current section

    def new_section(self):
        self.section_start = len(self.pairs)

    def read_bar(self, field, line, column0):
        n_slots = 0
        for match in TOKEN_REGEX.finditer(field):
            tok    = match.group()
            column = column0 + match.start()
            if tok.isspace():
                continue
            if tok.isdigit():
                pitch = int(tok)
                if not (1 <= pitch <= N.N_DEGREES):
                    raise InvariantViolation("line %i, column %i: %s pitch %i out of range [1, %i]."
                                             % (line, column, self.name, pitch, N.N_DEGREES))
                self.pairs.append([pitch, 1])
            elif tok == ".":
                self.pairs.append([N.REST, 1])
            elif tok == "_":
                if len(self.pairs) == self.section_start:
                    raise ScoreSyntaxError("%s continuation '_' at the start of a section." % self.name, line, column)
                self.pairs[-1][1] += 1
                if self.pairs[-1][1] > N.MAX_DURATION and self.pairs[-1][0] != N.REST:
                    raise InvariantViolation("line %i, column %i: %s note longer than %i sixteenths."
                                             % (line, column, self.name, N.MAX_DURATION))
            else:
                raise ScoreSyntaxError("unexpected character %r in %s slots." % (tok, self.name), line, column)
            n_slots += 1
        if n_slots != N.SLOTS_PER_BAR:
            raise InvariantViolation("line %i: %s bar has %i slots, bars must sum to %i sixteenths."
                                     % (line, self.name, n_slots, N.SLOTS_PER_BAR))


def parse_text_score (text, name = None):
    """
    Parses a text score.
    Parameters
    ----------
    text : str
    name : str or None
        Label given to the song.
    Returns
    -------
    song : song.Song
    """
    tempo  = DEFAULT_TEMPO
    mode   = DEFAULT_MODE
    octaves = {"melody": DEFAULT_MELODY_OCTAVE, "bass": DEFAULT_BASS_OCTAVE}
    sections = []
    chords   = []
    melody = _TrackParser("melody")
    bass   = _TrackParser("bass")
    bars_in_section = 0
    section_line    = None

    def close_section():
        if len(sections) > 0 and bars_in_section != sections[-1][1]:
            raise ScoreSyntaxError("section %s declares %i bars but has %i."
                                   % (sections[-1][0], sections[-1][1], bars_in_section), section_line)

    for i_line, raw in enumerate(text.splitlines()):
        line_no = i_line + 1
        line = raw.strip()
        if line == "" or line.startswith(COMMENT_PREFIX):
            continue
        indent = len(raw) - len(raw.lstrip())

        # ---------- DIRECTIVES ----------
        if line.startswith("#"):
            parts = line.split()
            keyword = parts[0][1:].upper()
            if keyword == "TEMPO":
                if len(parts) != 2:
                    raise ScoreSyntaxError("expected '#TEMPO <bpm>'.", line_no, indent + 1)
                try: tempo = float(parts[1])
                except ValueError: raise ScoreSyntaxError("tempo %r is not a number." % parts[1], line_no, indent + 7)
            elif keyword == "MODE":
                if len(parts) != 2 or parts[1] not in ("major", "minor"):
                    raise ScoreSyntaxError("expected '#MODE major' or '#MODE minor'.", line_no, indent + 1)
                mode = parts[1]
            elif keyword == "OCTAVES":
                for part in parts[1:]:
                    key, _, value = part.partition("=")
                    if key not in octaves:
                        raise ScoreSyntaxError("unknown octave track %r." % key, line_no, raw.find(part) + 1)
                    try: octaves[key] = int(value)
                    except ValueError: raise ScoreSyntaxError("octave %r is not an integer." % value, line_no,
                                                              raw.find(part) + 1)
            elif keyword == "SECTION":
                if len(parts) != 4 or not parts[3].startswith("var=") or parts[3][4:] not in ("yes", "no"):
                    raise ScoreSyntaxError("expected '#SECTION <name> <bars> var=yes|no'.", line_no, indent + 1)
                try: length = int(parts[2])
                except ValueError: raise ScoreSyntaxError("section length %r is not an integer." % parts[2],
                                                          line_no, raw.find(parts[2]) + 1)
                close_section()
                sections.append((parts[1], length, parts[3][4:] == "yes"))
                bars_in_section = 0
                section_line    = line_no
                melody.new_section()
                bass.new_section()
            else:
                raise ScoreSyntaxError("unknown directive %r." % parts[0], line_no, indent + 1)
            continue

        # ---------- BARS ----------
        if len(sections) == 0:
            raise ScoreSyntaxError("bar before any #SECTION header.", line_no, indent + 1)
        fields = raw.split("|")
        if len(fields) not in (2, 3):
            raise ScoreSyntaxError("expected '<melody> | <chord> | <bass>'.", line_no, indent + 1)
        columns = [0]
        for f in fields[:-1]:
            columns.append(columns[-1] + len(f) + 1)
        melody.read_bar(fields[0], line_no, columns[0] + 1)
        chord_tok = fields[1].strip()
        if chord_tok not in N.CHORD_NAME_TO_IDX:
            raise InvariantViolation("line %i, column %i: unknown chord %r, expected one of %s."
                                     % (line_no, columns[1] + 1, chord_tok, N.CHORD_NAMES))
        chords.append(N.CHORD_NAME_TO_IDX[chord_tok])
        if len(fields) == 3:
            bass.read_bar(fields[2], line_no, columns[2] + 1)
        else:
            bass.pairs.append([N.REST, N.SLOTS_PER_BAR])
        bars_in_section += 1
    close_section()

    return Song(sections      = sections,
                melody        = melody.pairs,
                chords        = chords,
                bass          = bass.pairs,
                tempo         = tempo,
                mode          = mode,
                melody_octave = octaves["melody"],
                bass_octave   = octaves["bass"],
                name          = name)


def read_text_score (path):
    """
    Reads a text score file, the song being named after the file.
    """
    with open(path, "r") as f:
        text = f.read()
    return parse_text_score(text, name = str(path))


# ----------------------------------------------------------------------------------------------------------------------
# ------------------------------------------------------ RENDERING -----------------------------------------------------
# ----------------------------------------------------------------------------------------------------------------------

def _track_slots (notes, n_bars):
    """
    Slot tokens of a track, one list of 16 tokens per bar.
    """
    slots = []
    for n in notes:
        if n.is_rest:
            slots += ["."] * n.duration
        else:
            slots += [str(n.pitch)] + ["_"] * (n.duration - 1)
    return [slots[i*N.SLOTS_PER_BAR:(i+1)*N.SLOTS_PER_BAR] for i in range(n_bars)]


def _join_slots (tokens):
    out = ""
    prev_is_digit = False
    for tok in tokens:
        is_digit = tok.isdigit()
        if is_digit and prev_is_digit:
            out += " "
        out += tok
        prev_is_digit = is_digit
    return out


def render_text_score (song):
    """
    Canonical text form of a song.
    Parameters
    ----------
    song : song.Song
    Returns
    -------
    text : str
    """
    lines = ["#TEMPO %s" % _format_number(song.tempo),
             "#MODE %s" % song.mode,
             "#OCTAVES melody=%i bass=%i" % (song.melody_octave, song.bass_octave)]
    melody_bars = _track_slots(song.melody, song.n_bars)
    bass_bars   = _track_slots(song.bass,   song.n_bars)
    bar = 0
    for s in song.sections:
        lines.append("#SECTION %s %i var=%s" % (s.name, s.length, "yes" if s.is_variation else "no"))
        for _ in range(s.length):
            lines.append("%s | %s | %s" % (_join_slots(melody_bars[bar]),
                                           N.CHORD_NAMES[song.chords[bar]],
                                           _join_slots(bass_bars[bar])))
            bar += 1
    return "\n".join(lines) + "\n"
