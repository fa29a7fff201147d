import numpy as np

# Internal imports
from popstyle.songsym import note as N
from popstyle.songsym.note import Note, SectionSpec, InvariantViolation

# Default octave offsets (degree 1 = C4 for melody, C2 for bass)
DEFAULT_MELODY_OCTAVE = 0
DEFAULT_BASS_OCTAVE   = -2
MODES = ("major", "minor")


def canonical_track (notes, section_bounds, track_name = "track"):
    """
    Checks a track against song invariants and returns its canonical form: rests split at barlines, adjacent rests
    within a bar merged, onsets recomputed from cumulative durations.
    Parameters
    ----------
    notes : iterable of Note or of (pitch, duration) couples
    section_bounds : list of (int, int)
        (start, end) positions in 16ths of each section.
    track_name : str
        Name of track (for error messages).
    Returns
    -------
    notes : list of Note
    """
    total = section_bounds[-1][1] if len(section_bounds) > 0 else 0
    section_ends = set(end for _, end in section_bounds)
    pos = 0
    pieces = []                                                        # (pitch, start, duration)
    for n in notes:
        pitch, duration = int(n[0]), int(n[1])
        if not (1 <= duration <= N.MAX_DURATION):
            raise InvariantViolation("%s: duration %i out of range [1, %i] at position %i."
                                     % (track_name, duration, N.MAX_DURATION, pos))
        if pitch != N.REST and not (1 <= pitch <= N.N_DEGREES):
            raise InvariantViolation("%s: pitch %i out of range [1, %i] at position %i."
                                     % (track_name, pitch, N.N_DEGREES, pos))
        end = pos + duration
        if pitch != N.REST:
            crossed = [b for b in section_ends if pos < b < end]
            if len(crossed) > 0:
                raise InvariantViolation("%s: note at position %i crosses the section boundary at %i."
                                         % (track_name, pos, crossed[0]))
            pieces.append((pitch, pos, duration))
        else:
            # Splitting rest at barlines
            start = pos
            while start < end:
                bar_end = (start // N.SLOTS_PER_BAR + 1) * N.SLOTS_PER_BAR
                stop = min(end, bar_end)
                if (len(pieces) > 0 and pieces[-1][0] == N.REST
                        and pieces[-1][1] + pieces[-1][2] == start
                        and pieces[-1][1] // N.SLOTS_PER_BAR == start // N.SLOTS_PER_BAR):
                    prev = pieces.pop()
                    pieces.append((N.REST, prev[1], prev[2] + stop - start))
                else:
                    pieces.append((N.REST, start, stop - start))
                start = stop
        pos = end
    if pos != total:
        raise InvariantViolation("%s: total duration %i does not fill the %i bars (%i sixteenths), bars must sum "
                                 "to %i." % (track_name, pos, total // N.SLOTS_PER_BAR, total, N.SLOTS_PER_BAR))
    return [Note(pitch, duration, start % N.SLOTS_PER_BAR) for pitch, start, duration in pieces]


class Song:
    """
    A song: structure + melody, chord and bass tracks + tempo.
    Attributes
    ----------
    sections : tuple of note.SectionSpec
    melody : tuple of note.Note
    chords : tuple of int
        One chord idx per bar.
    bass : tuple of note.Note
    tempo : float
        Beats per minute.
    mode : str
        "major" or "minor".
    melody_octave, bass_octave : int
        Octave offsets used for MIDI export.
    name : str or None
        Label of song (provenance, not part of equality).
    Songs are immutable: tracks are tuples and attributes cannot be set after construction.
    """
    def __init__(self, sections, melody, chords, bass, tempo = 120., mode = "major",
                 melody_octave = DEFAULT_MELODY_OCTAVE, bass_octave = DEFAULT_BASS_OCTAVE, name = None):
        # Sections
        sections_ = []
        seen = set()
        for s in sections:
            name_s, length, is_variation = str(s[0]), int(s[1]), bool(s[2])
            if length < 1:
                raise InvariantViolation("Section %s has length %i < 1." % (name_s, length))
            if is_variation and name_s not in seen:
                raise InvariantViolation("Section %s is a variation but no earlier section has this name." % name_s)
            seen.add(name_s)
            sections_.append(SectionSpec(name_s, length, is_variation))
        self._set("sections", tuple(sections_))
        # Chords
        chords_ = []
        for c in chords:
            if isinstance(c, str):
                c = N.chord_idx(c)
            c = int(c)
            if not (0 <= c < N.N_CHORDS):
                raise InvariantViolation("Chord idx %i is not in the 7-triad vocabulary." % c)
            chords_.append(c)
        self._set("chords", tuple(chords_))
        if len(self.chords) != self.n_bars:
            raise InvariantViolation("Song has %i chords but %i bars." % (len(self.chords), self.n_bars))
        # Tracks
        bounds = self.section_bounds()
        self._set("melody", tuple(canonical_track(melody, bounds, track_name="melody")))
        self._set("bass",   tuple(canonical_track(bass,   bounds, track_name="bass")))
        # Meta
        try: tempo = float(tempo)
        except (TypeError, ValueError): raise InvariantViolation("Tempo must be a number, not %r." % (tempo,))
        if not tempo > 0:
            raise InvariantViolation("Tempo must be > 0, not %f." % tempo)
        if mode not in MODES:
            raise InvariantViolation("Mode must be one of %s, not %r." % (MODES, mode))
        self._set("tempo", tempo)
        self._set("mode",  mode)
        self._set("melody_octave", int(melody_octave))
        self._set("bass_octave",   int(bass_octave))
        self._set("name", name)

    def _set(self, attr, value):
        object.__setattr__(self, attr, value)

    def __setattr__(self, attr, value):
        raise AttributeError("Song is immutable, use with_name or build a new song (cannot set %r)." % attr)

    def __delattr__(self, attr):
        raise AttributeError("Song is immutable (cannot delete %r)." % attr)

    # ---------- STRUCTURE ----------

    @property
    def n_bars(self):
        return int(sum(s.length for s in self.sections))

    @property
    def n_sections(self):
        return len(self.sections)

    def section_start_bars(self):
        """
        Idx of first bar of each section.
        """
        return list(np.cumsum([0] + [s.length for s in self.sections])[:-1].astype(int))

    def section_bounds(self):
        """
        (start, end) positions in 16ths of each section.
        """
        bounds = []
        pos = 0
        for s in self.sections:
            bounds.append((pos, pos + s.length * N.SLOTS_PER_BAR))
            pos += s.length * N.SLOTS_PER_BAR
        return bounds

    def section_chords(self, i_section):
        start = self.section_start_bars()[i_section]
        return list(self.chords[start:start + self.sections[i_section].length])

    def section_notes(self, track, i_section):
        """
        Notes of track ("melody" or "bass") in section i_section.
        """
        notes = getattr(self, track)
        start, end = self.section_bounds()[i_section]
        positions = note_positions(notes)
        return [n for n, pos in zip(notes, positions) if start <= pos < end]

    # ---------- FRAMES ----------

    def frames(self, track):
        """
        Pitch per 16th (REST for rests) of track ("melody" or "bass").
        Returns
        -------
        frames : numpy.array of shape (n_bars*16,) of int
        """
        return notes_to_frames(getattr(self, track))

    # ---------- MISC ----------

    def with_name(self, name):
        return Song(sections = self.sections, melody = self.melody, chords = self.chords, bass = self.bass,
                    tempo = self.tempo, mode = self.mode, melody_octave = self.melody_octave,
                    bass_octave = self.bass_octave, name = name)

    def copy(self):
        return self.with_name(self.name)

    def __eq__(self, other):
        if not isinstance(other, Song):
            return NotImplemented
        return (self.sections      == other.sections      and
                self.melody        == other.melody        and
                self.chords        == other.chords        and
                self.bass          == other.bass          and
                self.tempo         == other.tempo         and
                self.mode          == other.mode          and
                self.melody_octave == other.melody_octave and
                self.bass_octave   == other.bass_octave)

    def __repr__(self):
        structure = "".join(s.name for s in self.sections)
        return "Song(%s: %s, %i bars, %i melody notes, %i bass notes, tempo = %g, %s)" \
               % (self.name, structure, self.n_bars, len(self.melody), len(self.bass), self.tempo, self.mode)


def note_positions (notes):
    """
    Absolute start positions (in 16ths) of notes of a track.
    """
    positions = np.zeros(len(notes), dtype=int)
    if len(notes) > 0:
        positions[1:] = np.cumsum([n.duration for n in notes])[:-1]
    return positions


def notes_to_frames (notes):
    """
    Expands notes to one pitch per 16th ("4 consecutive copies of p" for a quarter note).
    """
    return np.repeat(np.array([n.pitch for n in notes], dtype=int),
                     np.array([n.duration for n in notes], dtype=int))
