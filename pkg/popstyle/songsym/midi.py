import io
import os
import json
import warnings

import numpy as np
import mido

# Internal imports
from popstyle.songsym import note as N
from popstyle.songsym.note import InputError
from popstyle.songsym.song import Song, DEFAULT_MELODY_OCTAVE, DEFAULT_BASS_OCTAVE

# ---------- EXPORT PARAMETERS ----------
TICKS_PER_BEAT  = 480
TICKS_PER_SLOT  = TICKS_PER_BEAT // 4
VELOCITY        = 80
CHORD_OCTAVE    = -1
TRACK_NAMES     = {"melody": "melody", "chord": "chords", "bass": "bass"}
TRACK_CHANNELS  = {"melody": 0, "chord": 1, "bass": 2}
DEFAULT_TEMPO   = 120.

# ---------- IMPORT PARAMETERS ----------
PITCH_CLASSES = {"C": 0, "B#": 0, "C#": 1, "Db": 1, "D": 2, "D#": 3, "Eb": 3, "E": 4, "Fb": 4, "E#": 5, "F": 5,
                 "F#": 6, "Gb": 6, "G": 7, "G#": 8, "Ab": 8, "A": 9, "A#": 10, "Bb": 10, "B": 11, "Cb": 11}
# Tonic pitch class after transposition (C major / A minor)
TARGET_TONIC  = {"major": 0, "minor": 9}
# Octave offsets tried when folding a track into degrees 1..15
FOLD_OCTAVES  = range(-4, 5)
FOLD_CENTER   = 8


class MidiImportError(InputError):
    pass


class SidecarError(InputError):
    pass


# ----------------------------------------------------------------------------------------------------------------------
# ------------------------------------------------------- SIDECAR ------------------------------------------------------
# ----------------------------------------------------------------------------------------------------------------------

class AnnotationSidecar:
    """
    Hand annotation accompanying a MIDI file: key, mode, tempo, which tracks hold melody / chords / bass, section
    structure and per-bar chords.
    """
    def __init__(self, sections, key = "C", mode = "major", tempo = None, tracks = None, chords = None,
                 octaves = None):
        """
        Parameters
        ----------
        sections : list of (str, int, bool)
            (name, length in bars, is_variation) of each section.
        key : str
            Tonic name ("C", "F#", "Bb" ...).
        mode : str
            "major" or "minor".
        tempo : float or None
            Beats per minute, by default uses the MIDI tempo event.
        tracks : dict or None
            {"melody": name or idx, "chord": name or idx, "bass": name or idx}.
        chords : list of str or None
            One chord symbol per bar, by default inferred from the chord track.
        octaves : dict or None
            {"melody": int, "bass": int} fixed octave offsets, by default folded automatically.
        """
        if key not in PITCH_CLASSES:
            raise SidecarError("Unknown key %r, expected one of %s." % (key, list(PITCH_CLASSES.keys())))
        if mode not in TARGET_TONIC:
            raise SidecarError("Unknown mode %r, expected 'major' or 'minor'." % (mode,))
        try:
            self.sections = [(str(s[0]), int(s[1]), bool(s[2])) for s in sections]
        except (TypeError, ValueError, IndexError):
            raise SidecarError("Sections must be (name, length, variation) entries, not %r." % (sections,))
        self.key     = key
        self.mode    = mode
        self.tempo   = None if tempo is None else float(tempo)
        self.tracks  = dict(TRACK_NAMES) if tracks is None else dict(tracks)
        for part in ("melody", "bass"):
            if part not in self.tracks:
                raise SidecarError("Sidecar tracks must name a %s track." % part)
        self.chords  = None if chords is None else list(chords)
        self.octaves = None if octaves is None else {k: int(v) for k, v in octaves.items()}
        if self.chords is not None and len(self.chords) != sum(s[1] for s in self.sections):
            raise SidecarError("Sidecar has %i chords for %i bars."
                               % (len(self.chords), sum(s[1] for s in self.sections)))

    @classmethod
    def from_dict(cls, d):
        if not isinstance(d, dict) or "sections" not in d:
            raise SidecarError("Sidecar must be a JSON object with a 'sections' field.")
        try:
            sections = [(s["name"], s["length"], s.get("variation", False)) for s in d["sections"]]
        except (TypeError, KeyError):
            raise SidecarError("Sidecar sections must be objects with 'name' and 'length' fields.")
        return cls(sections = sections,
                   key      = d.get("key", "C"),
                   mode     = d.get("mode", "major"),
                   tempo    = d.get("tempo"),
                   tracks   = d.get("tracks"),
                   chords   = d.get("chords"),
                   octaves  = d.get("octaves"))

    def to_dict(self):
        d = {"key": self.key, "mode": self.mode, "tempo": self.tempo, "tracks": self.tracks,
             "sections": [{"name": name, "length": length, "variation": var} for name, length, var in self.sections]}
        if self.chords is not None:
            d["chords"] = self.chords
        if self.octaves is not None:
            d["octaves"] = self.octaves
        return d

    @classmethod
    def from_json(cls, text):
        try:
            d = json.loads(text)
        except json.JSONDecodeError as e:
            raise SidecarError("Sidecar is not valid JSON: %s" % e)
        return cls.from_dict(d)

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def read(cls, path):
        with open(path, "r") as f:
            return cls.from_json(f.read())

    def __repr__(self):
        return "AnnotationSidecar(%s %s, %i sections)" % (self.key, self.mode, len(self.sections))


def make_sidecar (song):
    """
    Sidecar describing exactly a song exported with export_midi, so that importing the export gives back the song.
    """
    return AnnotationSidecar(sections = song.sections,
                             key      = "C" if song.mode == "major" else "A",
                             mode     = song.mode,
                             tempo    = song.tempo,
                             tracks   = dict(TRACK_NAMES),
                             chords   = [N.CHORD_NAMES[c] for c in song.chords],
                             octaves  = {"melody": song.melody_octave, "bass": song.bass_octave})


# ----------------------------------------------------------------------------------------------------------------------
# ------------------------------------------------------- EXPORT -------------------------------------------------------
# ----------------------------------------------------------------------------------------------------------------------

def _events_to_track (name, events, head = ()):
    """
    Makes a mido track from absolute (tick, is_on, midi_note, channel) events.
    """
    track = mido.MidiTrack()
    track.append(mido.MetaMessage('track_name', name=name, time=0))
    for msg in head:
        track.append(msg)
    # note_off before note_on at same tick
    events = sorted(events, key=lambda e: (e[0], e[1], e[2]))
    last_tick = 0
    for tick, is_on, midi_note, channel in events:
        track.append(mido.Message('note_on' if is_on else 'note_off', channel=channel, note=midi_note,
                                  velocity=VELOCITY if is_on else 0, time=tick - last_tick))
        last_tick = tick
    return track


def _note_events (notes, octave, channel):
    events = []
    pos = 0
    for n in notes:
        if not n.is_rest:
            midi_note = N.degree_to_midi(n.pitch, octave)
            events.append((pos * TICKS_PER_SLOT, 1, midi_note, channel))
            events.append(((pos + n.duration) * TICKS_PER_SLOT, 0, midi_note, channel))
        pos += n.duration
    return events


def _chord_events (chords, channel):
    events = []
    for bar, chord in enumerate(chords):
        root = N.chord_root(chord)
        for degree in (root, root + 2, root + 4):
            midi_note = N.degree_to_midi(degree, CHORD_OCTAVE)
            events.append((bar * N.SLOTS_PER_BAR * TICKS_PER_SLOT, 1, midi_note, channel))
            events.append(((bar + 1) * N.SLOTS_PER_BAR * TICKS_PER_SLOT, 0, midi_note, channel))
    return events


def export_midi (song):
    """
    Exports a song as a format 1 Standard MIDI File with three tracks (melody, block chords, bass).
    Parameters
    ----------
    song : song.Song
    Returns
    -------
    data : bytes
    """
    mid = mido.MidiFile(type=1, ticks_per_beat=TICKS_PER_BEAT)
    head = (mido.MetaMessage('set_tempo', tempo=mido.bpm2tempo(song.tempo), time=0),
            mido.MetaMessage('time_signature', numerator=4, denominator=4, time=0))
    mid.tracks.append(_events_to_track(TRACK_NAMES["melody"],
                                       _note_events(song.melody, song.melody_octave, TRACK_CHANNELS["melody"]),
                                       head = head))
    mid.tracks.append(_events_to_track(TRACK_NAMES["chord"], _chord_events(song.chords, TRACK_CHANNELS["chord"])))
    mid.tracks.append(_events_to_track(TRACK_NAMES["bass"],
                                       _note_events(song.bass, song.bass_octave, TRACK_CHANNELS["bass"])))
    buffer = io.BytesIO()
    mid.save(file=buffer)
    return buffer.getvalue()


# ----------------------------------------------------------------------------------------------------------------------
# ------------------------------------------------------- IMPORT -------------------------------------------------------
# ----------------------------------------------------------------------------------------------------------------------

def transposition (key, mode):
    """
    Semitone shift in [-5, 6] bringing key to C major / A minor.
    """
    raw = (TARGET_TONIC[mode] - PITCH_CLASSES[key]) % 12
    return raw if raw <= 6 else raw - 12


def quantize (tick, ticks_per_beat):
    """
    Nearest 16th grid position of a tick.
    """
    return int(np.floor(tick / (ticks_per_beat / 4.) + 0.5))


def midi_to_absolute_degree (midi_note, shift = 0):
    """
    Degree relative to middle C (60 -> 1) of a MIDI key after transposition, chromatic keys being snapped one semitone
    down.
    Returns
    -------
    degree, was_snapped : int, bool
    """
    m  = int(midi_note) + shift
    pc = m % 12
    snapped = pc not in N.MAJOR_SCALE
    if snapped:
        pc -= 1
    return 7 * (m // 12 - 5) + N.MAJOR_SCALE.index(pc) + 1, snapped


def _find_track (mid, ref, part):
    if isinstance(ref, int):
        if 0 <= ref < len(mid.tracks):
            return mid.tracks[ref]
    else:
        for track in mid.tracks:
            if track.name == ref:
                return track
    raise MidiImportError("Annotated %s track %r is missing from the MIDI file." % (part, ref))


def _raw_notes (track):
    """
    (start tick, end tick, midi note) of notes of a track.
    """
    notes = []
    opened = {}
    tick = 0
    for msg in track:
        tick += msg.time
        if msg.type == 'note_on' and msg.velocity > 0:
            opened.setdefault(msg.note, []).append(tick)
        elif msg.type == 'note_off' or (msg.type == 'note_on' and msg.velocity == 0):
            if len(opened.get(msg.note, [])) > 0:
                notes.append((opened[msg.note].pop(0), tick, msg.note))
    if any(len(v) > 0 for v in opened.values()):
        warnings.warn("Track %r has unterminated notes, ignoring them." % (track.name,))
    return notes


def _monophonic (events, keep_highest):
    """
    Reduces quantized (start, end, degree) events to a monophonic line: at equal onsets keep the highest (or lowest)
    degree, overlapping notes are cut at the next onset, zero-length notes dropped.
    """
    events = sorted(events, key=lambda e: (e[0], -e[2] if keep_highest else e[2]))
    line = []
    for start, end, degree in events:
        if end <= start:
            continue
        if len(line) > 0 and line[-1][0] == start:
            continue
        if len(line) > 0 and line[-1][1] > start:
            line[-1] = (line[-1][0], start, line[-1][2])
        line.append((start, end, degree))
    return [e for e in line if e[1] > e[0]]


def _fold (degrees, part, fixed_octave = None):
    """
    Chooses octave offset o such that degrees - 7*o lie in 1..15 with median close to the center.
    """
    degrees = np.array(degrees, dtype=int)
    if fixed_octave is not None:
        octaves = [fixed_octave]
    else:
        octaves = FOLD_OCTAVES
    if len(degrees) == 0:
        default = DEFAULT_MELODY_OCTAVE if part == "melody" else DEFAULT_BASS_OCTAVE
        return degrees, default if fixed_octave is None else fixed_octave
    best = None
    for o in octaves:
        folded = degrees - 7*o
        n_out  = np.sum((folded < 1) | (folded > N.N_DEGREES))
        crit   = (n_out, abs(np.median(folded) - FOLD_CENTER), abs(o))
        if best is None or crit < best[0]:
            best = (crit, o)
    crit, o = best
    if crit[0] > 0:
        raise MidiImportError("%s pitch outside the two-octave diatonic range after transposition and "
                              "octave-folding." % part)
    return degrees - 7*o, o


def _rest_pairs (start, end):
    pairs = []
    while start < end:
        stop = min(end, (start // N.SLOTS_PER_BAR + 1) * N.SLOTS_PER_BAR)
        pairs.append((N.REST, stop - start))
        start = stop
    return pairs


def _line_to_pairs (line, total, section_ends, part):
    """
    (pitch, duration) couples covering [0, total) from a monophonic line of (start, end, degree) events.
    """
    pairs = []
    pos = 0
    for start, end, degree in line:
        if start >= total:
            warnings.warn("%s notes after the last annotated bar are dropped." % part)
            break
        boundary = min(b for b in section_ends if b > start)
        if end > boundary:
            warnings.warn("%s note at 16th %i truncated at the section boundary %i." % (part, start, boundary))
            end = boundary
        if end - start > N.MAX_DURATION:
            warnings.warn("%s note at 16th %i longer than a bar, truncated." % (part, start))
            end = start + N.MAX_DURATION
        pairs += _rest_pairs(pos, start)
        pairs.append((int(degree), end - start))
        pos = end
    pairs += _rest_pairs(pos, total)
    return pairs


def _infer_chords (events, n_bars):
    """
    Chord of each bar maximizing the duration-weighted pitch-class overlap with its triad (ties -> lower idx).
    """
    triads = []
    for c in range(N.N_CHORDS):
        root = N.chord_root(c)
        triads.append([N.MAJOR_SCALE[(d - 1) % 7] for d in (root, root + 2, root + 4)])
    chords = []
    for bar in range(n_bars):
        start, end = bar * N.SLOTS_PER_BAR, (bar + 1) * N.SLOTS_PER_BAR
        hist = np.zeros(12)
        for s, e, pc in events:
            overlap = min(e, end) - max(s, start)
            if overlap > 0:
                hist[pc] += overlap
        chords.append(int(np.argmax([hist[t].sum() for t in triads])))
    return chords


def import_midi (data, annotation, name = None):
    """
    Imports a Standard MIDI File as a song.
    Parameters
    ----------
    data : bytes
    annotation : midi.AnnotationSidecar
    name : str or None
    Returns
    -------
    song : song.Song
    """
    try:
        mid = mido.MidiFile(file=io.BytesIO(data))
    except (OSError, EOFError, ValueError, KeyError, IndexError) as e:
        raise MidiImportError("Not a readable Standard MIDI File: %s" % e)
    tpb = mid.ticks_per_beat

    # --- Meta ---
    tempo = annotation.tempo
    for track in mid.tracks:
        for msg in track:
            if msg.type == 'time_signature' and (msg.numerator, msg.denominator) != (4, 4):
                raise MidiImportError("Non-4/4 time signature %i/%i." % (msg.numerator, msg.denominator))
            if msg.type == 'set_tempo' and tempo is None:
                tempo = round(mido.tempo2bpm(msg.tempo), 3)
    if tempo is None:
        tempo = DEFAULT_TEMPO

    shift = transposition(annotation.key, annotation.mode)
    sections = annotation.sections
    n_bars = sum(s[1] for s in sections)
    total  = n_bars * N.SLOTS_PER_BAR
    section_ends = list(np.cumsum([s[1] * N.SLOTS_PER_BAR for s in sections]).astype(int))
    octaves = annotation.octaves or {}

    # --- Melody and bass ---
    tracks = {}
    found_octaves = {}
    n_snapped = 0
    for part, keep_highest in (("melody", True), ("bass", False)):
        raw = _raw_notes(_find_track(mid, annotation.tracks[part], part))
        events = []
        for start, end, midi_note in raw:
            degree, snapped = midi_to_absolute_degree(midi_note, shift)
            n_snapped += snapped
            events.append((quantize(start, tpb), quantize(end, tpb), degree))
        line = _monophonic(events, keep_highest = keep_highest)
        folded, octave = _fold([e[2] for e in line], part, fixed_octave = octaves.get(part))
        line = [(s, e, d) for (s, e, _), d in zip(line, folded)]
        tracks[part] = _line_to_pairs(line, total, section_ends, part)
        found_octaves[part] = octave
    if n_snapped > 0:
        warnings.warn("%i chromatic pitches snapped to the scale degree below." % n_snapped)

    # --- Chords ---
    if annotation.chords is not None:
        chords = annotation.chords
    else:
        chord_ref = annotation.tracks.get("chord")
        if chord_ref is None:
            raise MidiImportError("Sidecar gives neither chords nor a chord track.")
        raw = _raw_notes(_find_track(mid, chord_ref, "chord"))
        events = [(quantize(s, tpb), quantize(e, tpb), (m + shift) % 12) for s, e, m in raw]
        chords = _infer_chords(events, n_bars)

    return Song(sections      = sections,
                melody        = tracks["melody"],
                chords        = chords,
                bass          = tracks["bass"],
                tempo         = tempo,
                mode          = annotation.mode,
                melody_octave = found_octaves["melody"],
                bass_octave   = found_octaves["bass"],
                name          = name)


def read_midi (path, sidecar_path = None):
    """
    Reads a MIDI file and its sidecar (by default the .json file next to it).
    """
    if sidecar_path is None:
        sidecar_path = os.path.splitext(path)[0] + ".json"
    annotation = AnnotationSidecar.read(sidecar_path)
    with open(path, "rb") as f:
        data = f.read()
    return import_midi(data, annotation, name = str(path))
