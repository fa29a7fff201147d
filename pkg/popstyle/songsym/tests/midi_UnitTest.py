import io
import os
import tempfile
import time as time
import unittest
import warnings

import mido
import numpy as np

# Internal imports
from popstyle.songsym import note as N
from popstyle.songsym import midi as Midi
from popstyle.songsym import textscore as TextScore
from popstyle.songsym.song import Song
from popstyle.task import generate as Generate


def bundled_song (i = 0):
    return TextScore.read_text_score(Generate.bundled_seeds()[i])


class MidiTest(unittest.TestCase):

    def test_export_structure (self):
        song = bundled_song()
        data = Midi.export_midi(song)
        mid = mido.MidiFile(file=io.BytesIO(data))
        self.assertEqual(mid.type, 1)
        self.assertEqual([t.name for t in mid.tracks], ["melody", "chords", "bass"])
        tempos = [msg.tempo for msg in mid.tracks[0] if msg.type == 'set_tempo']
        self.assertEqual(tempos, [mido.bpm2tempo(song.tempo)])
        # One note_on per pitched melody note
        n_on = sum(1 for msg in mid.tracks[0] if msg.type == 'note_on' and msg.velocity > 0)
        self.assertEqual(n_on, sum(1 for n in song.melody if not n.is_rest))
        # Three triad notes per bar
        n_on = sum(1 for msg in mid.tracks[1] if msg.type == 'note_on' and msg.velocity > 0)
        self.assertEqual(n_on, 3 * song.n_bars)
        return None

    def test_round_trip_with_sidecar (self):
        for i in range(len(Generate.bundled_seeds())):
            song = bundled_song(i)
            back = Midi.import_midi(Midi.export_midi(song), Midi.make_sidecar(song))
            self.assertEqual(back, song)
        return None

    def test_chords_inferred_from_track (self):
        song = bundled_song()
        sidecar = Midi.make_sidecar(song)
        sidecar.chords = None
        back = Midi.import_midi(Midi.export_midi(song), sidecar)
        self.assertEqual(back.chords, song.chords)
        return None

    def test_transposition (self):
        self.assertEqual(Midi.transposition("C", "major"), 0)
        self.assertEqual(Midi.transposition("D", "major"), -2)
        self.assertEqual(Midi.transposition("G", "major"), 5)
        self.assertEqual(Midi.transposition("A", "minor"), 0)
        self.assertEqual(Midi.transposition("E", "minor"), 5)
        return None

    def test_chromatic_snapping (self):
        self.assertEqual(Midi.midi_to_absolute_degree(60), (1, False))
        self.assertEqual(Midi.midi_to_absolute_degree(61), (1, True))
        self.assertEqual(Midi.midi_to_absolute_degree(72), (8, False))
        self.assertEqual(Midi.midi_to_absolute_degree(48), (-6, False))
        return None

    def test_quantize (self):
        self.assertEqual(Midi.quantize(0, 480), 0)
        self.assertEqual(Midi.quantize(119, 480), 1)
        self.assertEqual(Midi.quantize(59, 480), 0)
        self.assertEqual(Midi.quantize(480, 480), 4)
        return None

    def test_non_four_four_rejected (self):
        song = bundled_song()
        mid = mido.MidiFile(file=io.BytesIO(Midi.export_midi(song)))
        for i, msg in enumerate(mid.tracks[0]):
            if msg.type == 'time_signature':
                mid.tracks[0][i] = mido.MetaMessage('time_signature', numerator=3, denominator=4, time=0)
        buffer = io.BytesIO()
        mid.save(file=buffer)
        with self.assertRaises(Midi.MidiImportError):
            Midi.import_midi(buffer.getvalue(), Midi.make_sidecar(song))
        return None

    def test_missing_track_and_bad_data (self):
        song = bundled_song()
        sidecar = Midi.make_sidecar(song)
        sidecar.tracks["melody"] = "lead"
        with self.assertRaises(Midi.MidiImportError):
            Midi.import_midi(Midi.export_midi(song), sidecar)
        with self.assertRaises(Midi.MidiImportError):
            Midi.import_midi(b"not a midi file", Midi.make_sidecar(song))
        return None

    def test_sidecar_errors (self):
        with self.assertRaises(Midi.SidecarError):
            Midi.AnnotationSidecar.from_json("{not json")
        with self.assertRaises(Midi.SidecarError):
            Midi.AnnotationSidecar.from_json('{"key": "C"}')
        with self.assertRaises(Midi.SidecarError):
            Midi.AnnotationSidecar(sections = [("A", 1, False)], key = "H")
        with self.assertRaises(Midi.SidecarError):
            Midi.AnnotationSidecar(sections = [("A", 2, False)], chords = ["I"])
        # Errors are input errors
        self.assertTrue(issubclass(Midi.SidecarError, N.InputError))
        return None

    def test_read_midi_with_default_sidecar (self):
        song = bundled_song()
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "song.mid")
            with open(path, "wb") as f:
                f.write(Midi.export_midi(song))
            with open(os.path.join(tmp, "song.json"), "w") as f:
                f.write(Midi.make_sidecar(song).to_json())
            back = Midi.read_midi(path)
        self.assertEqual(back, song)
        self.assertEqual(back.name, path)
        return None


def random_track (rng, sections, rest_prob = 0.25):
    """
    Random (pitch, duration) couples filling each section, pitched notes may cross barlines within a section.
    """
    notes = []
    for _, length, _ in sections:
        remaining = length * N.SLOTS_PER_BAR
        while remaining > 0:
            duration = int(rng.integers(1, min(N.MAX_DURATION, remaining) + 1))
            pitch = N.REST if rng.random() < rest_prob else int(rng.integers(1, N.N_DEGREES + 1))
            notes.append((pitch, duration))
            remaining -= duration
    return notes


def random_song (rng):
    sections, seen = [], set()
    for _ in range(int(rng.integers(1, 4))):
        name = "ABC"[int(rng.integers(3))]
        sections.append((name, int(rng.integers(1, 5)), bool(name in seen and rng.random() < 0.5)))
        seen.add(name)
    n_bars = sum(s[1] for s in sections)
    return Song(sections = sections,
                melody   = random_track(rng, sections),
                chords   = [int(c) for c in rng.integers(0, N.N_CHORDS, size=n_bars)],
                bass     = random_track(rng, sections, rest_prob = 0.4),
                tempo    = float(rng.integers(800, 4001)) / 20,
                mode     = ("major", "minor")[int(rng.integers(2))])


class RandomSongsRoundTripTest(unittest.TestCase):
    N_SONGS = 1000

    def test_random_songs_round_trip (self):
        rng = np.random.default_rng(0)
        t0 = time.perf_counter()
        for k in range(self.N_SONGS):
            song = random_song(rng)
            text = TextScore.render_text_score(song)
            back = TextScore.parse_text_score(text)
            self.assertEqual(back, song, "song %i:\n%s" % (k, text))
            self.assertEqual(TextScore.render_text_score(back), text)
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                back = Midi.import_midi(Midi.export_midi(song), Midi.make_sidecar(song))
            self.assertEqual(back, song, "song %i:\n%s" % (k, text))
        t1 = time.perf_counter()
        print("\n%i random songs : text and MIDI round trips time = %.3f s" % (self.N_SONGS, t1 - t0))
        return None


if __name__ == '__main__':
    unittest.main(verbosity=2)
