import unittest
import numpy as np

# Internal imports
from popstyle.songsym import note as N
from popstyle.songsym import stats as Stats
from popstyle.songsym import rating as Rating
from popstyle.songsym.song import Song

R = N.REST


def seed_song ():
    return Song(sections = [("A", 2, False)],
                melody   = [(1, 4), (3, 4), (5, 8), (R, 4), (5, 4), (8, 8)],
                chords   = ["I", "V"],
                bass     = [(1, 16), (5, 16)],
                tempo    = 100.,
                name     = "seed")


def other_song ():
    return Song(sections = [("A", 1, False), ("B", 1, False)],
                melody   = [(5, 2), (6, 2), (5, 12), (4, 16)],
                chords   = ["I", "IV"],
                bass     = [(1, 16), (4, 16)],
                name     = "other")


def make_style (alpha = 0.5, seed = None):
    seed    = Stats.build_seed_stats(seed_song() if seed is None else seed)
    general = Stats.build_general_stats([seed_song(), other_song()])
    return Rating.MelodyStyle(seed, general, alpha, tempo = 100.)


def ctx_at (style, pos = 0, chords = (0, 4), prev_note = None, prev_pitched = None, is_pac = False):
    bar = pos // N.SLOTS_PER_BAR
    return Rating.RatingContext(style, pos, len(chords) * N.SLOTS_PER_BAR, chords[bar],
                                next_chord = chords[bar + 1] if bar + 1 < len(chords) else None,
                                prev_note = prev_note, prev_pitched = prev_pitched, is_pac = is_pac)


class RatingTest(unittest.TestCase):

    def test_full_battery_grid (self):
        style = make_style()
        collection = Rating.make_RatingCollection(style)
        self.assertEqual(collection.names, [name for name, _ in Rating.DEFAULT_RATINGS_CONFIG])
        prev = N.Note(3, 4, 0)
        ctx = ctx_at(style, pos = 4, prev_note = prev, prev_pitched = prev)
        grid = collection(ctx)
        self.assertEqual(grid.shape, (16, 16))
        self.assertTrue((grid >= 0).all())
        self.assertTrue((grid > 0).any())
        # Product of constituents
        expected = np.prod(np.array(list(collection.breakdown(ctx).values())), axis=0)
        self.assertTrue(np.allclose(grid, expected))
        return None

    def test_pos_dur_smoothing (self):
        seed = Song(sections = [("A", 1, False)], melody = [(1, 4), (R, 12)], chords = ["I"], bass = [(1, 16)])
        style = make_style(alpha = 1., seed = seed)
        self.assertAlmostEqual(float(Rating.rate_pos_dur(4, 8, ctx_at(style, pos = 8))), 0.875)
        self.assertAlmostEqual(float(Rating.rate_pos_dur(4, 0, ctx_at(style, pos = 0))), 1.875)
        # Rule alone bans even durations on odd onsets
        style = make_style(alpha = 0., seed = seed)
        self.assertEqual(float(Rating.rate_pos_dur(2, 3, ctx_at(style, pos = 3))), 0.)
        self.assertEqual(float(Rating.rate_pos_dur(3, 3, ctx_at(style, pos = 3))), 1.)
        return None

    def test_downbeat (self):
        style = make_style(alpha = 0.)
        ctx = ctx_at(style, pos = 0)
        self.assertEqual(float(Rating.rate_downbeat(5, 2, N.TONIC_CHORD, ctx)), 1.)
        self.assertAlmostEqual(float(Rating.rate_downbeat(2, 2, N.TONIC_CHORD, ctx)), 0.7)
        self.assertEqual(float(Rating.rate_downbeat(2, 2, N.TONIC_CHORD, ctx_at(style, pos = 4))), 1.)
        grid = Rating.DownbeatRating(style)(ctx)
        self.assertTrue(np.array_equal(grid[Rating.REST_ROW], np.ones(16)))
        return None

    def test_rest_dur (self):
        style = make_style(alpha = 0.)
        self.assertAlmostEqual(float(Rating.rate_rest_dur(4, ctx_at(style, pos = 0))), 0.25)
        self.assertEqual(float(Rating.rate_rest_dur(4, ctx_at(style, pos = 16))), 1.)
        grid = Rating.RestDurRating(style)(ctx_at(style, pos = 0))
        self.assertTrue(np.array_equal(grid[:Rating.REST_ROW], np.ones((15, 16))))
        return None

    def test_harmony_dur (self):
        style = make_style()
        ctx = ctx_at(style)
        self.assertAlmostEqual(float(Rating.rate_harmony_dur(5, 4, N.TONIC_CHORD, ctx)), 0.5)
        p_har = float(Rating.rate_pitch_harmony(5, N.TONIC_CHORD, ctx))
        self.assertAlmostEqual(float(Rating.rate_harmony_dur(5, 16, N.TONIC_CHORD, ctx)), ((p_har - 0.5) * 2 + 1) / 2)
        return None

    def test_interval_harmony (self):
        style = make_style()
        ctx = ctx_at(style)
        self.assertEqual(float(Rating.rate_interval_harmony(8, None, N.TONIC_CHORD, ctx)), 1.)
        p_har = float(Rating.rate_pitch_harmony(8, N.TONIC_CHORD, ctx))
        # Upward leap of 5 is boosted
        self.assertAlmostEqual(float(Rating.rate_interval_harmony(8, 3, N.TONIC_CHORD, ctx)),
                               1. / 6. * 1.2 * (0.5 + p_har))
        # Repeated note
        self.assertAlmostEqual(float(Rating.rate_interval_harmony(3, 3, N.TONIC_CHORD, ctx)), 0.5)
        return None

    def test_first_note_ratings (self):
        style = make_style()
        ctx = ctx_at(style)
        self.assertTrue(np.array_equal(Rating.rate_dur_trans(np.arange(1, 17), None, ctx), np.ones(16)))
        self.assertTrue(np.array_equal(Rating.rate_interval_freq(np.arange(1, 16), ctx), np.ones(15)))
        self.assertTrue(np.array_equal(Rating.IntervalDurRating(style)(ctx), np.ones((16, 16))))
        return None

    def test_dur_freq (self):
        style = make_style(alpha = 0.5)
        ctx = ctx_at(style)
        general = style.general.probs["dur_freq_by_tempo"][Stats.tempo_bucket(100.)]
        expected = 0.5 * general[3] + 0.5 * style.seed.probs["dur_freq"][3]
        self.assertAlmostEqual(float(Rating.rate_dur_freq(4, ctx)), expected)
        return None

    def test_rest_policies (self):
        style = make_style()
        ctx = ctx_at(style)
        grid = Rating.PitchFreqRating(style)(ctx)
        self.assertTrue(np.allclose(grid[Rating.REST_ROW], grid[:Rating.REST_ROW].mean(axis=0)))
        grid = Rating.RestFreqRating(style)(ctx)
        self.assertTrue(np.allclose(grid[Rating.REST_ROW], style.blended.rest_freq[1]))
        self.assertTrue(np.allclose(grid[0], style.blended.rest_freq[0]))
        return None

    def test_make_collection_errors (self):
        style = make_style()
        with self.assertRaises(AssertionError):
            Rating.make_RatingCollection(style, [("not_a_rating", None)])
        with self.assertRaises(AssertionError):
            Rating.make_RatingCollection(style, [("downbeat", None)])
        with self.assertRaises(AssertionError):
            Rating.make_RatingCollection(style, "pitch_freq")
        with self.assertRaises(TypeError):
            Rating.make_RatingCollection(style, [("downbeat", {"scale": "big"})])
        try:
            collection = Rating.make_RatingCollection(style, [("pitch_freq", None), ("downbeat", {"scale": 2.})])
        except Exception:
            self.fail("Rating collection creation failed.")
        self.assertEqual(collection.names, ["pitch_freq", "downbeat"])
        return None

    def test_span_constraint (self):
        style = make_style()
        self.assertFalse(style.span_allowed)
        ctx = ctx_at(style, pos = 12)
        self.assertFalse(Rating.allow_span_chord_change(N.Note(5, 8, 12), ctx))
        self.assertFalse(Rating.allow_span_chord_change(N.Note(R, 8, 12), ctx))
        self.assertTrue (Rating.allow_span_chord_change(N.Note(5, 4, 12), ctx))
        seed = Song(sections = [("A", 2, False)], melody = [(1, 8), (3, 16), (5, 8)], chords = ["I", "I"],
                    bass = [(1, 16), (1, 16)])
        style = make_style(seed = seed)
        self.assertTrue(style.span_allowed)
        self.assertTrue (Rating.allow_span_chord_change(N.Note(5, 8, 12), ctx_at(style, pos = 12)))
        self.assertFalse(Rating.allow_span_chord_change(N.Note(R, 8, 12), ctx_at(style, pos = 12)))
        return None

    def test_section_ending (self):
        style = make_style()
        self.assertIsNone(Rating.force_section_ending(ctx_at(style, is_pac = False)))
        ending = Rating.force_section_ending(ctx_at(style, is_pac = True))
        self.assertTrue (ending.allows(8, 4))
        self.assertTrue (ending.allows(1, 16))
        self.assertFalse(ending.allows(8, 2))
        self.assertFalse(ending.allows(5, 8))
        return None

    def test_make_context (self):
        style = make_style()
        notes = N.notes_from_pairs([(1, 8), (R, 4), (3, 8)])
        ctx = Rating.make_context(style, [0, 4, 0], notes, is_pac = True)
        self.assertEqual(ctx.pos, 20)
        self.assertEqual(ctx.onset, 4)
        self.assertEqual(ctx.chord, 4)
        self.assertEqual(ctx.next_chord, 0)
        self.assertEqual(ctx.prev_note.pitch, 3)
        self.assertEqual(ctx.remaining, 28)
        self.assertFalse(ctx.in_last_bar)
        self.assertEqual(Rating.grid_index(R, 4), (Rating.REST_ROW, 3))
        self.assertEqual(Rating.grid_index(8, 16), (7, 15))
        return None


if __name__ == '__main__':
    unittest.main(verbosity=2)
