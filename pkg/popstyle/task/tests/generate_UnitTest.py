import os
import shutil
import tempfile
import time as time
import unittest
import warnings

import numpy as np

# Internal imports
from popstyle.task import generate as Generate
from popstyle.config.config0 import config0
from popstyle.config.config1 import config1
from popstyle.songsym import stats as Stats
from popstyle.songsym import textscore as TextScore
from popstyle.songsym.note import InputError

TOML = """
alpha_melody = 0.9
candidates = 3
structure = "AABB"

[seeds]
melody = "a.txt"
bass = "b.txt"
"""


def seed_path (name):
    return os.path.join(Generate.SEEDS_DIR, name + ".txt")


class GenerateTest(unittest.TestCase):

    def test_bundled_seeds (self):
        paths = Generate.bundled_seeds()
        self.assertTrue(len(paths) >= 5)
        tempos = {Generate.read_song(path).tempo for path in paths}
        self.assertTrue(len(tempos) >= 3)
        return None

    def test_general_stats_leave_seed_out (self):
        seed = Generate.read_song(seed_path("doo_wop"))
        full    = Generate.default_general_stats()
        without = Generate.default_general_stats([seed])
        seed_notes = Stats.build_seed_stats(seed).counts["rest_freq"].sum()
        self.assertEqual(full.counts["rest_freq"].sum() - without.counts["rest_freq"].sum(), seed_notes)
        # Same seed under another name
        self.assertIs(Generate.default_general_stats([seed.with_name("other")]), without)
        # Chord annotations are kept
        self.assertEqual(full.counts["chord_trans"].sum() - without.counts["chord_trans"].sum(),
                         Stats.build_seed_stats(seed).counts["chord_trans"].sum())
        # Every bundled song excluded : nothing is left out
        songs, _ = Generate.bundled_corpus()
        self.assertIs(Generate.default_general_stats(songs), full)
        return None

    def test_config_set (self):
        config = Generate.GenerationConfig(seeds = "a.txt")
        self.assertEqual(config.seeds, {"structure": "a.txt", "chord": "a.txt", "melody": "a.txt", "bass": "a.txt"})
        config.set("alpha-melody", 0.8)
        config.set("max_dist", 0.2)
        config.set("chord_seed", "c.txt")
        config.set("rng-seed", "12")
        self.assertEqual(config.get("alpha_melody"), 0.8)
        self.assertEqual(config.run_config["structure_config"]["max_dist"], 0.2)
        self.assertEqual(config.seeds["chord"], "c.txt")
        self.assertEqual(config.rng_seed, 12)
        # Defaults are left untouched
        self.assertEqual(config1["melody_config"]["alpha"], 0.5)
        with self.assertRaises(InputError):
            config.set("temperature", 1.)
        with self.assertRaises(InputError):
            config.set("rng_seed", "twelve")
        return None

    def test_config_from_sources (self):
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "run.toml")
            with open(path, "w") as f:
                f.write(TOML)
            config = Generate.GenerationConfig.from_sources(seeds       = {"chord": "c.txt", "bass": None},
                                                            config_path = path,
                                                            overrides   = {"candidates": 7, "alpha_melody": None})
        self.assertEqual(config.get("candidates"), 7)
        self.assertEqual(config.get("alpha_melody"), 0.9)
        self.assertEqual(config.get("structure"), "AABB")
        self.assertEqual(config.seeds, {"structure": "a.txt", "chord": "c.txt", "melody": "a.txt", "bass": "b.txt"})
        return None

    def test_config_from_sources_errors (self):
        with self.assertRaises(InputError):
            Generate.GenerationConfig.from_sources(seeds = {"chord": "c.txt"})
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "run.toml")
            with open(path, "w") as f:
                f.write('seed = "a.txt"\nbeam_width = 4\n')
            with self.assertRaises(InputError):
                Generate.GenerationConfig.from_sources(config_path = path)
        return None

    def test_output_paths (self):
        self.assertEqual(Generate.output_paths("out/song"), ("out/song.mid", "out/song.txt"))
        self.assertEqual(Generate.output_paths("out/song.mid"), ("out/song.mid", "out/song.txt"))
        self.assertEqual(Generate.output_paths("take.2"), ("take.2.mid", "take.2.txt"))
        return None

    def test_read_errors (self):
        with self.assertRaises(InputError):
            Generate.read_song("song.wav")
        with self.assertRaises(InputError):
            Generate.read_corpus("/nonexistent/corpus")
        with tempfile.TemporaryDirectory() as tmp:
            with self.assertRaises(InputError):
                Generate.read_corpus(tmp)
        return None

    def test_run_generate (self):
        with tempfile.TemporaryDirectory() as tmp:
            out = os.path.join(tmp, "song")
            config = Generate.GenerationConfig(seeds = seed_path("sunny_pop"), run_config = config0, out = out)
            song, midi_bytes, text = Generate.run_generate(config)
            self.assertTrue(os.path.isfile(out + ".mid"))
            self.assertTrue(os.path.isfile(out + ".txt"))
            with open(out + ".txt", "r") as f:
                self.assertEqual(f.read(), text)
            with open(out + ".mid", "rb") as f:
                self.assertEqual(f.read(), midi_bytes)
        self.assertEqual(midi_bytes[:4], b"MThd")
        self.assertEqual(TextScore.parse_text_score(text), song)
        return None

    def test_generate_deterministic (self):
        path = seed_path("doo_wop")
        a = Generate.generate(path, rng_seed = 2, run_config = config0)
        b = Generate.generate(path, rng_seed = 2, run_config = config0, alpha_melody = 0.5)
        self.assertEqual(a, b)
        c = Generate.generate(Generate.read_song(path), rng_seed = 2, run_config = config0, structure = "ABAB")
        self.assertEqual([s.name for s in c.sections], ["A", "B", "A", "B"])
        return None

    def test_generate_time_40_bars (self):
        seed = Generate.read_song(seed_path("doo_wop"))
        t0 = time.perf_counter()
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            song = Generate.generate(seed, rng_seed = 0, run_config = config1, structure = "ABABB")
        t1 = time.perf_counter()
        print("\n40 bars, %i candidates : generation time = %.3f s"
              % (config1["melody_config"]["n_candidates"], t1 - t0))
        self.assertEqual(song.n_bars, 40)
        self.assertTrue(t1 - t0 < 10.)
        return None

    def test_run_stats_build (self):
        with tempfile.TemporaryDirectory() as tmp:
            corpus = os.path.join(tmp, "corpus")
            os.mkdir(corpus)
            shutil.copy(seed_path("slow_ballad"), corpus)
            with open(os.path.join(corpus, "loop.chords"), "w") as f:
                f.write("I V vi IV\nI V vi IV\n")
            out = os.path.join(tmp, "stats.json")
            tables = Generate.run_stats_build(corpus, out)
            loaded = Generate.load_general_stats(out)
        self.assertEqual(loaded.name, "corpus")
        for k, v in tables.counts.items():
            self.assertTrue(np.array_equal(loaded.counts[k], v))
        self.assertEqual(loaded.smoothing, Stats.GENERAL_SMOOTHING)
        return None

    def test_run_analyze (self):
        tables, summary = Generate.run_analyze(seed_path("minor_groove"))
        self.assertIsInstance(tables, Stats.StatTables)
        self.assertIn("minor_groove", summary)
        return None


if __name__ == '__main__':
    unittest.main(verbosity=2)
