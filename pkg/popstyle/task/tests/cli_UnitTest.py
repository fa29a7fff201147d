import io
import os
import tempfile
import unittest
from contextlib import redirect_stdout, redirect_stderr

# Internal imports
from popstyle.task import cli
from popstyle.task import generate as Generate
from popstyle.songsym import stats as Stats
from popstyle.songsym import textscore as TextScore

BAD_CHORD_SCORE = """#TEMPO 100
#SECTION A 1 var=no
1___3___5___8___ | VII | 1_______________
"""


def seed_path (name):
    return os.path.join(Generate.SEEDS_DIR, name + ".txt")


def run (argv):
    out, err = io.StringIO(), io.StringIO()
    with redirect_stdout(out), redirect_stderr(err):
        code = cli.main(argv)
    return code, out.getvalue(), err.getvalue()


class CliTest(unittest.TestCase):

    def test_generate_to_stdout (self):
        code, out, _ = run(["generate", "--seed", seed_path("doo_wop"), "--fast", "--rng-seed", "4"])
        self.assertEqual(code, cli.EXIT_OK)
        song = TextScore.parse_text_score(out)
        self.assertEqual(song.sections, Generate.read_song(seed_path("doo_wop")).sections)
        # Same seed, same output
        _, again, _ = run(["generate", "--seed", seed_path("doo_wop"), "--fast", "--rng-seed", "4"])
        self.assertEqual(out, again)
        return None

    def test_generate_files (self):
        with tempfile.TemporaryDirectory() as tmp:
            prefix = os.path.join(tmp, "hybrid")
            log    = os.path.join(tmp, "log.csv")
            code, out, _ = run(["generate", "--seed", seed_path("sunny_pop"), "--chord-seed", seed_path("doo_wop"),
                                "--fast", "--structure", "AABB", "--out", prefix, "--log", log])
            self.assertEqual(code, cli.EXIT_OK)
            self.assertEqual(out, "")
            for path in (prefix + ".mid", prefix + ".txt", log, os.path.join(tmp, "log_provenance.csv")):
                self.assertTrue(os.path.isfile(path))
        return None

    def test_input_errors (self):
        code, _, err = run(["generate", "--seed", "/nonexistent/seed.txt"])
        self.assertEqual(code, cli.EXIT_INPUT)
        self.assertIn("popstyle: error", err)
        code, _, _ = run(["generate", "--seed", seed_path("doo_wop"), "--fast", "--structure", "A1B"])
        self.assertEqual(code, cli.EXIT_INPUT)
        code, _, _ = run(["evaluate", "--seed", seed_path("doo_wop")])
        self.assertEqual(code, cli.EXIT_INPUT)
        return None

    def test_invariant_violation (self):
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "bad.txt")
            with open(path, "w") as f:
                f.write(BAD_CHORD_SCORE)
            code, _, err = run(["analyze", path])
        self.assertEqual(code, cli.EXIT_INVARIANT)
        self.assertIn("VII", err)
        return None

    def test_analyze (self):
        code, out, _ = run(["analyze", seed_path("rock_drive")])
        self.assertEqual(code, cli.EXIT_OK)
        self.assertIn("pitch_freq", out)
        return None

    def test_stats_build (self):
        with tempfile.TemporaryDirectory() as tmp:
            out = os.path.join(tmp, "stats.json")
            code, _, _ = run(["stats", "build", Generate.CHORD_CORPUS_DIR, "-o", out, "--smoothing", "0.5"])
            self.assertEqual(code, cli.EXIT_OK)
            tables = Stats.StatTables.load(out)
        self.assertEqual(tables.smoothing, 0.5)
        self.assertTrue(tables.counts["chord_trans"].sum() > 0)
        self.assertEqual(tables.counts["pitch_freq"].sum(), 0)
        return None

    def test_evaluate (self):
        code, out, _ = run(["evaluate", "--seed", seed_path("sunny_pop"),
                            "--candidates", seed_path("sunny_pop"), seed_path("slow_ballad")])
        self.assertEqual(code, cli.EXIT_OK)
        lines = out.strip().splitlines()
        self.assertEqual(lines[0], "song,style,function,value")
        self.assertTrue(any(line.split(",")[2] == "total" for line in lines[1:]))
        return None


if __name__ == '__main__':
    unittest.main(verbosity=2)
