import os
import time as time
import unittest
import warnings

import numpy as np
from scipy import stats as scipy_stats

# Internal imports
from popstyle.task import evaluate as Evaluate
from popstyle.task import generate as Generate
from popstyle.config.config0 import config0
from popstyle.config.config1 import config1
from popstyle.songsym import stats as Stats


def load_seed (name):
    return Generate.read_song(os.path.join(Generate.SEEDS_DIR, name + ".txt"))


class PairedTestTest(unittest.TestCase):

    def test_against_scipy (self):
        a = [2.1, 1.9, 2.3]
        b = [1.0, 1.2, 0.9]
        test = Evaluate.paired_compare(a, b)
        ref  = scipy_stats.ttest_rel(a, b)
        self.assertAlmostEqual(test.t, float(ref.statistic), places=10)
        self.assertAlmostEqual(test.p, float(ref.pvalue),    places=10)
        self.assertEqual(test.df, 2)
        self.assertFalse(test.degenerate)
        self.assertTrue(test.t > 0)
        return None

    def test_random_against_scipy (self):
        rng = np.random.default_rng(0)
        for n in (2, 5, 30):
            a = rng.normal(size=n)
            b = a + rng.normal(loc=0.3, size=n)
            test = Evaluate.paired_compare(a, b)
            ref  = scipy_stats.ttest_rel(a, b)
            self.assertAlmostEqual(test.t, float(ref.statistic), places=8)
            self.assertAlmostEqual(test.p, float(ref.pvalue),    places=8)
        return None

    def test_antisymmetry (self):
        a = [0.3, -1.2, 0.8, 0.1]
        b = [0.1, -1.5, 0.2, 0.4]
        ab = Evaluate.paired_compare(a, b)
        ba = Evaluate.paired_compare(b, a)
        self.assertAlmostEqual(ab.t, -ba.t)
        self.assertAlmostEqual(ab.p, ba.p)
        return None

    def test_degenerate (self):
        test = Evaluate.paired_compare([1., 2., 3.], [1., 2., 3.])
        self.assertEqual((test.t, test.p, test.df, test.degenerate), (0., 1., 2, True))
        with warnings.catch_warnings(record=True) as w:
            warnings.simplefilter("always")
            test = Evaluate.paired_compare([2., 3., 4.], [1., 2., 3.])
        self.assertTrue(len(w) >= 1)
        self.assertEqual(test.t, np.inf)
        self.assertEqual(test.p, 0.)
        self.assertTrue(test.degenerate)
        with self.assertRaises(AssertionError):
            Evaluate.paired_compare([1.], [2.])
        with self.assertRaises(AssertionError):
            Evaluate.paired_compare([1., 2.], [2., 3., 4.])
        return None


class ScoringTest(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        cls.seed    = load_seed("sunny_pop")
        cls.other   = load_seed("minor_groove")
        cls.general = Stats.build_general_stats([cls.seed, cls.other, load_seed("doo_wop")])

    def test_score_song (self):
        seed_stats = Stats.build_seed_stats(self.seed)
        t0 = time.perf_counter()
        report = Evaluate.score_song(self.seed, seed_stats, self.general)
        t1 = time.perf_counter()
        print("\nscore_song time = %.3f ms" % ((t1 - t0) * 1e3))
        self.assertEqual(report.n_notes, len(self.seed.melody))
        self.assertTrue(np.isfinite(report.mean_log_likelihood))
        self.assertAlmostEqual(report.mean_log_likelihood,
                               float(np.mean([v.mean() for v in report.breakdown.values()]) * len(report.breakdown)))
        self.assertEqual(report.ngram_overlap, 1.)
        df = report.to_dataframe()
        self.assertEqual(len(df), len(report.breakdown) + 2)
        self.assertEqual(list(df["function"])[-2:], ["total", "chord_ngram_overlap"])
        return None

    def test_own_style_scores_higher (self):
        own   = Evaluate.score_song(self.seed, Stats.build_seed_stats(self.seed),  self.general, alpha = 1.)
        other = Evaluate.score_song(self.seed, Stats.build_seed_stats(self.other), self.general, alpha = 1.)
        self.assertTrue(own.mean_log_likelihood > other.mean_log_likelihood)
        return None

    def test_chord_ngram_overlap (self):
        seed_stats = Stats.build_seed_stats(self.seed)
        overlap = Evaluate.chord_ngram_overlap(self.other, seed_stats)
        self.assertTrue(0. <= overlap < 1.)
        return None

    def test_evaluate_table (self):
        df = Evaluate.evaluate([self.seed, self.other], self.seed, self.general)
        self.assertEqual(list(df.columns), ["song", "style", "function", "value"])
        self.assertEqual(len(df) % 2, 0)
        self.assertEqual(df["song"].nunique(), 2)
        return None


class ExperimentTest(unittest.TestCase):

    def test_imitation_experiment (self):
        seeds = [load_seed("doo_wop"), load_seed("sunny_pop")]
        general = Stats.build_general_stats(seeds)
        t0 = time.perf_counter()
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            result = Evaluate.imitation_experiment(seeds, general, run_config = config0, rng_seed = 0)
        t1 = time.perf_counter()
        print("\nimitation_experiment time = %.3f s" % (t1 - t0))
        self.assertEqual(result.scores.shape, (2, 2))
        self.assertEqual(list(result.tests["comparison"]),
                         ["own_vs_other_style", "imitation_vs_seed", "imitation_vs_unconstrained"])
        self.assertTrue(((result.tests["fraction"] >= 0.) & (result.tests["fraction"] <= 1.)).all())
        self.assertEqual(len(result.songs["imitation"]), 2)
        self.assertEqual(len(result.songs["unconstrained"]), 2)
        for seed, song in zip(seeds, result.songs["imitation"]):
            self.assertEqual(song.sections, seed.sections)
        # Parity : one row per imitation, one paired row per generated section
        self.assertEqual(list(result.parity["seed"]), [str(s.name) for s in seeds])
        n_sections = sum(len(s.sections) for s in seeds)
        self.assertEqual(len(result.parity_sections), n_sections)
        parity_test = result.tests.set_index("comparison").loc["imitation_vs_seed"]
        self.assertEqual(parity_test["df"], n_sections - 1)
        for i, row in result.parity.iterrows():
            self.assertAlmostEqual(row["imitation_score"], result.scores.iloc[i, i])
            rel = (row["imitation_score"] - row["seed_score"]) / abs(row["seed_score"])
            self.assertAlmostEqual(row["relative_difference"], rel)
            self.assertEqual(row["within_band"], abs(rel) <= Evaluate.PARITY_BAND)
        return None

    def test_parity_tables (self):
        seeds = [load_seed("minor_groove"), load_seed("rock_drive")]
        general = Stats.build_general_stats(seeds)
        reports = [Evaluate.score_song(s, Stats.build_seed_stats(s), general) for s in seeds]
        # Seeds as their own imitations
        parity, parity_sections = Evaluate.parity_tables(seeds, seeds, reports, reports)
        self.assertTrue(np.allclose(parity["relative_difference"], 0.))
        self.assertTrue(parity["within_band"].all())
        self.assertEqual(len(parity_sections), sum(len(s.sections) for s in seeds))
        self.assertTrue((parity_sections["section"] == parity_sections["seed_section"]).all())
        self.assertTrue(np.allclose(parity_sections["imitation_score"], parity_sections["seed_score"]))
        # Section scores average back to the song score (weighted by notes)
        for s, rep in zip(seeds, reports):
            counts = [len(s.section_notes("melody", i)) for i in range(s.n_sections)]
            means  = [rep.section_log_likelihood(i) for i in range(s.n_sections)]
            self.assertAlmostEqual(np.average(means, weights=counts), rep.mean_log_likelihood)
        # Out of band imitation
        parity, _ = Evaluate.parity_tables(seeds[:1], seeds[:1], reports[1:], reports[:1], band = 0.)
        self.assertEqual(bool(parity["within_band"][0]), parity["relative_difference"][0] == 0.)
        return None

    def test_bundled_seeds_experiment (self):
        seeds = [Generate.read_song(path) for path in Generate.bundled_seeds()]
        self.assertTrue(len(seeds) >= 5)
        general = Generate.default_general_stats()
        t0 = time.perf_counter()
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            result = Evaluate.imitation_experiment(seeds, general, run_config = config1, rng_seed = 0,
                                                   with_unconstrained = False)
        t1 = time.perf_counter()
        print("\nbundled seeds experiment time = %.3f s" % (t1 - t0))
        print(result.tests.to_string(index=False))
        print(result.parity.to_string(index=False))
        tests = result.tests.set_index("comparison")
        # Imitations score higher under their own seed style than under the other seed styles
        self.assertTrue(tests.loc["own_vs_other_style", "fraction"] >= 0.8)
        self.assertTrue(tests.loc["own_vs_other_style", "t"] > 0)
        self.assertTrue(tests.loc["own_vs_other_style", "p"] < 0.05)
        # Parity is tested over generated sections
        self.assertTrue(len(result.parity_sections) >= Evaluate.MIN_PARITY_SECTIONS)
        self.assertEqual(tests.loc["imitation_vs_seed", "df"], len(result.parity_sections) - 1)
        self.assertEqual(len(result.parity), len(seeds))
        self.assertNotIn("imitation_vs_unconstrained", tests.index)
        return None

    def test_unconstrained_config (self):
        cfg = Evaluate.unconstrained_config(config0)
        self.assertEqual(cfg["structure_config"]["max_dist"], -1.)
        self.assertEqual(cfg["melody_config"]["alpha"], 0.)
        self.assertEqual(cfg["chords_config"]["alpha"], 0.)
        self.assertEqual(config0["melody_config"]["alpha"], 0.5)
        return None


if __name__ == '__main__':
    unittest.main(verbosity=2)
