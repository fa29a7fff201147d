import copy
import warnings
from collections import namedtuple

import numpy as np
import pandas as pd
from scipy import special
from tqdm import tqdm

# Internal imports
from popstyle.songsym import note as N
from popstyle.songsym import stats as Stats
from popstyle.songsym import rating as Rating
from popstyle.songsym import structure as Structure
from popstyle.compose import compose as Compose
from popstyle.task import generate as Generate

# Floor of rating weights before taking logs
LOG_FLOOR = 1e-12
# Chord n-gram orders of the overlap column
OVERLAP_ORDERS = (2, 3, 4)
# Relative band of imitation scores around their seed score
PARITY_BAND = 0.15
# Generated sections below which the parity test is underpowered
MIN_PARITY_SECTIONS = 10

SHOW_PROGRESS_BAR = False


# ----------------------------------------------------------------------------------------------------------------------
# ------------------------------------------------------- SCORING ------------------------------------------------------
# ----------------------------------------------------------------------------------------------------------------------

class LikelihoodReport:
    """
    Melody likelihood of a song under a style.
    Attributes
    ----------
    song_name, style_name : str
    breakdown : dict of str -> numpy.array of shape (n_notes,) of float
        Per-note log-weight of each rating function.
    log_weights : numpy.array of shape (n_notes,) of float
        Per-note log-weight (sum of breakdown).
    ngram_overlap : float
        Fraction of the song chord 2, 3 and 4-grams found in the style seed.
    note_sections : numpy.array of shape (n_notes,) of int
        Section idx of each note.
    """
    def __init__(self, song_name, style_name, breakdown, ngram_overlap, note_sections = None):
        self.song_name     = song_name
        self.style_name    = style_name
        self.breakdown     = breakdown
        self.log_weights   = np.sum(list(breakdown.values()), axis=0) if len(breakdown) > 0 else np.zeros(0)
        self.ngram_overlap = ngram_overlap
        self.note_sections = np.zeros(self.n_notes, dtype=int) if note_sections is None \
                             else np.asarray(note_sections, dtype=int)

    @property
    def n_notes(self):
        return len(self.log_weights)

    @property
    def mean_log_likelihood(self):
        """Mean per-note log-likelihood."""
        return float(self.log_weights.mean()) if self.n_notes > 0 else 0.

    def section_log_likelihood(self, i_section):
        """
        Mean per-note log-likelihood of the notes of a section.
        """
        w = self.log_weights[self.note_sections == i_section]
        return float(w.mean()) if len(w) > 0 else 0.

    def to_dataframe(self):
        """
        One row per function (mean per-note log-weight), a "total" row and a "chord_ngram_overlap" row.
        """
        rows = [{"song": self.song_name, "style": self.style_name, "function": name,
                 "value": float(v.mean()) if len(v) > 0 else 0.} for name, v in self.breakdown.items()]
        rows.append({"song": self.song_name, "style": self.style_name, "function": "total",
                     "value": self.mean_log_likelihood})
        rows.append({"song": self.song_name, "style": self.style_name, "function": "chord_ngram_overlap",
                     "value": self.ngram_overlap})
        return pd.DataFrame(rows, columns=["song", "style", "function", "value"])

    def __repr__(self):
        return "LikelihoodReport(%s under %s: %.4f over %i notes)" % (self.song_name, self.style_name,
                                                                      self.mean_log_likelihood, self.n_notes)


def chord_ngram_overlap (song, seed_stats, orders = OVERLAP_ORDERS):
    """
    Fraction of the chord n-grams of song (counted with multiplicity) present in the seed n-gram counts.
    """
    song_counters = Stats.count_item(song)[1]
    total, found = 0, 0
    for n in orders:
        for seq, count in song_counters["ngrams_%i" % n].items():
            total += count
            if seed_stats.counters["ngrams_%i" % n][seq] > 0:
                found += count
    return found / total if total > 0 else 0.


def score_song (song, seed_stats, general, alpha = Stats.DEFAULT_ALPHA, ratings_config = None, style_name = None):
    """
    Scores the melody of a song with the rating battery used for generation (same alpha), each note being rated in
    the context of the preceding notes of its section and of its chords.
    Parameters
    ----------
    song : song.Song
    seed_stats : stats.StatTables
        Seed statistics of the style (raw counts).
    general : stats.StatTables
    alpha : float
    ratings_config : list or None
        Rating battery (full battery if None).
    style_name : str or None
    Returns
    -------
    report : evaluate.LikelihoodReport
    """
    style = Rating.MelodyStyle(seed_stats, general, alpha, tempo = song.tempo)
    collection = Rating.make_RatingCollection(style, ratings_config)
    breakdown = {name: [] for name in collection.names}
    note_sections = []
    for i in range(song.n_sections):
        chords = song.section_chords(i)
        notes  = song.section_notes("melody", i)
        is_pac = len(chords) >= 2 and tuple(chords[-2:]) == (N.DOMINANT_CHORD, N.TONIC_CHORD)
        for k, n in enumerate(notes):
            ctx = Rating.make_context(style, chords, notes[:k], is_pac = is_pac)
            idx = Rating.grid_index(n.pitch, n.duration)
            note_sections.append(i)
            for name, grid in collection.breakdown(ctx).items():
                breakdown[name].append(np.log(max(grid[idx], LOG_FLOOR)))
    breakdown = {name: np.array(v, dtype=float) for name, v in breakdown.items()}
    return LikelihoodReport(song_name     = str(song.name),
                            style_name    = str(seed_stats.name if style_name is None else style_name),
                            breakdown     = breakdown,
                            ngram_overlap = chord_ngram_overlap(song, seed_stats),
                            note_sections = note_sections)


# ----------------------------------------------------------------------------------------------------------------------
# ----------------------------------------------------- PAIRED TEST ----------------------------------------------------
# ----------------------------------------------------------------------------------------------------------------------

PairedTest = namedtuple("PairedTest", ["t", "p", "df", "degenerate"])


def t_sf_two_sided (t, df):
    """
    Two-sided p-value of a Student t statistic: I_{df/(df+t^2)}(df/2, 1/2).
    """
    return float(special.betainc(df / 2., 0.5, df / (df + t * t)))


def paired_compare (scores_a, scores_b):
    """
    Paired t-test of scores_a against scores_b.
    Parameters
    ----------
    scores_a, scores_b : array_like of shape (n,) of float
        n >= 2.
    Returns
    -------
    test : evaluate.PairedTest
        t statistic, two-sided p-value, degrees of freedom and a flag set when differences have zero variance
        (t = 0, p = 1 for identical samples, t = +/-inf, p = 0 otherwise).
    """
    a = np.asarray(scores_a, dtype=float)
    b = np.asarray(scores_b, dtype=float)
    assert a.shape == b.shape and a.ndim == 1, "scores_a and scores_b must be 1D arrays of the same length."
    assert len(a) >= 2, "Paired t-test needs at least 2 pairs."
    d  = a - b
    n  = len(d)
    df = n - 1
    sd = d.std(ddof=1)
    if sd == 0:
        if d.mean() == 0:
            return PairedTest(0., 1., df, True)
        warnings.warn("Paired differences have zero variance, t-test is degenerate.")
        return PairedTest(float(np.sign(d.mean()) * np.inf), 0., df, True)
    t = float(d.mean() / (sd / np.sqrt(n)))
    return PairedTest(t, t_sf_two_sided(t, df), df, False)


# ----------------------------------------------------------------------------------------------------------------------
# ------------------------------------------------ IMITATION EXPERIMENT ------------------------------------------------
# ----------------------------------------------------------------------------------------------------------------------

def unconstrained_config (run_config):
    """
    Run config generating without imitation: every section fresh (no contour or rhythm targets), alphas 0.
    """
    cfg = copy.deepcopy(run_config)
    cfg["structure_config"]["max_dist"] = -1.
    cfg["chords_config"]["alpha"] = 0.
    cfg["melody_config"]["alpha"] = 0.
    return cfg


ExperimentResult = namedtuple("ExperimentResult", ["scores", "tests", "parity", "parity_sections", "songs"])


def _test_row (name, test, fraction):
    return {"comparison": name, "t": test.t, "p": test.p, "df": test.df, "degenerate": test.degenerate,
            "fraction": fraction}


def seed_sections_of (song, seed):
    """
    Idx of the seed section nearest to each section of song (alignment without distance limit).
    """
    return [ref.index for ref in Structure.align(song.sections, seed.sections, np.inf)]


def parity_tables (imitations, seeds, imitation_reports, seed_reports, band = PARITY_BAND):
    """
    Parity of imitations with their seeds under the seed style, per imitation and per generated section.
    Parameters
    ----------
    imitations, seeds : list of song.Song
    imitation_reports, seed_reports : list of evaluate.LikelihoodReport
        Imitation i and seed i scored under the style of seed i.
    band : float
    Returns
    -------
    parity, parity_sections : pandas.DataFrame, pandas.DataFrame
        parity : one row per imitation (seed score, imitation score, relative difference, within band).
        parity_sections : one row per generated section (imitation section score, aligned seed section score).
    """
    rows, section_rows = [], []
    for song, seed, rep, seed_rep in zip(imitations, seeds, imitation_reports, seed_reports):
        seed_score = seed_rep.mean_log_likelihood
        rel = (rep.mean_log_likelihood - seed_score) / abs(seed_score) if seed_score != 0 else 0.
        rows.append({"seed"                : str(seed.name),
                     "seed_score"          : seed_score,
                     "imitation_score"     : rep.mean_log_likelihood,
                     "relative_difference" : rel,
                     "within_band"         : bool(abs(rel) <= band)})
        for k, j in enumerate(seed_sections_of(song, seed)):
            section_rows.append({"seed"            : str(seed.name),
                                 "section"         : k,
                                 "seed_section"    : j,
                                 "imitation_score" : rep.section_log_likelihood(k),
                                 "seed_score"      : seed_rep.section_log_likelihood(j)})
    parity = pd.DataFrame(rows, columns=["seed", "seed_score", "imitation_score", "relative_difference",
                                         "within_band"])
    parity_sections = pd.DataFrame(section_rows, columns=["seed", "section", "seed_section", "imitation_score",
                                                          "seed_score"])
    return parity, parity_sections


def imitation_experiment (seeds, general, run_config = None, alpha = Stats.DEFAULT_ALPHA, rng_seed = 0,
                          with_unconstrained = True, verbose = 0):
    """
    Generates one imitation per seed and compares likelihoods: imitations under their own seed style against other
    seed styles, imitation sections against their aligned seed sections (parity), and imitations against
    unconstrained generations.
    Parameters
    ----------
    seeds : list of song.Song
        At least 2 seeds with distinct names.
    general : stats.StatTables
    run_config : dict or None
    alpha : float
        Blending parameter of scoring.
    rng_seed : int
    with_unconstrained : bool
    verbose : int
    Returns
    -------
    result : evaluate.ExperimentResult
        scores : pandas.DataFrame, mean log-likelihood of imitation of seed i (rows) under style of seed j (columns).
        tests : pandas.DataFrame, one row per comparison (t, p, df, degenerate, fraction of wins).
        parity : pandas.DataFrame, relative difference of each imitation score to its seed score.
        parity_sections : pandas.DataFrame, paired section scores of the parity test.
        songs : dict of str -> list of song.Song, "imitation" and "unconstrained" songs.
    """
    assert len(seeds) >= 2, "The experiment needs at least 2 seeds."
    run_config = Generate.default_config if run_config is None else run_config
    names = [str(s.name) for s in seeds]
    assert len(set(names)) == len(names), "Seeds must have distinct names."
    seed_stats = [Stats.build_seed_stats(s) for s in seeds]

    iterator = range(len(seeds))
    if SHOW_PROGRESS_BAR:
        iterator = tqdm(iterator, desc="imitations")
    imitations, unconstrained = [], []
    for i in iterator:
        imitations.append(Compose.compose(seeds[i], general, rng_seed = rng_seed + i,
                                          name = "imitation_of_%s" % names[i], **run_config))
        if with_unconstrained:
            unconstrained.append(Compose.compose(seeds[i], general, rng_seed = rng_seed + i,
                                                 name = "unconstrained_%s" % names[i],
                                                 **unconstrained_config(run_config)))

    # -------- Scores matrix --------
    n = len(seeds)
    reports = [[score_song(imitations[i], seed_stats[j], general, alpha) for j in range(n)] for i in range(n)]
    scores = np.array([[reports[i][j].mean_log_likelihood for j in range(n)] for i in range(n)])
    own   = np.diag(scores)
    other = np.array([np.delete(scores[i], i).mean() for i in range(n)])
    off   = ~np.eye(n, dtype=bool)
    wins  = float((own[:, np.newaxis] > scores)[off].mean())

    rows = [_test_row("own_vs_other_style", paired_compare(own, other), wins)]

    # -------- Parity with seeds --------
    seed_reports = [score_song(seeds[i], seed_stats[i], general, alpha) for i in range(n)]
    parity, parity_sections = parity_tables(imitations, seeds, [reports[i][i] for i in range(n)], seed_reports)
    if len(parity_sections) < MIN_PARITY_SECTIONS:
        warnings.warn("Parity test over %i generated sections (< %i)." % (len(parity_sections), MIN_PARITY_SECTIONS))
    if not parity["within_band"].all():
        warnings.warn("Imitation score off its seed score by more than %g%%: %s." %
                      (100 * PARITY_BAND, ", ".join(parity["seed"][~parity["within_band"]])))
    gen_s, seed_s = parity_sections["imitation_score"].values, parity_sections["seed_score"].values
    rows.append(_test_row("imitation_vs_seed", paired_compare(gen_s, seed_s), float((gen_s > seed_s).mean())))

    # -------- Unconstrained baseline --------
    if with_unconstrained:
        base = np.array([score_song(unconstrained[i], seed_stats[i], general, alpha).mean_log_likelihood
                         for i in range(n)])
        rows.append(_test_row("imitation_vs_unconstrained", paired_compare(own, base), float((own > base).mean())))

    tests = pd.DataFrame(rows, columns=["comparison", "t", "p", "df", "degenerate", "fraction"])
    if verbose:
        print(tests.to_string(index=False))
        print(parity.to_string(index=False))
    return ExperimentResult(scores          = pd.DataFrame(scores, index=names, columns=names),
                            tests           = tests,
                            parity          = parity,
                            parity_sections = parity_sections,
                            songs           = {"imitation": imitations, "unconstrained": unconstrained})


def evaluate (songs, seed, general = None, alpha = Stats.DEFAULT_ALPHA, ratings_config = None):
    """
    Likelihood report table of songs under the style of seed (one row per song per function).
    (Wrapper around score_song)
    Parameters
    ----------
    songs : list of song.Song
    seed : song.Song
    general : stats.StatTables or None
        General statistics (bundled corpus if None).
    Returns
    -------
    report : pandas.DataFrame
    """
    general = Generate.default_general_stats([seed]) if general is None else general
    seed_stats = Stats.build_seed_stats(seed)
    frames = [score_song(s, seed_stats, general, alpha, ratings_config).to_dataframe() for s in songs]
    return pd.concat(frames, ignore_index=True)
