import json
import os
import warnings
from collections import Counter

import numpy as np

# Internal imports
from popstyle.songsym import note as N
from popstyle.songsym.note import InputError
from popstyle.songsym import bass as Bass

# Pseudo-count added to each cell of general tables
GENERAL_SMOOTHING = 1e-4
# Default blending parameter
DEFAULT_ALPHA = 0.5
# Tempo buckets for duration frequencies: slow < 90 <= medium <= 120 < fast
TEMPO_BUCKET_EDGES = (90., 120.)
N_TEMPO_BUCKETS    = len(TEMPO_BUCKET_EDGES) + 1
# Chord n-gram orders counted (order 5 is only used for distinctive-state entry counts)
NGRAM_ORDERS   = (2, 3, 4, 5)
# Cadence lengths
CADENCE_LENGTHS = (2, 3, 4, 5, 6)

STATS_FORMAT  = "popstyle-stats"
STATS_VERSION = 1

# Name -> shape of count tables, last axis being the distribution axis
ARRAY_TABLES = {
    "chord_trans"        : (N.N_CHORDS, N.N_CHORDS),
    "pitch_freq"         : (N.N_DEGREES,),
    "pitch_given_chord"  : (N.N_CHORDS, N.N_DEGREES),
    "interval_freq"      : (N.N_INTERVALS,),
    "dur_freq"           : (N.MAX_DURATION,),
    "dur_freq_by_tempo"  : (N_TEMPO_BUCKETS, N.MAX_DURATION),
    "dur_trans"          : (N.MAX_DURATION, N.MAX_DURATION),
    "rest_dur"           : (N.MAX_DURATION,),
    "pos_dur"            : (N.SLOTS_PER_BAR, N.MAX_DURATION),
    "interval_given_dur" : (N.MAX_DURATION, N.N_INTERVALS),
    "nonchord_downbeat"  : (N.MAX_DURATION, 2),                   # [chord tone, non-chord tone]
    "rest_freq"          : (2,),                                  # [pitched, rest]
    "span_notes"         : (2,),                                  # [within bar, crossing a barline]
    "bass_ctf"           : (N.SLOTS_PER_BAR, N.N_CATEGORIES),
    "bass_ctt"           : (N.SLOTS_PER_BAR, N.N_CATEGORIES, N.N_CATEGORIES),
}
COUNTER_TABLES = tuple("ngrams_%i" % n for n in NGRAM_ORDERS) + ("cadences", "bass_patterns")


class StatsFormatError(InputError):
    pass


def tempo_bucket (tempo):
    """
    Idx of tempo bucket (0 slow, 1 medium, 2 fast).
    """
    if tempo < TEMPO_BUCKET_EDGES[0]:
        return 0
    if tempo <= TEMPO_BUCKET_EDGES[1]:
        return 1
    return 2


def chords_to_key (chords):
    return "-".join(N.CHORD_NAMES[c] for c in chords)


def key_to_chords (key):
    return tuple(N.chord_idx(name) for name in key.split("-"))


def _normalize_counter (counter):
    total = float(sum(counter.values()))
    if total == 0:
        return {}
    return {k: v / total for k, v in counter.items()}


# ----------------------------------------------------------------------------------------------------------------------
# ----------------------------------------------------- STAT TABLES ----------------------------------------------------
# ----------------------------------------------------------------------------------------------------------------------

class StatTables:
    """
    Probability tables of a song (seed statistics) or corpus (general statistics).
    Attributes
    ----------
    counts : dict of numpy.array or None
        Raw counts (None for blended tables).
    counters : dict of collections.Counter or None
        Raw counts of chord n-grams ("ngrams_2" ... "ngrams_5"), cadences and bass patterns.
    probs : dict of numpy.array
        Row-normalized tables (smoothed by self.smoothing), empty rows are all zeros.
    empty : dict of numpy.array of bool
        Flags of empty rows of each table (shape = table shape without last axis).
    freqs : dict of dict
        Normalized counters.
    smoothing : float
        Pseudo-count added to each cell before normalizing.
    name : str or None
        Provenance label.
    Tables are also accessible as attributes (eg. tables.pitch_freq).
    """
    def __init__(self, counts = None, counters = None, smoothing = 0., name = None):
        self.counts = {k: np.zeros(shape, dtype=float) for k, shape in ARRAY_TABLES.items()}
        if counts is not None:
            for k, v in counts.items():
                v = np.asarray(v, dtype=float)
                assert k in ARRAY_TABLES, "Unknown table %s." % k
                assert v.shape == ARRAY_TABLES[k], "Table %s must have shape %s." % (k, ARRAY_TABLES[k])
                assert (v >= 0).all(), "Counts of table %s must be nonnegative." % k
                self.counts[k] = v
        self.counters = {k: Counter() for k in COUNTER_TABLES}
        if counters is not None:
            for k, v in counters.items():
                assert k in COUNTER_TABLES, "Unknown counter table %s." % k
                self.counters[k] = Counter(v)
        self.smoothing = float(smoothing)
        self.name      = name
        self.normalize()

    def normalize(self):
        """
        Computes probs, empty and freqs from counts.
        """
        self.probs = {}
        self.empty = {}
        for k, c in self.counts.items():
            c = c + self.smoothing
            row_sums = c.sum(axis=-1, keepdims=True)
            self.probs[k] = np.divide(c, row_sums, out=np.zeros_like(c), where=row_sums > 0)
            self.empty[k] = (row_sums[..., 0] == 0)
        self.freqs = {k: _normalize_counter(v) for k, v in self.counters.items()}

    @classmethod
    def from_probs(cls, probs, empty, freqs, name = None):
        """
        Tables holding probabilities only (eg. blend results), these can not be serialized.
        """
        tables = cls.__new__(cls)
        tables.counts    = None
        tables.counters  = None
        tables.smoothing = 0.
        tables.name      = name
        tables.probs     = probs
        tables.empty     = empty
        tables.freqs     = freqs
        return tables

    def __getattr__(self, name):
        if name in ARRAY_TABLES and "probs" in self.__dict__:
            return self.__dict__["probs"][name]
        if name in COUNTER_TABLES and "freqs" in self.__dict__:
            return self.__dict__["freqs"][name]
        raise AttributeError(name)

    def __add__(self, other):
        assert self.counts is not None and other.counts is not None, "Only count tables can be pooled."
        counts   = {k: self.counts[k] + other.counts[k] for k in ARRAY_TABLES}
        counters = {k: self.counters[k] + other.counters[k] for k in COUNTER_TABLES}
        return StatTables(counts = counts, counters = counters, smoothing = self.smoothing, name = self.name)

    def with_smoothing(self, smoothing, name = None):
        return StatTables(counts = self.counts, counters = self.counters, smoothing = smoothing,
                          name = self.name if name is None else name)

    # ---------- CHORD N-GRAMS ----------

    def ngram_count(self, seq):
        assert self.counters is not None, "Raw n-gram counts are not available on blended tables."
        return self.counters["ngrams_%i" % len(seq)][tuple(seq)]

    def ngram_frequency(self, seq):
        """
        Relative frequency of a chord n-gram among n-grams of the same order.
        """
        return self.freqs["ngrams_%i" % len(seq)].get(tuple(seq), 0.)

    # ---------- SERIALIZATION ----------

    def to_dict(self):
        assert self.counts is not None, "Blended tables can not be serialized, serialize their count tables."
        counters = {}
        for k, counter in self.counters.items():
            if k == "bass_patterns":
                counters[k] = {key: int(v) for key, v in sorted(counter.items())}
            else:
                counters[k] = {chords_to_key(key): int(v) for key, v in sorted(counter.items())}
        return {"format"    : STATS_FORMAT,
                "version"   : STATS_VERSION,
                "name"      : self.name,
                "smoothing" : self.smoothing,
                "tables"    : {k: v.tolist() for k, v in self.counts.items()},
                "counters"  : counters}

    @classmethod
    def from_dict(cls, d):
        if not isinstance(d, dict) or d.get("format") != STATS_FORMAT:
            raise StatsFormatError("Not a %s file." % STATS_FORMAT)
        if d.get("version") != STATS_VERSION:
            raise StatsFormatError("Unsupported stats version %r (expected %i)." % (d.get("version"), STATS_VERSION))
        counts = {}
        for k, v in d.get("tables", {}).items():
            if k not in ARRAY_TABLES:
                raise StatsFormatError("Unknown table %r." % k)
            v = np.array(v, dtype=float)
            if v.shape != ARRAY_TABLES[k] or (v < 0).any():
                raise StatsFormatError("Table %r must hold nonnegative counts of shape %s." % (k, ARRAY_TABLES[k]))
            counts[k] = v
        counters = {}
        for k, v in d.get("counters", {}).items():
            if k not in COUNTER_TABLES:
                raise StatsFormatError("Unknown counter table %r." % k)
            try:
                if k == "bass_patterns":
                    counters[k] = Counter({key: int(c) for key, c in v.items()})
                else:
                    counters[k] = Counter({key_to_chords(key): int(c) for key, c in v.items()})
            except (InputError, ValueError, AttributeError) as e:
                raise StatsFormatError("Bad entry in counter table %r: %s" % (k, e))
        return cls(counts = counts, counters = counters, smoothing = d.get("smoothing", 0.), name = d.get("name"))

    def to_json(self):
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text):
        try:
            d = json.loads(text)
        except json.JSONDecodeError as e:
            raise StatsFormatError("Stats file is not valid JSON: %s" % e)
        return cls.from_dict(d)

    def save(self, path):
        write_atomic(path, self.to_json())

    @classmethod
    def load(cls, path):
        with open(path, "r") as f:
            return cls.from_json(f.read())

    # ---------- DISPLAY ----------

    def summary(self):
        """
        One line per table listing its nonzero entries.
        """
        lines = []
        for k in ARRAY_TABLES:
            p = self.probs[k]
            entries = []
            for idx in zip(*np.nonzero(p)):
                label = ">".join(str(i) for i in idx)
                entries.append("%s:%.3f" % (label, p[idx]))
            lines.append("%s: %s" % (k, " ".join(entries)))
        for k in COUNTER_TABLES:
            items = sorted(self.freqs[k].items(), key=lambda kv: (-kv[1], str(kv[0])))
            labels = [(key if k == "bass_patterns" else chords_to_key(key)) for key, _ in items]
            lines.append("%s: %s" % (k, " ".join("%s:%.3f" % (l, f) for l, (_, f) in zip(labels, items))))
        return "\n".join(lines)

    def __repr__(self):
        return "StatTables(%s, smoothing = %g)" % (self.name, self.smoothing)


def write_atomic (path, content):
    """
    Writes str or bytes content to path through a temporary file and rename.
    """
    tmp_path = "%s.tmp%i" % (path, os.getpid())
    mode = "wb" if isinstance(content, bytes) else "w"
    with open(tmp_path, mode) as f:
        f.write(content)
    os.replace(tmp_path, path)


# ----------------------------------------------------------------------------------------------------------------------
# ------------------------------------------------------- COUNTING -----------------------------------------------------
# ----------------------------------------------------------------------------------------------------------------------

class ChordAnnotation:
    """
    Chord-only corpus item: chords of each section.
    """
    def __init__(self, sections, name = None):
        self.sections = [[int(c) for c in s] for s in sections if len(s) > 0]
        self.name = name

    @property
    def chords(self):
        return [c for s in self.sections for c in s]

    def __repr__(self):
        return "ChordAnnotation(%s, %i sections)" % (self.name, len(self.sections))


def parse_chord_annotation (text, name = None):
    """
    Parses a chord-annotation corpus file: one chord symbol per bar per line (several symbols on a line are read as
    consecutive bars), blank lines separate sections, "//" starts a comment.
    """
    sections = [[]]
    for i_line, raw in enumerate(text.splitlines()):
        line = raw.split("//")[0].strip()
        if line == "":
            if len(sections[-1]) > 0:
                sections.append([])
            continue
        for tok in line.split():
            if tok not in N.CHORD_NAME_TO_IDX:
                raise InputError("%s line %i: unknown chord %r." % (name, i_line + 1, tok))
            sections[-1].append(N.CHORD_NAME_TO_IDX[tok])
    return ChordAnnotation(sections, name = name)


def _count_chords (sections_chords, counts, counters):
    chords = [c for s in sections_chords for c in s]
    for a, b in zip(chords[:-1], chords[1:]):
        counts["chord_trans"][a, b] += 1
    for n in NGRAM_ORDERS:
        for i in range(len(chords) - n + 1):
            counters["ngrams_%i" % n][tuple(chords[i:i + n])] += 1
    for s in sections_chords:
        for k in CADENCE_LENGTHS:
            if k <= len(s):
                counters["cadences"][tuple(s[-k:])] += 1


def _count_melody (song, counts):
    bucket = tempo_bucket(song.tempo)
    starts = song.section_start_bars()
    for i_section in range(song.n_sections):
        pos = starts[i_section] * N.SLOTS_PER_BAR
        prev_note    = None
        prev_pitched = None
        for note in song.section_notes("melody", i_section):
            d = note.duration
            onset = pos % N.SLOTS_PER_BAR
            chord = song.chords[pos // N.SLOTS_PER_BAR]
            if note.is_rest:
                counts["rest_freq"][1] += 1
                counts["rest_dur"][d - 1] += 1
            else:
                p = note.pitch
                counts["rest_freq"][0] += 1
                counts["pitch_freq"][p - 1] += 1
                counts["pitch_given_chord"][chord, p - 1] += 1
                counts["dur_freq"][d - 1] += 1
                counts["dur_freq_by_tempo"][bucket, d - 1] += 1
                counts["pos_dur"][onset, d - 1] += 1
                counts["span_notes"][int(onset + d > N.SLOTS_PER_BAR)] += 1
                if onset in N.DOWNBEATS:
                    counts["nonchord_downbeat"][d - 1, int(not N.is_chord_tone(p, chord))] += 1
                if prev_pitched is not None:
                    delta = p - prev_pitched.pitch
                    counts["interval_freq"][delta + N.MAX_INTERVAL] += 1
                    counts["interval_given_dur"][prev_pitched.duration - 1, delta + N.MAX_INTERVAL] += 1
                prev_pitched = note
            if prev_note is not None:
                counts["dur_trans"][prev_note.duration - 1, d - 1] += 1
            prev_note = note
            pos += d


def _count_bass (song, counts, counters):
    for i_section in range(song.n_sections):
        notes  = song.section_notes("bass", i_section)
        chords = song.section_chords(i_section)
        for pattern in Bass.bar_patterns(notes, len(chords)):
            counters["bass_patterns"][pattern] += 1
        ctf, ctt = Bass.count_chord_tones(notes, chords)
        counts["bass_ctf"] += ctf
        counts["bass_ctt"] += ctt


def count_item (item):
    """
    Raw counts of a corpus item (song.Song or ChordAnnotation).
    Returns
    -------
    counts, counters : dict of numpy.array, dict of collections.Counter
    """
    counts   = {k: np.zeros(shape, dtype=float) for k, shape in ARRAY_TABLES.items()}
    counters = {k: Counter() for k in COUNTER_TABLES}
    if isinstance(item, ChordAnnotation):
        _count_chords(item.sections, counts, counters)
    else:
        _count_chords([item.section_chords(i) for i in range(item.n_sections)], counts, counters)
        _count_melody(item, counts)
        _count_bass  (item, counts, counters)
    return counts, counters


def build_seed_stats (song):
    """
    Seed statistics of a song (raw, not smoothed).
    Parameters
    ----------
    song : song.Song
    Returns
    -------
    tables : stats.StatTables
    """
    counts, counters = count_item(song)
    return StatTables(counts = counts, counters = counters, smoothing = 0., name = song.name)


def build_general_stats (corpus, smoothing = GENERAL_SMOOTHING, name = "general"):
    """
    General statistics pooled over a corpus.
    Parameters
    ----------
    corpus : list of song.Song or stats.ChordAnnotation
        Chord annotations only populate chord tables.
    smoothing : float
        Pseudo-count added to each cell.
    name : str
    Returns
    -------
    tables : stats.StatTables
    """
    if len(corpus) == 0:
        raise InputError("Can not build general statistics from an empty corpus.")
    counts   = {k: np.zeros(shape, dtype=float) for k, shape in ARRAY_TABLES.items()}
    counters = {k: Counter() for k in COUNTER_TABLES}
    for item in corpus:
        c, ctr = count_item(item)
        for k in ARRAY_TABLES:
            counts[k] += c[k]
        for k in COUNTER_TABLES:
            counters[k] += ctr[k]
    n_songs = sum(not isinstance(item, ChordAnnotation) for item in corpus)
    if n_songs == 0:
        warnings.warn("General corpus holds chord annotations only, melody and bass tables are uniform.")
    return StatTables(counts = counts, counters = counters, smoothing = smoothing, name = name)


# ----------------------------------------------------------------------------------------------------------------------
# ------------------------------------------------------- BLENDING -----------------------------------------------------
# ----------------------------------------------------------------------------------------------------------------------

def check_alpha (alpha):
    try: alpha = float(alpha)
    except (TypeError, ValueError): raise TypeError("alpha must be cast-able to a float")
    assert 0. <= alpha <= 1., "alpha must be such as: 0 <= alpha <= 1"
    return alpha


def blend_rows (seed_p, seed_empty, general_p, general_empty, alpha):
    """
    Convex combination (1 - alpha) * general + alpha * seed of row-normalized tables, rows empty on one side falling
    back to the other side alone.
    Returns
    -------
    probs, empty : numpy.array, numpy.array of bool
    """
    probs = (1. - alpha) * general_p + alpha * seed_p
    probs = np.where(seed_empty[..., np.newaxis],    general_p, probs)
    probs = np.where(general_empty[..., np.newaxis], seed_p,    probs)
    return probs, seed_empty & general_empty


def blend (seed, general, alpha):
    """
    Blends seed and general tables: P = (1 - alpha) * P_general + alpha * P_seed.
    Parameters
    ----------
    seed : stats.StatTables
    general : stats.StatTables
    alpha : float
        Blending parameter in [0, 1].
    Returns
    -------
    tables : stats.StatTables
    """
    alpha = check_alpha(alpha)
    probs, empty = {}, {}
    for k in ARRAY_TABLES:
        probs[k], empty[k] = blend_rows(seed.probs[k], seed.empty[k], general.probs[k], general.empty[k], alpha)
    freqs = {}
    for k in COUNTER_TABLES:
        s, g = seed.freqs[k], general.freqs[k]
        if len(s) == 0:
            freqs[k] = dict(g)
        elif len(g) == 0:
            freqs[k] = dict(s)
        else:
            freqs[k] = {key: (1. - alpha) * g.get(key, 0.) + alpha * s.get(key, 0.) for key in set(s) | set(g)}
    return StatTables.from_probs(probs, empty, freqs, name = "blend(%s, %s, %g)" % (seed.name, general.name, alpha))
