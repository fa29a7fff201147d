import numpy as np
from collections import Counter, namedtuple

# Internal imports
from popstyle.songsym import note as N
from popstyle.songsym.note import InputError

ONSET_CHAR   = "0"
HOLD_CHAR    = "_"
SILENT_PATTERN = HOLD_CHAR * N.SLOTS_PER_BAR
# Relative tolerance when comparing log-likelihoods of tied paths
TIE_TOL = 1e-12

BassStyle = namedtuple("BassStyle", ["most_frequent", "first", "last", "matrices"])


# ----------------------------------------------------------------------------------------------------------------------
# ------------------------------------------------------- PATTERNS -----------------------------------------------------
# ----------------------------------------------------------------------------------------------------------------------

def pattern_from_onsets (onsets):
    """
    16-char mask of onset positions in a bar, eg. onsets on beats 1, 2 and 4 -> "0___0_______0___".
    """
    onsets = set(onsets)
    return "".join(ONSET_CHAR if i in onsets else HOLD_CHAR for i in range(N.SLOTS_PER_BAR))


def pattern_onsets (pattern):
    assert len(pattern) == N.SLOTS_PER_BAR, "Bass pattern must have %i slots." % N.SLOTS_PER_BAR
    return [i for i, c in enumerate(pattern) if c == ONSET_CHAR]


def bar_patterns (notes, n_bars):
    """
    Onset pattern of each bar of a section.
    Parameters
    ----------
    notes : list of note.Note
        Bass notes of the section (starting at a barline).
    n_bars : int
    Returns
    -------
    patterns : list of str
    """
    onsets = [[] for _ in range(n_bars)]
    pos = 0
    for n in notes:
        if not n.is_rest:
            onsets[pos // N.SLOTS_PER_BAR].append(pos % N.SLOTS_PER_BAR)
        pos += n.duration
    return [pattern_from_onsets(o) for o in onsets]


def count_chord_tones (notes, chords):
    """
    Chord tone category counts of bass notes: per onset frequencies and per onset transitions (row = onset of the
    note being left).
    Parameters
    ----------
    notes : list of note.Note
        Bass notes of a section.
    chords : list of int
        Chord of each bar of the section.
    Returns
    -------
    ctf, ctt : numpy.array of shape (16, 4), numpy.array of shape (16, 4, 4) of float
    """
    ctf = np.zeros((N.SLOTS_PER_BAR, N.N_CATEGORIES))
    ctt = np.zeros((N.SLOTS_PER_BAR, N.N_CATEGORIES, N.N_CATEGORIES))
    pos  = 0
    prev = None
    for n in notes:
        if not n.is_rest:
            onset = pos % N.SLOTS_PER_BAR
            cat   = N.chord_tone_category(n.pitch, chords[pos // N.SLOTS_PER_BAR])
            ctf[onset, cat] += 1
            if prev is not None:
                ctt[prev[0], prev[1], cat] += 1
            prev = (onset, cat)
        pos += n.duration
    return ctf, ctt


# ----------------------------------------------------------------------------------------------------------------------
# ------------------------------------------------- CHORD TONE MATRICES ------------------------------------------------
# ----------------------------------------------------------------------------------------------------------------------

def _normalize_or_uniform (counts):
    sums = counts.sum(axis=-1, keepdims=True)
    uniform = np.full(counts.shape, 1. / counts.shape[-1])
    return np.where(sums > 0, counts / np.where(sums > 0, sums, 1.), uniform)


class ChordToneMatrices:
    """
    Chord tone frequency (ctf) and transition (ctt) matrices with one row per onset position, categories being
    root, third, fifth, other.
    Onset rows without data fall back to the pooled all-onset row (uniform if there is no data at all).
    """
    def __init__(self, ctf_counts, ctt_counts, pooled_only = False):
        """
        Parameters
        ----------
        ctf_counts : numpy.array of shape (16, 4) of float
        ctt_counts : numpy.array of shape (16, 4, 4) of float
        pooled_only : bool
            Use the pooled all-onset rows for every onset.
        """
        ctf_counts = np.asarray(ctf_counts, dtype=float)
        ctt_counts = np.asarray(ctt_counts, dtype=float)
        self.ctf_pooled = _normalize_or_uniform(ctf_counts.sum(axis=0))                                  # (4,)
        self.ctt_pooled = _normalize_or_uniform(ctt_counts.sum(axis=0))                                  # (4, 4)
        ctf_tiled = np.tile(self.ctf_pooled, (N.SLOTS_PER_BAR, 1))                                       # (16, 4)
        ctt_tiled = np.tile(self.ctt_pooled, (N.SLOTS_PER_BAR, 1, 1))                                    # (16, 4, 4)
        if pooled_only:
            self.ctf, self.ctt = ctf_tiled, ctt_tiled
        else:
            ctf_sums = ctf_counts.sum(axis=-1, keepdims=True)
            ctt_sums = ctt_counts.sum(axis=-1, keepdims=True)
            self.ctf = np.where(ctf_sums > 0, ctf_counts / np.where(ctf_sums > 0, ctf_sums, 1.), ctf_tiled)
            self.ctt = np.where(ctt_sums > 0, ctt_counts / np.where(ctt_sums > 0, ctt_sums, 1.), ctt_tiled)

    def __repr__(self):
        return "ChordToneMatrices(pooled ctf = %s)" % (np.round(self.ctf_pooled, 3),)


def extract_bass_style (notes, chords):
    """
    Bass style of a seed section: most frequent non-silent bar pattern (ties -> earliest), first and last bar patterns
    and chord tone matrices.
    Parameters
    ----------
    notes : list of note.Note
        Bass notes of the section.
    chords : list of int
        Chord of each bar of the section.
    Returns
    -------
    style : bass.BassStyle
    """
    patterns = bar_patterns(notes, len(chords))
    sounding = [p for p in patterns if p != SILENT_PATTERN]
    if len(sounding) == 0:
        raise InputError("Seed section has an empty bass track.")
    most_frequent = Counter(sounding).most_common(1)[0][0]
    ctf, ctt = count_chord_tones(notes, chords)
    return BassStyle(most_frequent = most_frequent,
                     first         = patterns[0],
                     last          = patterns[-1],
                     matrices      = ChordToneMatrices(ctf, ctt))


def global_bass_style (song):
    """
    Bass style used for sections without seed reference: the most frequent non-silent pattern of the whole song for
    every bar and pooled matrices.
    """
    patterns = []
    ctf = np.zeros((N.SLOTS_PER_BAR, N.N_CATEGORIES))
    ctt = np.zeros((N.SLOTS_PER_BAR, N.N_CATEGORIES, N.N_CATEGORIES))
    for i in range(song.n_sections):
        notes, chords = song.section_notes("bass", i), song.section_chords(i)
        patterns += bar_patterns(notes, len(chords))
        f, t = count_chord_tones(notes, chords)
        ctf += f
        ctt += t
    sounding = [p for p in patterns if p != SILENT_PATTERN]
    if len(sounding) == 0:
        raise InputError("Seed song %s has an empty bass track." % (song.name,))
    most_frequent = Counter(sounding).most_common(1)[0][0]
    return BassStyle(most_frequent, most_frequent, most_frequent, ChordToneMatrices(ctf, ctt, pooled_only=True))


# ----------------------------------------------------------------------------------------------------------------------
# ------------------------------------------------------- VITERBI ------------------------------------------------------
# ----------------------------------------------------------------------------------------------------------------------

def _first_max (scores):
    """
    Smallest idx whose score ties with the max (categories are ordered root, third, fifth, other).
    """
    m = scores.max()
    if m == -np.inf:
        return 0
    return int(np.argmax(scores >= m - TIE_TOL * max(1., abs(m))))


def bass_log_likelihood (categories, onsets, matrices):
    """
    log of prod_i P(c_i) P(c_i | c_i-1) of a category sequence.
    """
    onsets = np.asarray(onsets, dtype=int)
    with np.errstate(divide="ignore"):
        ll = np.log(matrices.ctf[onsets[0], categories[0]])
        for i in range(1, len(categories)):
            ll += np.log(matrices.ctf[onsets[i], categories[i]])
            ll += np.log(matrices.ctt[onsets[i - 1], categories[i - 1], categories[i]])
    return float(ll)


def viterbi_bass (onsets, matrices):
    """
    Maximum-likelihood chord tone category sequence argmax prod_i P(c_i) P(c_i | c_i-1) over bass onsets, ties broken
    toward root, then third, fifth and other (lexicographically smallest optimal sequence).
    Parameters
    ----------
    onsets : list of int
        Bar positions (0..15) of successive bass onsets.
    matrices : bass.ChordToneMatrices
    Returns
    -------
    categories : list of int
    """
    assert len(onsets) >= 1, "Viterbi decoding needs at least one onset."
    onsets = np.asarray(onsets, dtype=int) % N.SLOTS_PER_BAR
    k = len(onsets)
    with np.errstate(divide="ignore"):
        log_f = np.log(matrices.ctf[onsets])                                                # (k, 4)
        log_t = np.log(matrices.ctt[onsets[:-1]])                                           # (k-1, 4, 4)
    # Backward pass: best score of onsets i+1..k-1 given category at onset i
    best = np.zeros((k, N.N_CATEGORIES))                                                    # (k, 4)
    for i in range(k - 2, -1, -1):
        best[i] = np.max(log_t[i] + (log_f[i + 1] + best[i + 1])[np.newaxis, :], axis=1)
    # Forward pass: smallest category reaching the optimum at each onset
    categories = [_first_max(log_f[0] + best[0])]
    for i in range(1, k):
        scores = log_t[i - 1][categories[-1]] + log_f[i] + best[i]
        categories.append(_first_max(scores))
    return categories


# ----------------------------------------------------------------------------------------------------------------------
# ----------------------------------------------------- GENERATION -----------------------------------------------------
# ----------------------------------------------------------------------------------------------------------------------

def section_patterns (n_bars, style):
    """
    Bar patterns of a generated section: seed first pattern, most frequent pattern in between, seed last pattern
    (first wins on 1-bar sections).
    """
    if n_bars == 1:
        return [style.first]
    return [style.first] + [style.most_frequent] * (n_bars - 2) + [style.last]


def realize_degree (category, bar, chords, prev_degree = None):
    """
    Concrete degree of a category over the chord of bar, the octave closest to the previous bass degree (lower on
    ties). "Other" is the diatonic step from the root toward the next chord root, the second above the root when the
    chord does not change or at the end of the section.
    """
    chord = chords[bar]
    if category != N.OTHER:
        base = N.chord_tone_degree(chord, category)
    else:
        root = N.chord_root(chord)
        if bar + 1 < len(chords) and chords[bar + 1] != chord:
            up = (N.chord_root(chords[bar + 1]) - root) % 7
            step = 1 if up <= 3 else -1
        else:
            step = 1
        base = (root - 1 + step) % 7 + 1
    candidates = [base, base + 7]
    if prev_degree is None:
        return base
    return min(candidates, key=lambda c: (abs(c - prev_degree), c))


def _rests (start, end):
    pairs = []
    while start < end:
        stop = min(end, (start // N.SLOTS_PER_BAR + 1) * N.SLOTS_PER_BAR)
        pairs.append((N.REST, stop - start))
        start = stop
    return pairs


def generate_bass (chords, style, prev_degree = None):
    """
    Bass line of a section: bar patterns from the style, chord tone categories by Viterbi decoding, each onset
    sustained until the next onset or the end of its bar.
    Parameters
    ----------
    chords : list of int
        Chord of each bar of the section.
    style : bass.BassStyle
    prev_degree : int or None
        Last bass degree before the section (for register continuity).
    Returns
    -------
    notes : list of note.Note
    """
    n_bars = len(chords)
    patterns = section_patterns(n_bars, style)
    starts = [bar * N.SLOTS_PER_BAR + o for bar, p in enumerate(patterns) for o in pattern_onsets(p)]
    total  = n_bars * N.SLOTS_PER_BAR
    if len(starts) == 0:
        return N.notes_from_pairs(_rests(0, total))
    categories = viterbi_bass([s % N.SLOTS_PER_BAR for s in starts], style.matrices)
    pairs = []
    pos = 0
    for i, (start, cat) in enumerate(zip(starts, categories)):
        bar = start // N.SLOTS_PER_BAR
        end = min(starts[i + 1] if i + 1 < len(starts) else total, (bar + 1) * N.SLOTS_PER_BAR)
        pairs += _rests(pos, start)
        prev_degree = realize_degree(cat, bar, chords, prev_degree)
        pairs.append((prev_degree, end - start))
        pos = end
    pairs += _rests(pos, total)
    return N.notes_from_pairs(pairs)
