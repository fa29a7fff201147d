import numpy as np
from abc import ABC, abstractmethod

# Internal imports
from popstyle.songsym import note as N
from popstyle.songsym import stats as Stats

# ---------- CANDIDATE GRID ----------
# Rows 0..14 are degrees 1..15, row 15 is a rest ; columns are durations 1..16
N_PITCH_ROWS  = N.N_DEGREES + 1
REST_ROW      = N.N_DEGREES
GRID_PITCHES  = np.array(list(range(1, N.N_DEGREES + 1)) + [N.REST])                  # (16,)
GRID_DURATIONS = np.arange(1, N.MAX_DURATION + 1)                                      # (16,)
_P = np.arange(1, N.N_DEGREES + 1)[:, np.newaxis]                                      # (15, 1)
_D = GRID_DURATIONS[np.newaxis, :]                                                     # (1, 16)

# ---------- RULE CONSTANTS ----------
# Non-chord tone downbeat rule scale
DOWNBEAT_SCALE = 1.4
# Interval and harmony heuristics
UP_LEAP         = 4
DOWN_STEP       = 2
DIRECTION_BOOST = 1.2
HARMONY_SPAN    = 4.
# Final note of sections ending on a perfect authentic cadence
FINAL_MIN_DURATION = 4
# Rest policies: rest row gets the mean over pitches, 1, or its own rating
REST_POLICIES = ("mean", "one", "own")


# ----------------------------------------------------------------------------------------------------------------------
# ---------------------------------------------------- MELODY STYLE ----------------------------------------------------
# ----------------------------------------------------------------------------------------------------------------------

def smooth_pos_dur (pos_dur_probs):
    """
    Onset position smoothing: row onset_p sums the seed rows j congruent to onset_p modulo 2, 4, 8 and 16, weighted
    by 2^i/16 for modulo 2^i.
    Parameters
    ----------
    pos_dur_probs : numpy.array of shape (16, 16) of float
        P(d | onset position) rows.
    Returns
    -------
    smoothed : numpy.array of shape (16, 16) of float
    """
    positions = np.arange(N.SLOTS_PER_BAR)
    smoothed = np.zeros_like(pos_dur_probs)
    for i in range(1, 5):
        m = 2 ** i
        congruent = (positions[:, np.newaxis] % m) == (positions[np.newaxis, :] % m)            # (16, 16)
        smoothed += (m / 16.) * (congruent.astype(float) @ pos_dur_probs)
    return smoothed


class MelodyStyle:
    """
    Statistics a melody is generated (or scored) against.
    Attributes
    ----------
    seed : stats.StatTables
        Seed tables (raw counts).
    general : stats.StatTables
    alpha : float
    blended : stats.StatTables
    tempo_bucket : int
    span_allowed : bool
        Seed has notes crossing a barline.
    pos_seed : numpy.array of shape (16, 16) of float
        Smoothed seed onset position / duration weights.
    name : str
    """
    def __init__(self, seed, general, alpha, tempo = 120., name = None):
        self.seed         = seed
        self.general      = general
        self.alpha        = Stats.check_alpha(alpha)
        self.blended      = Stats.blend(seed, general, self.alpha)
        self.tempo_bucket = Stats.tempo_bucket(tempo)
        self.span_allowed = bool(seed.counts["span_notes"][1] > 0)
        self.pos_seed     = smooth_pos_dur(seed.probs["pos_dur"])
        self.name         = seed.name if name is None else name
        self._fallback    = {}

    def seed_or_general(self, table):
        """
        Seed probabilities with empty seed rows taken from general ones.
        """
        if table not in self._fallback:
            self._fallback[table] = np.where(self.seed.empty[table][..., np.newaxis], self.general.probs[table],
                                             self.seed.probs[table])
        return self._fallback[table]

    def __repr__(self):
        return "MelodyStyle(%s, alpha = %g)" % (self.name, self.alpha)


class RatingContext:
    """
    Context of the next note of a section melody.
    Attributes
    ----------
    style : rating.MelodyStyle
    pos : int
        Onset of the next note in 16ths from the section start.
    section_frames : int
    chord : int
        Chord of the bar where the next note starts.
    next_chord : int or None
        Chord of the following bar.
    prev_note : note.Note or None
        Previous note (pitched or rest) in the section.
    prev_pitched : note.Note or None
        Previous pitched note in the section.
    is_pac : bool
        Section ends on a perfect authentic cadence.
    """
    def __init__(self, style, pos, section_frames, chord, next_chord = None, prev_note = None, prev_pitched = None,
                 is_pac = False):
        self.style          = style
        self.pos            = int(pos)
        self.section_frames = int(section_frames)
        self.chord          = int(chord)
        self.next_chord     = next_chord
        self.prev_note      = prev_note
        self.prev_pitched   = prev_pitched
        self.is_pac         = bool(is_pac)

    @property
    def onset(self):
        """Position in bar."""
        return self.pos % N.SLOTS_PER_BAR

    @property
    def remaining(self):
        return self.section_frames - self.pos

    @property
    def in_last_bar(self):
        return self.pos >= self.section_frames - N.SLOTS_PER_BAR

    @property
    def alpha(self):
        return self.style.alpha

    def __repr__(self):
        return "RatingContext(pos = %i/%i, chord = %s)" % (self.pos, self.section_frames, N.CHORD_NAMES[self.chord])


def make_context (style, chords, notes, is_pac = False):
    """
    Context after a section prefix.
    Parameters
    ----------
    style : rating.MelodyStyle
    chords : list of int
        Section chords (one per bar).
    notes : list of note.Note
        Notes of the section generated so far.
    is_pac : bool
    Returns
    -------
    ctx : rating.RatingContext
    """
    pos = sum(n.duration for n in notes)
    bar = min(pos // N.SLOTS_PER_BAR, len(chords) - 1)
    pitched = [n for n in notes if not n.is_rest]
    return RatingContext(style          = style,
                         pos            = pos,
                         section_frames = len(chords) * N.SLOTS_PER_BAR,
                         chord          = chords[bar],
                         next_chord     = chords[bar + 1] if bar + 1 < len(chords) else None,
                         prev_note      = notes[-1] if len(notes) > 0 else None,
                         prev_pitched   = pitched[-1] if len(pitched) > 0 else None,
                         is_pac         = is_pac)


# ----------------------------------------------------------------------------------------------------------------------
# -------------------------------------------------- RATING FUNCTIONS --------------------------------------------------
# ----------------------------------------------------------------------------------------------------------------------
# Functions accept scalars or broadcastable arrays of pitches (1..15) and durations (1..16).

def rate_pitch_freq (p, ctx):
    return ctx.style.blended.pitch_freq[np.asarray(p) - 1]


def rate_pitch_harmony (p, c, ctx):
    return ctx.style.blended.pitch_given_chord[c, np.asarray(p) - 1]


def rate_interval_freq (p, ctx):
    p = np.asarray(p)
    if ctx.prev_pitched is None:
        return np.ones(p.shape)
    return ctx.style.blended.interval_freq[p - ctx.prev_pitched.pitch + N.MAX_INTERVAL]


def rate_interval_harmony (p, prev_p, c, ctx, up_leap = UP_LEAP, down_step = DOWN_STEP,
                           direction_boost = DIRECTION_BOOST, harmony_span = HARMONY_SPAN):
    """
    Hand-crafted interval rating: smaller intervals are more likely (1/(1+|delta|)), large upward leaps and small
    downward steps are favoured, larger intervals should land on pitches that fit the chord.
    """
    p = np.asarray(p)
    if prev_p is None:
        return np.ones(p.shape)
    delta = p - prev_p
    size  = np.abs(delta)
    base  = 1. / (1. + size)
    direction = np.where((delta > up_leap) | ((delta < 0) & (delta >= -down_step)), direction_boost, 1.)
    harmony   = 0.5 + rate_pitch_harmony(p, c, ctx) * np.minimum(size / harmony_span, 1.)
    return base * direction * harmony


def rate_downbeat (p, d, c, ctx, scale = DOWNBEAT_SCALE):
    """
    Notes starting on beat 1 or 3: 1 for chord tones, (1 - alpha) * scale / d + alpha * P_non,seed(d) otherwise.
    Notes starting elsewhere: 1.
    """
    p, d = np.broadcast_arrays(np.asarray(p), np.asarray(d))
    if ctx.onset not in N.DOWNBEATS:
        return np.ones(p.shape)
    p_non = ctx.style.seed_or_general("nonchord_downbeat")[d - 1, 1]
    non_chord = (1. - ctx.alpha) * scale / d + ctx.alpha * p_non
    return np.where(N.is_chord_tone(p, c), 1., non_chord)


def rate_dur_freq (d, ctx):
    """
    alpha * P_seed(d) + (1 - alpha) * P_general(d | tempo bucket).
    """
    d = np.asarray(d)
    style = ctx.style
    general = style.general.probs["dur_freq_by_tempo"][style.tempo_bucket]
    if style.general.empty["dur_freq_by_tempo"][style.tempo_bucket]:
        general = style.general.probs["dur_freq"]
    if style.seed.empty["dur_freq"]:
        return general[d - 1]
    return (1. - ctx.alpha) * general[d - 1] + ctx.alpha * style.seed.probs["dur_freq"][d - 1]


def rate_dur_trans (d1, d2, ctx):
    """
    P(d1 | d2), d2 being the duration of the previous note (None for the first note).
    """
    d1 = np.asarray(d1)
    if d2 is None:
        return np.ones(d1.shape)
    return ctx.style.blended.dur_trans[d2 - 1, d1 - 1]


def rate_rest_dur (d, ctx):
    """
    Rest of duration d: 1 if it starts in the last bar of the section, alpha * P_seed(d) + (1 - alpha) / d otherwise.
    """
    d = np.asarray(d)
    if ctx.in_last_bar:
        return np.ones(d.shape)
    return ctx.alpha * ctx.style.seed.probs["rest_dur"][d - 1] + (1. - ctx.alpha) / d


def rate_pos_dur (d, onset, ctx):
    """
    alpha * smoothed seed P(d | onset) + (1 - alpha) * rule, the rule banning even durations on odd onsets.
    """
    d = np.asarray(d)
    rule = np.where((onset % 2 == 1) & (d % 2 == 0), 0., 1.)
    return ctx.alpha * ctx.style.pos_seed[onset, d - 1] + (1. - ctx.alpha) * rule


def rate_harmony_dur (p, d, c, ctx):
    """
    ((P_har(p|c) - 0.5) * log2(d / 4) + 1) / 2 : long notes favour pitches that fit the chord.
    """
    p_har = rate_pitch_harmony(p, c, ctx)
    return ((p_har - 0.5) * np.log2(np.asarray(d) / 4.) + 1.) / 2.


def rate_interval_dur (delta, d1, ctx):
    """
    P(delta | d1), d1 being the duration of the previous pitched note (None for the first one).
    """
    delta = np.asarray(delta)
    if d1 is None:
        return np.ones(delta.shape)
    return ctx.style.blended.interval_given_dur[d1 - 1, delta + N.MAX_INTERVAL]


def rate_rest_freq (is_rest, ctx):
    return ctx.style.blended.rest_freq[np.asarray(is_rest, dtype=int)]


# ---------- CONSTRAINTS ----------

def allow_span_chord_change (note, ctx):
    """
    Notes may cross a barline (span two chords) only if the seed has such notes, rests never do.
    Parameters
    ----------
    note : note.Note
        Candidate note, onset in 16ths from the section start.
    ctx : rating.RatingContext
    """
    spans = (note.onset % N.SLOTS_PER_BAR) + note.duration > N.SLOTS_PER_BAR
    if not spans:
        return True
    return (not note.is_rest) and ctx.style.span_allowed


class SectionEnding:
    """
    Final note constraint: pitch among pitches, duration >= min_duration.
    """
    def __init__(self, pitches = N.TONICS, min_duration = FINAL_MIN_DURATION):
        self.pitches      = tuple(pitches)
        self.min_duration = int(min_duration)

    def allows(self, pitch, duration):
        return pitch in self.pitches and duration >= self.min_duration

    def __repr__(self):
        return "SectionEnding(pitches = %s, min_duration = %i)" % (self.pitches, self.min_duration)


def force_section_ending (ctx):
    """
    Constraint on the final note of sections ending on a perfect authentic cadence, None for other sections.
    """
    if not ctx.is_pac:
        return None
    return SectionEnding()


# ----------------------------------------------------------------------------------------------------------------------
# ------------------------------------------------ INDIVIDUAL RATINGS --------------------------------------------------
# ----------------------------------------------------------------------------------------------------------------------

class Rating (ABC):
    """
    Abstract rating: nonnegative weights of every candidate (pitch or rest, duration) next note.
    """
    rest_policy = "mean"

    def __init__(self, style):
        """
        Parameters
        ----------
        style : rating.MelodyStyle
        """
        self.style = style

    @abstractmethod
    def pitched(self, ctx):
        """
        Weights of pitched candidates, broadcastable to (15, 16).
        """
        raise NotImplementedError

    def rest(self, ctx):
        """
        Weights of rest candidates, broadcastable to (16,) (rest_policy "own" only).
        """
        raise NotImplementedError

    def __call__(self, ctx):
        """
        Returns
        -------
        weights : numpy.array of shape (16, 16) of float
            [pitch row, duration - 1], see rating.GRID_PITCHES.
        """
        grid = np.ones((N_PITCH_ROWS, N.MAX_DURATION))
        grid[:REST_ROW] = self.pitched(ctx)
        if self.rest_policy == "mean":
            grid[REST_ROW] = grid[:REST_ROW].mean(axis=0)
        elif self.rest_policy == "own":
            grid[REST_ROW] = self.rest(ctx)
        return grid

    def __repr__(self):
        return type(self).__name__


class PitchFreqRating (Rating):
    def pitched(self, ctx):
        return rate_pitch_freq(_P, ctx)


class PitchHarmonyRating (Rating):
    def pitched(self, ctx):
        return rate_pitch_harmony(_P, ctx.chord, ctx)


class IntervalFreqRating (Rating):
    def pitched(self, ctx):
        return rate_interval_freq(_P, ctx)


class IntervalHarmonyRating (Rating):
    """
    Hand-crafted interval / harmony heuristics.
    """
    def __init__(self, style, up_leap = UP_LEAP, down_step = DOWN_STEP, direction_boost = DIRECTION_BOOST,
                 harmony_span = HARMONY_SPAN):
        Rating.__init__(self, style)
        assert direction_boost > 0, "direction_boost must be > 0"
        assert harmony_span > 0,    "harmony_span must be > 0"
        self.args = dict(up_leap = up_leap, down_step = down_step, direction_boost = direction_boost,
                         harmony_span = harmony_span)

    def pitched(self, ctx):
        prev_p = None if ctx.prev_pitched is None else ctx.prev_pitched.pitch
        return rate_interval_harmony(_P, prev_p, ctx.chord, ctx, **self.args)

    def __repr__(self):
        return "IntervalHarmonyRating(%s)" % self.args


class DownbeatRating (Rating):
    """
    Non-chord tones on beats 1 and 3.
    """
    rest_policy = "one"

    def __init__(self, style, scale = DOWNBEAT_SCALE):
        Rating.__init__(self, style)
        try: scale = float(scale)
        except (TypeError, ValueError): raise TypeError("scale must be cast-able to a float")
        self.scale = scale

    def pitched(self, ctx):
        return rate_downbeat(_P, _D, ctx.chord, ctx, scale = self.scale)


class DurFreqRating (Rating):
    rest_policy = "one"

    def pitched(self, ctx):
        return rate_dur_freq(_D, ctx)


class DurTransRating (Rating):
    rest_policy = "own"

    def _weights(self, ctx):
        d2 = None if ctx.prev_note is None else ctx.prev_note.duration
        return rate_dur_trans(GRID_DURATIONS, d2, ctx)

    def pitched(self, ctx):
        return self._weights(ctx)

    def rest(self, ctx):
        return self._weights(ctx)


class RestDurRating (Rating):
    rest_policy = "own"

    def pitched(self, ctx):
        return 1.

    def rest(self, ctx):
        return rate_rest_dur(GRID_DURATIONS, ctx)


class PosDurRating (Rating):
    rest_policy = "one"

    def pitched(self, ctx):
        return rate_pos_dur(_D, ctx.onset, ctx)


class HarmonyDurRating (Rating):
    def pitched(self, ctx):
        return rate_harmony_dur(_P, _D, ctx.chord, ctx)


class IntervalDurRating (Rating):
    def pitched(self, ctx):
        if ctx.prev_pitched is None:
            return 1.
        return rate_interval_dur(_P - ctx.prev_pitched.pitch, ctx.prev_pitched.duration, ctx)


class RestFreqRating (Rating):
    rest_policy = "own"

    def pitched(self, ctx):
        return rate_rest_freq(False, ctx)

    def rest(self, ctx):
        return rate_rest_freq(True, ctx)


# ----------------------------------------------------------------------------------------------------------------------
# ------------------------------------------------ INDIVIDUAL RATINGS DICT ---------------------------------------------
# ----------------------------------------------------------------------------------------------------------------------

# Ratings that don't take additional arguments
RATINGS_WO_ARGS = {
    "pitch_freq"    : PitchFreqRating,
    "pitch_harmony" : PitchHarmonyRating,
    "interval_freq" : IntervalFreqRating,
    "dur_freq"      : DurFreqRating,
    "dur_trans"     : DurTransRating,
    "rest_dur"      : RestDurRating,
    "pos_dur"       : PosDurRating,
    "harmony_dur"   : HarmonyDurRating,
    "interval_dur"  : IntervalDurRating,
    "rest_freq"     : RestFreqRating,
}

# Ratings that take additional arguments
RATINGS_W_ARGS = {
    "interval_harmony" : IntervalHarmonyRating,
    "downbeat"         : DownbeatRating,
}

# All ratings
RATINGS_DICT = {}
RATINGS_DICT.update(RATINGS_WO_ARGS)
RATINGS_DICT.update(RATINGS_W_ARGS)

# Full battery
DEFAULT_RATINGS_CONFIG = [
    ("pitch_freq"       , None),
    ("pitch_harmony"    , None),
    ("interval_freq"    , None),
    ("interval_harmony" , {"up_leap": UP_LEAP, "down_step": DOWN_STEP, "direction_boost": DIRECTION_BOOST,
                           "harmony_span": HARMONY_SPAN}),
    ("downbeat"         , {"scale": DOWNBEAT_SCALE}),
    ("dur_freq"         , None),
    ("dur_trans"        , None),
    ("rest_dur"         , None),
    ("pos_dur"          , None),
    ("harmony_dur"      , None),
    ("interval_dur"     , None),
    ("rest_freq"        , None),
]

# ----------------------------------------------------------------------------------------------------------------------
# -------------------------------------------------- RATING COLLECTION -------------------------------------------------
# ----------------------------------------------------------------------------------------------------------------------

def make_RatingCollection (style, ratings_config = None):
    """
    Makes RatingCollection object from arguments.
    Parameters
    ----------
    style : rating.MelodyStyle
    ratings_config : list of couples (str : dict) or None
        List of ratings. List containing couples with rating name as first item in couple (see rating.RATINGS_DICT for
        list of available ratings) and additional arguments (besides style) to be passed to ratings as second item of
        couple, leave None for ratings that do not require arguments. None for the full battery.
    Returns
    -------
    rating.RatingCollection
    """
    if ratings_config is None:
        ratings_config = DEFAULT_RATINGS_CONFIG
    type_err_msg = "ratings_config should be a list containing couples with rating name string as first item in " \
                   "couple and additional arguments to be passed to ratings dictionary as second item of couple, " \
                   "leave None for ratings that do not require arguments."
    assert isinstance(ratings_config, (list, tuple)), type_err_msg
    ratings = []
    for config in ratings_config:
        # --- TYPE ASSERTIONS ---
        assert len(config) == 2, type_err_msg
        assert isinstance(config[0], str), type_err_msg
        assert isinstance(config[1], dict) or config[1] is None, type_err_msg
        name, args = config[0], config[1]
        # --- ASSERTIONS ---
        assert name in RATINGS_DICT, "Rating %s is not in the list of available ratings :\n %s" % (name, RATINGS_DICT.keys())
        if name in RATINGS_W_ARGS:
            assert args is not None, "Arguments for making rating %s were not given." % (name)
        rating_args = args if name in RATINGS_W_ARGS else {}
        ratings.append((name, RATINGS_DICT[name](style = style, **rating_args)))
    return RatingCollection(style = style, ratings = ratings)


class RatingCollection:
    """
    Collection of rating.Rating, returns the element-wise product of constituent ratings.
    """
    def __init__(self, style, ratings = None):
        """
        Parameters
        ----------
        style : rating.MelodyStyle
        ratings : list of (str, rating.Rating)
        """
        self.style   = style
        self.ratings = [] if ratings is None else list(ratings)

    @property
    def names(self):
        return [name for name, _ in self.ratings]

    def breakdown(self, ctx):
        """
        Weights of each constituent rating.
        Returns
        -------
        weights : dict of str -> numpy.array of shape (16, 16) of float
        """
        return {name: rating(ctx) for name, rating in self.ratings}

    def __call__(self, ctx):
        """
        Returns
        -------
        weights : numpy.array of shape (16, 16) of float
        """
        res = np.ones((N_PITCH_ROWS, N.MAX_DURATION))
        for _, rating in self.ratings:
            res = np.multiply(res, rating(ctx))
        return res

    def __repr__(self):
        repr = "RatingCollection (%s):" % self.style
        for name, rating in self.ratings:
            repr += "\n- %s" % (rating)
        return repr


def grid_index (pitch, duration):
    """
    (row, column) of a note in the candidate grid.
    """
    row = REST_ROW if pitch == N.REST else pitch - 1
    return row, duration - 1
