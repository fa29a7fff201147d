import numpy as np

# Internal imports
from popstyle.songsym import note as N
from popstyle.songsym.note import InputError

# ---------- DTW COSTS ----------
W_PITCH             = 1.0
W_DIRECTION         = 2.0
REST_PITCH_COST     = 12.
REST_DIRECTION_COST = 2.
REST_INSERTION_COST = 10.
# Direction of a frame that is a rest or follows a rest
REST_DELTA = 100.
# Reference pitch of a seed without pitched frames
DEFAULT_REFERENCE_PITCH = 8.
# Direction classes : rest, down, flat, up (direction_distance only depends on these)
REST_CLASS, FLAT_CLASS = 0, 2
DIRECTION_CLASS_DELTAS = np.array([REST_DELTA, -1., 0., 1.])


# ----------------------------------------------------------------------------------------------------------------------
# ------------------------------------------------------- COSTS --------------------------------------------------------
# ----------------------------------------------------------------------------------------------------------------------

def frame_deltas (frames, prev = None):
    """
    Melodic direction prev - p of each frame. First frame has delta 0 (or REST_DELTA if it is a rest) unless prev,
    the frame before the sequence, is given. Rests and frames following a rest get REST_DELTA.
    Parameters
    ----------
    frames : numpy.array of shape (n,) of float
    prev : float or None
    Returns
    -------
    deltas : numpy.array of shape (n,) of float
    """
    frames = np.asarray(frames, dtype=float)
    before = np.empty_like(frames)
    before[1:] = frames[:-1]
    before[:1] = frames[:1] if prev is None else prev
    deltas = before - frames
    deltas[(frames == N.REST) | (before == N.REST)] = REST_DELTA
    return deltas


def pitch_distance (p1, p2):
    r1, r2 = (p1 == N.REST), (p2 == N.REST)
    return np.where(r1 & r2, 0., np.where(r1 | r2, REST_PITCH_COST, np.abs(p1 - p2)))


def direction_distance (d1, d2):
    """
    0 for equal or same-sign directions, 2 for opposite directions or when only one side involves a rest, else 1.
    """
    r1, r2 = (d1 == REST_DELTA), (d2 == REST_DELTA)
    prod = d1 * d2
    pitched = np.where((d1 == d2) | (prod > 0), 0., np.where(prod < 0, 2., 1.))
    return np.where(r1 & r2, 0., np.where(r1 | r2, REST_DIRECTION_COST, pitched))


def substitution_cost (p1, d1, p2, d2):
    return W_PITCH * pitch_distance(p1, p2) + W_DIRECTION * direction_distance(d1, d2)


def direction_class (deltas):
    """
    Index of each direction in DIRECTION_CLASS_DELTAS.
    """
    deltas = np.asarray(deltas, dtype=float)
    return np.where(deltas == REST_DELTA, REST_CLASS, np.sign(deltas).astype(int) + FLAT_CLASS)


def insertion_cost (p, ref):
    p = np.asarray(p, dtype=float)
    return np.where(p == N.REST, REST_INSERTION_COST, np.abs(p - ref))


def reference_pitch (seed_frames):
    """
    Mean pitched degree of seed frames.
    """
    seed_frames = np.asarray(seed_frames, dtype=float)
    pitched = seed_frames[seed_frames != N.REST]
    if len(pitched) == 0:
        return DEFAULT_REFERENCE_PITCH
    return float(pitched.mean())


# ----------------------------------------------------------------------------------------------------------------------
# ---------------------------------------------------- CONTOUR DTW -----------------------------------------------------
# ----------------------------------------------------------------------------------------------------------------------

def _similarity (rows, flat_row):
    """
    Similarity of DTW rows against the flat melody row: the best seed prefix j of each row gives a, the flat melody
    distance to that same prefix gives b, similarity = max(1 - a/b, 0).
    rows : (k, m+1), flat_row : (m+1,)
    """
    j = np.argmin(rows[:, 1:], axis=1) + 1                                                       # (k,)
    a = rows[np.arange(len(rows)), j]                                                            # (k,)
    b = flat_row[j]                                                                              # (k,)
    ratio = np.divide(a, b, out=np.zeros_like(a), where=b > 0)
    sim = np.maximum(1. - ratio, 0.)
    return np.where(b > 0, sim, np.where(a == 0, 1., 0.))


class ContourTracker:
    """
    Incremental DTW of a melody generated left to right against a seed melody, with prefix matching on the seed side.
    Holds the current DTW row of the generated melody and the rows of a flat melody at the seed reference pitch.
    Substitution and insertion costs only depend on the generated pitch and direction class, they are tabulated once
    against the seed frames.
    """
    def __init__(self, seed_frames):
        """
        Parameters
        ----------
        seed_frames : array_like of shape (m,) of int
            Seed pitch per 16th frame (rests = 0).
        """
        seed_frames = np.asarray(seed_frames, dtype=float)
        if seed_frames.ndim != 1 or len(seed_frames) == 0:
            raise InputError("Contour similarity needs a nonempty seed melody.")
        self.seed        = seed_frames                                                           # (m,)
        self.seed_deltas = frame_deltas(seed_frames)                                             # (m,)
        self.ref         = reference_pitch(seed_frames)
        self.cum_ins     = np.concatenate([[0.], np.cumsum(insertion_cost(seed_frames, self.ref))])   # (m+1,)
        # ---- Cost tables ----
        pitches = np.arange(N.N_DEGREES + 1, dtype=float)                                        # (16,)
        self.pitch_costs     = W_PITCH * pitch_distance(pitches[:, np.newaxis], self.seed[np.newaxis, :])  # (16, m)
        self.direction_costs = W_DIRECTION * direction_distance(DIRECTION_CLASS_DELTAS[:, np.newaxis],
                                                                self.seed_deltas[np.newaxis, :])           # (4, m)
        self.ins_costs       = insertion_cost(pitches, self.ref)                                 # (16,)
        # ---- Flat melody ----
        self.flat_sub  = substitution_cost(self.ref, 0., self.seed, self.seed_deltas)            # (m,)
        self.flat_ins  = float(insertion_cost(self.ref, self.ref))
        self.flat_rows = [self.cum_ins.copy()]
        # ---- Generated melody ----
        self.row      = self.cum_ins.copy()
        self.last     = None
        self.n_frames = 0

    def _advance(self, rows, sub, ins):
        """
        DTW rows after one more generated frame.
        rows : (k, m+1), sub : (k, m), ins : (k,) -> (k, m+1)
        """
        A = np.empty_like(rows)
        A[:, 0]  = rows[:, 0] + ins
        A[:, 1:] = np.minimum(rows[:, :-1] + sub, rows[:, 1:] + ins[:, np.newaxis])
        return self.cum_ins + np.minimum.accumulate(A - self.cum_ins, axis=1)

    def _flat_row(self, n_frames):
        """
        DTW row of the flat melody after n_frames frames.
        """
        while len(self.flat_rows) <= n_frames:
            row = self._advance(self.flat_rows[-1][np.newaxis, :], self.flat_sub[np.newaxis, :],
                                np.array([self.flat_ins]))
            self.flat_rows.append(row[0])
        return self.flat_rows[n_frames]

    def _substitutions(self, p):
        """
        Substitution costs of the first frame and of the held frames of notes of pitches p.
        p : (k,) of int -> (k, m), (k, m)
        """
        prev  = p if self.last is None else np.full_like(p, self.last)
        first = direction_class(np.where((p == N.REST) | (prev == N.REST), REST_DELTA, prev - p))
        held  = np.where(p == N.REST, REST_CLASS, FLAT_CLASS)
        return (self.pitch_costs[p] + self.direction_costs[first],
                self.pitch_costs[p] + self.direction_costs[held])

    def push(self, pitch, duration = 1):
        """
        Appends a note (duration frames of pitch) to the generated melody.
        """
        p = np.array([int(pitch)])
        first, held = self._substitutions(p)
        ins = self.ins_costs[p]
        for i in range(int(duration)):
            self.row = self._advance(self.row[np.newaxis, :], first if i == 0 else held, ins)[0]
            self.n_frames += 1
        self.last = int(pitch)

    @property
    def flat_row(self):
        return self._flat_row(self.n_frames)

    def similarity(self):
        """
        Contour similarity of the generated melody so far (1 for an empty melody).
        """
        if self.n_frames == 0:
            return 1.
        return float(_similarity(self.row[np.newaxis, :], self.flat_row)[0])

    def candidate_grid(self, pitches, max_duration):
        """
        Similarity after appending each candidate note.
        Parameters
        ----------
        pitches : array_like of shape (k,) of int
            Candidate pitches (rests = 0).
        max_duration : int
        Returns
        -------
        similarities : numpy.array of shape (k, max_duration) of float
            [i, d-1] : similarity after appending pitches[i] for d frames.
        """
        p    = np.asarray(pitches, dtype=int)
        rows = np.tile(self.row, (len(p), 1))                                                    # (k, m+1)
        first, held = self._substitutions(p)                                                     # (k, m)
        ins  = self.ins_costs[p]                                                                 # (k,)
        out  = np.empty((len(p), max_duration))
        for i in range(max_duration):
            rows = self._advance(rows, first if i == 0 else held, ins)
            out[:, i] = _similarity(rows, self._flat_row(self.n_frames + i + 1))
        return out


def contour_similarity (generated_frames, seed_frames):
    """
    DTW contour similarity of a generated melody against a seed melody, matching only the best seed prefix and
    normalizing by the distance of a flat melody at the mean seed pitch.
    Parameters
    ----------
    generated_frames : array_like of shape (n,) of int
        Generated pitch per 16th frame (rests = 0).
    seed_frames : array_like of shape (m,) of int
    Returns
    -------
    similarity : float
        In [0, 1].
    """
    tracker = ContourTracker(seed_frames)
    for p in np.asarray(generated_frames):
        tracker.push(p, 1)
    return tracker.similarity()


# ----------------------------------------------------------------------------------------------------------------------
# ------------------------------------------------------- RHYTHM -------------------------------------------------------
# ----------------------------------------------------------------------------------------------------------------------

def rhythm_similarity (a_onsets, b_onsets, length):
    """
    Proportion of 16th frames in [0, length) where both or neither onset sets hold an onset.
    Parameters
    ----------
    a_onsets, b_onsets : iterable of int
    length : int
    Returns
    -------
    similarity : float
    """
    assert length > 0, "length must be > 0"
    a = np.zeros(length, dtype=bool)
    b = np.zeros(length, dtype=bool)
    a[[t for t in a_onsets if 0 <= t < length]] = True
    b[[t for t in b_onsets if 0 <= t < length]] = True
    return float((a == b).sum()) / length


def onset_mask (notes, length = None):
    """
    Onset flags per 16th frame of the pitched notes of a note sequence.
    """
    total = sum(n.duration for n in notes)
    mask = np.zeros(total if length is None else length, dtype=bool)
    pos = 0
    for n in notes:
        if not n.is_rest and pos < len(mask):
            mask[pos] = True
        pos += n.duration
    return mask


class RhythmTracker:
    """
    Onset agreement between a melody generated left to right and target onsets (tiled cyclically when shorter than
    the generated section).
    """
    def __init__(self, target_onsets, length):
        """
        Parameters
        ----------
        target_onsets : array_like of shape (m,) of bool
            Target onset flag per 16th frame.
        length : int
            Number of frames of the generated section.
        """
        target_onsets = np.asarray(target_onsets, dtype=bool)
        if len(target_onsets) == 0:
            raise InputError("Rhythm similarity needs a nonempty target.")
        n = length + N.MAX_DURATION
        self.target     = np.resize(target_onsets, n)                                           # (n,)
        # Cumulative count of target non-onsets
        self.cum_silent = np.concatenate([[0], np.cumsum(~self.target)])                        # (n+1,)
        self.agree      = 0
        self.pos        = 0

    def push(self, duration, is_rest):
        t = self.pos
        self.agree += int(self.target[t] == (not is_rest))
        self.agree += int(self.cum_silent[t + duration] - self.cum_silent[t + 1])
        self.pos   += int(duration)

    def similarity(self):
        return 1. if self.pos == 0 else self.agree / self.pos

    def candidate_grid(self, max_duration):
        """
        Similarity after appending a note of each duration.
        Returns
        -------
        similarities : numpy.array of shape (2, max_duration) of float
            Row 0 for a pitched note, row 1 for a rest.
        """
        t = self.pos
        d = np.arange(1, max_duration + 1)                                                       # (max_duration,)
        held = self.cum_silent[t + d] - self.cum_silent[t + 1]                                   # (max_duration,)
        onset_agree = np.array([int(self.target[t]), int(not self.target[t])])[:, np.newaxis]   # (2, 1)
        return (self.agree + onset_agree + held[np.newaxis, :]) / (t + d)[np.newaxis, :]
