import warnings
from collections import namedtuple

import numpy as np
from tqdm import tqdm

# Internal imports
from popstyle.songsym import note as N
from popstyle.songsym import rating as R
from popstyle.songsym import contour as Contour

# Default rhythm gate
RHYTHM_THRESHOLD = 0.6
# Contour similarity enters weights as max(similarity, CONTOUR_FLOOR)
CONTOUR_FLOOR = 0.05
# Weight given to notes emitted by the fallback, and floor of allowed tonic endings
FALLBACK_WEIGHT = 1e-6
# Number of candidate melodies per section
N_CANDIDATES = 30
# Duration of fallback notes
FALLBACK_DURATION = 4

SHOW_PROGRESS_BAR = False

# ---------- TYPES ----------
# frames : pitch per 16th of the target melody, onsets : onset flag per 16th
MelodyTargets = namedtuple("MelodyTargets", ["frames", "onsets"])
# targets : MelodyTargets, None (no targets) or int (generated melody of an earlier section)
SectionPlan   = namedtuple("SectionPlan", ["chords", "ratings", "targets", "is_pac"])


def targets_from_notes (notes):
    """
    Contour and rhythm targets of a melody.
    """
    notes = list(notes)
    return MelodyTargets(frames = np.asarray(notes_frames(notes)), onsets = Contour.onset_mask(notes))


def notes_frames (notes):
    frames = []
    for n in notes:
        frames += [n.pitch] * n.duration
    return frames


class CandidateMelody:
    """
    Section melody with its rating.
    Attributes
    ----------
    notes : list of note.Note
    log_weights : numpy.array of shape (n_notes,) of float
        Log of the weight each note was drawn with.
    n_fallbacks : int
        Number of notes emitted by the fallback.
    n_relaxed : int
        Number of steps where the rhythm gate was relaxed.
    """
    def __init__(self, notes, log_weights, n_fallbacks = 0, n_relaxed = 0):
        self.notes       = notes
        self.log_weights = np.asarray(log_weights, dtype=float)
        self.n_fallbacks = n_fallbacks
        self.n_relaxed   = n_relaxed

    @property
    def score(self):
        """Mean per-note log-weight."""
        return float(self.log_weights.mean())

    @property
    def n_frames(self):
        return sum(n.duration for n in self.notes)

    def __repr__(self):
        return "CandidateMelody(%i notes, score = %.4f)" % (len(self.notes), self.score)


# ----------------------------------------------------------------------------------------------------------------------
# ------------------------------------------------------ SAMPLER -------------------------------------------------------
# ----------------------------------------------------------------------------------------------------------------------

def validity_mask (ctx, ending = None):
    """
    Candidate notes that fit the section: no overshoot of the section end, rests never cross a barline, pitched
    notes cross barlines only if the seed does, and sections with an ending constraint never leave a gap shorter
    than the final note and end with an allowed final note.
    Parameters
    ----------
    ctx : rating.RatingContext
    ending : rating.SectionEnding or None
    Returns
    -------
    mask : numpy.array of shape (16, 16) of bool
    """
    d       = R.GRID_DURATIONS
    r_after = ctx.remaining - d                                                                  # (16,)
    mask    = np.tile(r_after >= 0, (R.N_PITCH_ROWS, 1))                                         # (16, 16)
    spans   = ctx.onset + d > N.SLOTS_PER_BAR
    mask[R.REST_ROW] &= ~spans
    if not ctx.style.span_allowed:
        mask[:R.REST_ROW] &= ~spans
    if ending is not None:
        mask &= ~((r_after > 0) & (r_after < ending.min_duration))
        final   = (r_after == 0)
        allowed = np.isin(R.GRID_PITCHES, ending.pitches)[:, np.newaxis] & (d >= ending.min_duration)[np.newaxis, :]
        mask[:, final] &= allowed[:, final]
    return mask


def _fallback_note (ctx, mask, ending):
    """
    Quarter chord tone nearest the previous pitch, or the tonic filling the last bar of sections with an ending
    constraint.
    """
    prev = 8 if ctx.prev_pitched is None else ctx.prev_pitched.pitch
    if ending is not None and ctx.in_last_bar:
        pitch = min(ending.pitches, key=lambda p: (abs(p - prev), p))
        return pitch, ctx.remaining
    root = N.chord_root(ctx.chord)
    options = [p for p in range(root, N.N_DEGREES + 1, 7)]
    pitch = min(options, key=lambda p: (abs(p - prev), p))
    row = mask[pitch - 1]
    valid = np.flatnonzero(row) + 1
    if len(valid) == 0:
        # Shortest note always fits outside sections with an ending constraint
        return pitch, 1
    duration = int(valid[np.argmin(np.abs(valid - FALLBACK_DURATION))])
    return pitch, duration


def note_weights (ctx, ratings, contour = None, rhythm = None, rhythm_threshold = RHYTHM_THRESHOLD,
                  contour_floor = CONTOUR_FLOOR):
    """
    Weights of every candidate next note: product of ratings times contour factor, masked by validity constraints
    and by the rhythm gate.
    Parameters
    ----------
    ctx : rating.RatingContext
    ratings : rating.RatingCollection
    contour : contour.ContourTracker or None
    rhythm : contour.RhythmTracker or None
    rhythm_threshold : float
    contour_floor : float
    Returns
    -------
    weights, ungated : numpy.array of shape (16, 16) of float, numpy.array of shape (16, 16) of float
        Gated weights and weights without the rhythm gate.
    """
    ending = R.force_section_ending(ctx)
    mask = validity_mask(ctx, ending)
    w = np.where(mask, ratings(ctx), 0.)
    if contour is not None:
        # Contour similarity of notes that can still be drawn only
        rows = np.flatnonzero(w.any(axis=1))
        if len(rows) > 0:
            n_cols = int(np.flatnonzero(w.any(axis=0))[-1]) + 1
            sim = contour.candidate_grid(R.GRID_PITCHES[rows], n_cols)
            w[rows, :n_cols] *= np.maximum(sim, contour_floor)
    if ending is not None and ctx.remaining <= N.MAX_DURATION:
        # Allowed final notes stay reachable
        col = ctx.remaining - 1
        w[:, col] = np.where(mask[:, col], np.maximum(w[:, col], FALLBACK_WEIGHT), w[:, col])
    if rhythm is None:
        return w, w
    sim  = rhythm.candidate_grid(N.MAX_DURATION)                                                 # (2, 16)
    gate = np.empty((R.N_PITCH_ROWS, N.MAX_DURATION), dtype=bool)
    gate[:R.REST_ROW] = sim[0] >= rhythm_threshold
    gate[R.REST_ROW]  = sim[1] >= rhythm_threshold
    return np.where(gate, w, 0.), w


def sample_next_note (weights, rng):
    """
    Weighted random choice of a candidate note.
    Returns
    -------
    pitch, duration : int, int
    """
    flat = weights.ravel()
    idx  = int(rng.choice(len(flat), p = flat / flat.sum()))
    row, col = divmod(idx, N.MAX_DURATION)
    return int(R.GRID_PITCHES[row]), col + 1


def sample_section_melody (chords, ratings, rng, targets = None, is_pac = None, rhythm_threshold = RHYTHM_THRESHOLD,
                           contour_floor = CONTOUR_FLOOR):
    """
    Samples a section melody note by note, each note drawn with probability proportional to its weight.
    Parameters
    ----------
    chords : list of int
        Section chords (one per bar).
    ratings : rating.RatingCollection
    rng : numpy.random.Generator
    targets : melody.MelodyTargets or None
        Contour and rhythm targets, None to generate without.
    is_pac : bool or None
        Section ends on a perfect authentic cadence (computed from chords if None).
    rhythm_threshold : float
    contour_floor : float
    Returns
    -------
    melody : melody.CandidateMelody
    """
    assert len(chords) >= 1, "Sections must have at least one bar."
    if is_pac is None:
        is_pac = len(chords) >= 2 and tuple(chords[-2:]) == (N.DOMINANT_CHORD, N.TONIC_CHORD)
    section_frames = len(chords) * N.SLOTS_PER_BAR
    contour = rhythm = None
    if targets is not None:
        contour = Contour.ContourTracker(targets.frames)
        rhythm  = Contour.RhythmTracker(targets.onsets, section_frames)

    notes, log_weights = [], []
    n_fallbacks = n_relaxed = 0
    while sum(n.duration for n in notes) < section_frames:
        ctx = R.make_context(ratings.style, chords, notes, is_pac = is_pac)
        w, ungated = note_weights(ctx, ratings, contour, rhythm, rhythm_threshold, contour_floor)
        if w.sum() <= 0 and ungated.sum() > 0:
            n_relaxed += 1
            w = ungated
        if w.sum() > 0:
            pitch, duration = sample_next_note(w, rng)
            weight = w[R.grid_index(pitch, duration)]
        else:
            n_fallbacks += 1
            ending = R.force_section_ending(ctx)
            pitch, duration = _fallback_note(ctx, validity_mask(ctx, ending), ending)
            weight = FALLBACK_WEIGHT
        notes.append(N.Note(pitch, duration, ctx.onset))
        log_weights.append(np.log(weight))
        if contour is not None:
            contour.push(pitch, duration)
            rhythm.push(duration, pitch == N.REST)
    if n_fallbacks > 0:
        warnings.warn("%i note(s) emitted by the fallback (no candidate note with positive weight)." % n_fallbacks)
    return CandidateMelody(notes, log_weights, n_fallbacks = n_fallbacks, n_relaxed = n_relaxed)


# ----------------------------------------------------------------------------------------------------------------------
# ------------------------------------------------- CANDIDATE SELECTION ------------------------------------------------
# ----------------------------------------------------------------------------------------------------------------------

def best_of (chords, ratings, n_candidates, seed, targets = None, is_pac = None, rhythm_threshold = RHYTHM_THRESHOLD,
             contour_floor = CONTOUR_FLOOR):
    """
    Samples n_candidates section melodies on independent streams spawned from seed and returns the one with the best
    mean per-note log-weight (earliest candidate on ties).
    Returns
    -------
    best, candidates : melody.CandidateMelody, list of melody.CandidateMelody
    """
    assert n_candidates >= 1, "n_candidates must be >= 1"
    streams = np.random.SeedSequence(seed).spawn(n_candidates)
    if SHOW_PROGRESS_BAR:
        streams = tqdm(streams, desc="candidates", leave=False)
    candidates = [sample_section_melody(chords, ratings, np.random.default_rng(stream), targets = targets,
                                        is_pac = is_pac, rhythm_threshold = rhythm_threshold,
                                        contour_floor = contour_floor)
                  for stream in streams]
    scores = np.array([c.score for c in candidates])
    return candidates[int(np.argmax(scores))], candidates


def generate_melody (plans, n_candidates = N_CANDIDATES, rng = None, rhythm_threshold = RHYTHM_THRESHOLD,
                     contour_floor = CONTOUR_FLOOR):
    """
    Best candidate melody of each section.
    Parameters
    ----------
    plans : list of melody.SectionPlan
        Sections in order, integer targets refer to the melody generated for an earlier section.
    n_candidates : int
    rng : numpy.random.Generator or None
    Returns
    -------
    melodies, candidates : list of melody.CandidateMelody, list of list of melody.CandidateMelody
    """
    rng = np.random.default_rng(0) if rng is None else rng
    melodies, candidates = [], []
    for i, plan in enumerate(plans):
        targets = plan.targets
        if isinstance(targets, (int, np.integer)):
            assert 0 <= targets < i, "Section %i can only refer to an earlier section." % i
            targets = targets_from_notes(melodies[targets].notes)
        best, all_candidates = best_of(plan.chords, plan.ratings, n_candidates, int(rng.integers(2**63)),
                                       targets = targets, is_pac = plan.is_pac, rhythm_threshold = rhythm_threshold,
                                       contour_floor = contour_floor)
        melodies.append(best)
        candidates.append(all_candidates)
    return melodies, candidates
