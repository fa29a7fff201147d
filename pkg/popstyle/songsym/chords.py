import warnings
import numpy as np

# Internal imports
from popstyle.songsym import note as N
from popstyle.songsym import stats as Stats

# Seed n-grams rarer than this in the general corpus are distinctive
DISTINCTIVE_THRESHOLD = 0.05
DISTINCTIVE_ORDERS    = (2, 3, 4)
# Entry mass multiplier of distinctive sequence states
DISTINCTIVE_BOOST     = 2.0
# Number of final slots where cadences are mixed in
CADENCE_WINDOW        = 6
# Used when neither seed nor general statistics hold a cadence of the required length
DEFAULT_CADENCE       = (N.DOMINANT_CHORD, N.TONIC_CHORD)


def detect_distinctive (seed, general, threshold = DISTINCTIVE_THRESHOLD):
    """
    Seed chord n-grams (n = 2, 3, 4) whose relative frequency among general n-grams of the same order is below
    threshold.
    Parameters
    ----------
    seed : stats.StatTables
    general : stats.StatTables
    threshold : float
    Returns
    -------
    sequences : list of tuple of int
    """
    sequences = []
    for n in DISTINCTIVE_ORDERS:
        for seq in sorted(seed.counters["ngrams_%i" % n]):
            if seed.ngram_count(seq) > 0 and general.ngram_frequency(seq) < threshold:
                sequences.append(tuple(seq))
    return sequences


def _normalize_rows (m):
    sums = m.sum(axis=-1, keepdims=True)
    return np.divide(m, sums, out=np.zeros_like(m), where=sums > 0)


def stationary_distribution (trans):
    """
    Stationary distribution of a row-stochastic matrix (least-squares solution of pi P = pi, sum(pi) = 1).
    """
    n = trans.shape[0]
    A = np.vstack([trans.T - np.eye(n), np.ones((1, n))])
    b = np.zeros(n + 1)
    b[-1] = 1.
    pi = np.linalg.lstsq(A, b, rcond=None)[0]
    pi = np.clip(pi, 0., None)
    if pi.sum() <= 0:
        return np.full(n, 1. / n)
    return pi / pi.sum()


class AugmentedChordChain:
    """
    Chord Markov chain whose states are the 7 single chords plus distinctive chord sequences, with a cadence
    transition table used near the end of sections.
    Attributes
    ----------
    states : list of tuple of int
        States, the 7 first ones being the single chords.
    trans : numpy.array of shape (7, n_states) of float
        Row-stochastic transitions from single chords to states.
    cadences : list of tuple of int
        Cadence candidates (length 2..6).
    cadence_freq : numpy.array of shape (n_cadences,) of float
        Blended frequencies of cadence candidates.
    cadence_trans : numpy.array of shape (7, n_cadences) of float
        Row-stochastic transitions from single chords to cadence candidates.
    stationary : numpy.array of shape (7,) of float
        Stationary distribution of the single chord chain.
    """
    def __init__(self, states, trans, cadences, cadence_freq, cadence_trans, stationary):
        self.states        = states
        self.trans         = trans
        self.cadences      = cadences
        self.cadence_freq  = cadence_freq
        self.cadence_trans = cadence_trans
        self.stationary    = stationary
        self.state_lengths   = np.array([len(s) for s in states])
        self.cadence_lengths = np.array([len(c) for c in cadences])

    @property
    def n_distinctive(self):
        return len(self.states) - N.N_CHORDS

    def __repr__(self):
        seqs = ["-".join(N.CHORD_NAMES[c] for c in s) for s in self.states[N.N_CHORDS:]]
        cads = ["-".join(N.CHORD_NAMES[c] for c in s) for s in self.cadences]
        return "AugmentedChordChain(distinctive = %s, cadences = %s)" % (seqs, cads)


def build_chain (seed, general, alpha, distinctive, boost = DISTINCTIVE_BOOST):
    """
    Augmented chord chain: blended first-order transitions, distinctive seed sequences reachable as states with entry
    mass boost * (seed count of chord followed by the sequence) / (seed transitions out of the chord), rows then
    renormalized; cadence candidates of seed and general statistics.
    Parameters
    ----------
    seed : stats.StatTables
    general : stats.StatTables
    alpha : float
    distinctive : list of tuple of int
    boost : float
    Returns
    -------
    chain : chords.AugmentedChordChain
    """
    alpha = Stats.check_alpha(alpha)
    base, empty = Stats.blend_rows(seed.probs["chord_trans"], seed.empty["chord_trans"],
                                   general.probs["chord_trans"], general.empty["chord_trans"], alpha)
    base[empty] = 1. / N.N_CHORDS

    # ---------- DISTINCTIVE STATES ----------
    states = [(c,) for c in range(N.N_CHORDS)] + [tuple(s) for s in distinctive]
    trans  = np.zeros((N.N_CHORDS, len(states)))                                                 # (7, n_states)
    trans[:, :N.N_CHORDS] = base
    out_counts = seed.counts["chord_trans"].sum(axis=1)                                          # (7,)
    for k, seq in enumerate(distinctive):
        for c in range(N.N_CHORDS):
            if out_counts[c] == 0:
                continue
            entry = seed.ngram_count((c,) + tuple(seq))
            if entry > 0:
                trans[c, N.N_CHORDS + k] = boost * entry / out_counts[c]
    trans = _normalize_rows(trans)

    # ---------- CADENCES ----------
    s, g = seed.freqs["cadences"], general.freqs["cadences"]
    if len(s) == 0:
        freqs = dict(g)
    elif len(g) == 0:
        freqs = dict(s)
    else:
        freqs = {key: (1. - alpha) * g.get(key, 0.) + alpha * s.get(key, 0.) for key in set(s) | set(g)}
    cadences = sorted(key for key, f in freqs.items() if f > 0)
    if len(cadences) == 0:
        warnings.warn("No cadence statistics, using %s." % (DEFAULT_CADENCE,))
        cadences = [DEFAULT_CADENCE]
        freqs = {DEFAULT_CADENCE: 1.}
    cadence_freq  = np.array([freqs[c] for c in cadences])
    cadence_freq /= cadence_freq.sum()
    cadence_trans = base[:, [c[0] for c in cadences]] * cadence_freq[np.newaxis, :]             # (7, n_cadences)
    cadence_trans = _normalize_rows(cadence_trans)

    return AugmentedChordChain(states        = states,
                               trans         = trans,
                               cadences      = cadences,
                               cadence_freq  = cadence_freq,
                               cadence_trans = cadence_trans,
                               stationary    = stationary_distribution(base))


def _choose (weights, rng):
    return int(rng.choice(len(weights), p = weights / weights.sum()))


def _forced_cadence (chain, current, length, rng):
    """
    Cadence candidate of given length drawn from the cadence transitions of the current chord.
    """
    mask = (chain.cadence_lengths == length)
    if not mask.any():
        return DEFAULT_CADENCE if length == len(DEFAULT_CADENCE) else None
    w = chain.cadence_trans[current] * mask if current is not None else chain.cadence_freq * mask
    if w.sum() <= 0:
        w = chain.cadence_freq * mask
    return chain.cadences[_choose(w, rng)]


def generate_chords (section_len, chain, prev_chord, rng, first_chord = None):
    """
    Chord progression of a section, one chord per bar. Steps emit a single chord or a distinctive sequence; in the
    last CADENCE_WINDOW slots, cadence candidates filling exactly the remaining slots compete with the chain states;
    with 2 slots left a 2-chord cadence is forced so that every section ends on a cadence.
    Parameters
    ----------
    section_len : int
        Number of bars.
    chain : chords.AugmentedChordChain
    prev_chord : int or None
        Chord before the section, None for a draw from the stationary distribution.
    rng : numpy.random.Generator
    first_chord : int or None
        Chord imposed on the first bar (sections aligned to a reference), ignored when the whole section is a
        cadence.
    Returns
    -------
    chords : list of int
    """
    assert section_len >= 1, "Sections must have at least one bar."
    out = []
    current = prev_chord
    while len(out) < section_len:
        remaining = section_len - len(out)

        # ---------- SINGLE BAR SECTION ----------
        if remaining == 1:
            w = chain.trans[current, :N.N_CHORDS] if current is not None else chain.stationary
            out.append(_choose(w, rng) if first_chord is None or len(out) > 0 else int(first_chord))
            break

        # ---------- FORCED CADENCE ----------
        if remaining == 2:
            cadence = _forced_cadence(chain, current, 2, rng)
            out += list(cadence)
            break

        # ---------- IMPOSED FIRST CHORD ----------
        if len(out) == 0 and first_chord is not None:
            current = int(first_chord)
            out.append(current)
            continue

        # ---------- CHAIN STEP ----------
        # States must leave room for a 2-chord cadence
        state_mask = (chain.state_lengths <= remaining - 2)
        if current is None:
            w_states = np.zeros(len(chain.states))
            w_states[:N.N_CHORDS] = chain.stationary
        else:
            w_states = chain.trans[current].copy()
        w_states *= state_mask
        if remaining <= CADENCE_WINDOW:
            cad_mask = (chain.cadence_lengths == remaining)
            w_cad = (chain.cadence_trans[current] if current is not None else chain.cadence_freq) * cad_mask
        else:
            w_cad = np.zeros(len(chain.cadences))
        w = np.concatenate([w_states, w_cad])
        if w.sum() <= 0:
            w = np.zeros(len(w))
            w[:N.N_CHORDS] = chain.stationary
        idx = _choose(w, rng)
        if idx >= len(chain.states):
            out += list(chain.cadences[idx - len(chain.states)])
            break
        state = chain.states[idx]
        out += list(state)
        current = state[-1]
    return [int(c) for c in out]


def is_cadence_ending (chords, chain):
    """
    Does a section chord progression end with one of the cadence candidates of the chain.
    """
    return any(tuple(chords[-len(c):]) == tuple(c) for c in chain.cadences if len(c) <= len(chords)) \
        or tuple(chords[-2:]) == DEFAULT_CADENCE


def is_pac (chords):
    """
    Section ends on a perfect authentic cadence (V, I).
    """
    return len(chords) >= 2 and tuple(chords[-2:]) == (N.DOMINANT_CHORD, N.TONIC_CHORD)
