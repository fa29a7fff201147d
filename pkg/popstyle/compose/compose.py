import time
import warnings
from contextlib import contextmanager

import numpy as np

# Internal imports
from popstyle.songsym import note as N
from popstyle.songsym import stats as Stats
from popstyle.songsym import structure as Structure
from popstyle.songsym import chords as Chords
from popstyle.songsym import rating as Rating
from popstyle.songsym import melody as Melody
from popstyle.songsym import bass as Bass
from popstyle.songsym.song import Song

PARTS = ("structure", "chord", "melody", "bass")


class PipelineError(RuntimeError):
    """
    Failure of a generation module, the original exception is chained.
    """
    def __init__(self, module, section, error):
        self.module  = module
        self.section = section
        self.error   = error
        where = "" if section is None else " (section %i)" % section
        RuntimeError.__init__(self, "%s module failed%s: %s: %s" % (module, where, type(error).__name__, error))


@contextmanager
def _stage (module, section = None):
    try:
        yield
    except PipelineError:
        raise
    except Exception as e:
        raise PipelineError(module, section, e) from e


def _ref_label (ref):
    if isinstance(ref, Structure.SeedRef):
        return "seed:%i" % ref.index
    if isinstance(ref, Structure.SelfRef):
        return "self:%i" % ref.index
    return "fresh"


def resolve_reference (plan, i):
    """
    Seed reference a section ultimately imitates (following self references), None if fresh.
    """
    ref = plan[i]
    while isinstance(ref, Structure.SelfRef):
        ref = plan[ref.index]
    return ref if isinstance(ref, Structure.SeedRef) else None


def repeat_source (sections, i):
    """
    Idx of the first occurrence of an exact repeat (same name, not a variation, same length), None otherwise.
    """
    s = sections[i]
    if s.is_variation:
        return None
    for j in range(i):
        if sections[j].name == s.name and sections[j].length == s.length:
            return j
    return None


class SeedPack:
    """
    Seed songs per part (a song may feed several parts) and their statistics.
    """
    def __init__(self, seeds):
        """
        Parameters
        ----------
        seeds : song.Song or dict of str -> song.Song
            Single seed for every part or one seed per part ("structure", "chord", "melody", "bass"), missing parts
            taking the melody seed.
        """
        if isinstance(seeds, Song):
            seeds = {part: seeds for part in PARTS}
        assert "melody" in seeds, "A melody seed is required."
        self.songs  = {part: seeds.get(part, seeds["melody"]) for part in PARTS}
        self._stats = {}
        for part, song in self.songs.items():
            assert isinstance(song, Song), "Seed of %s must be a song.Song." % part

    def stats(self, part):
        song = self.songs[part]
        if id(song) not in self._stats:
            self._stats[id(song)] = Stats.build_seed_stats(song)
        return self._stats[id(song)]

    def label(self, part):
        return str(self.songs[part].name)


def compose (seeds,
             general,
             structure_config,
             chords_config,
             melody_config,
             bass_config,
             rng_seed = 0,
             logger   = None,
             verbose  = 0,
             name     = None,
            ):
    """
    Generates a song imitating seed songs: structure, then chords, then melody and bass.
    Parameters
    ----------
    seeds : song.Song or dict of str -> song.Song
        Seed song or seed songs per part ("structure", "chord", "melody", "bass").
    general : stats.StatTables
        General statistics.
    structure_config : dict
        mode (str), max_dist (float), copy_repeats (bool).
    chords_config : dict
        alpha (float), distinctive_threshold (float), boost (float).
    melody_config : dict
        alpha (float), rhythm_threshold (float), contour_floor (float), n_candidates (int), ratings_config (list).
    bass_config : dict
        per_section (bool): use the style of the aligned seed section (else the global seed style).
    rng_seed : int
        Seed of random streams.
    logger : monitoring.GenerationLogger or None
    verbose : int
        If 0 print nothing, if 1 prints timing, if > 1 prints section plans.
    name : str or None
    Returns
    -------
    song : song.Song
    """
    t0 = time.perf_counter()
    pack = SeedPack(seeds)
    rng_structure, rng_chords, rng_melody = [np.random.default_rng(s)
                                             for s in np.random.SeedSequence(rng_seed).spawn(3)]

    # -------------------------------------------------
    # ------------------- STRUCTURE -------------------
    # -------------------------------------------------
    with _stage("structure"):
        sections = Structure.generate_structure(structure_config.get("mode", "copy"),
                                                pack.songs["structure"].sections, rng_structure)
        max_dist = structure_config.get("max_dist", Structure.DEFAULT_MAX_DIST)
        copy_repeats = structure_config.get("copy_repeats", True)
        plans = {part: Structure.align(sections, pack.songs[part].sections, max_dist)
                 for part in ("chord", "melody", "bass")}
    if logger is not None:
        logger.log_provenance("structure", None, pack.label("structure"))
    if verbose > 1:
        print("Structure: %s" % " ".join("%s%i%s" % (s.name, s.length, "'" if s.is_variation else "")
                                         for s in sections))

    sources = [repeat_source(sections, i) if copy_repeats else None for i in range(len(sections))]

    # -------------------------------------------------
    # --------------------- CHORDS --------------------
    # -------------------------------------------------
    chord_seed  = pack.songs["chord"]
    chord_stats = pack.stats("chord")
    alpha_c     = chords_config.get("alpha", Stats.DEFAULT_ALPHA)
    with _stage("chords"):
        distinctive = Chords.detect_distinctive(chord_stats, general,
                                                chords_config.get("distinctive_threshold",
                                                                  Chords.DISTINCTIVE_THRESHOLD))
        boost = chords_config.get("boost", Chords.DISTINCTIVE_BOOST)
        chain_seed    = Chords.build_chain(chord_stats, general, alpha_c, distinctive, boost = boost)
        chain_general = Chords.build_chain(chord_stats, general, 0., [])
    section_chords = []
    for i, s in enumerate(sections):
        plan = plans["chord"]
        with _stage("chords", i):
            if sources[i] is not None:
                section_chords.append(list(section_chords[sources[i]]))
            else:
                ref = plan[i]
                imitated = resolve_reference(plan, i)
                chain = chain_seed if imitated is not None else chain_general
                if isinstance(ref, Structure.SeedRef):
                    first = chord_seed.section_chords(ref.index)[0]
                elif isinstance(ref, Structure.SelfRef):
                    first = section_chords[ref.index][0]
                else:
                    first = None
                prev = section_chords[-1][-1] if (i > 0 and first is not None) else None
                section_chords.append(Chords.generate_chords(s.length, chain, prev, rng_chords, first_chord = first))
        if logger is not None:
            logger.log_provenance("chords", i, pack.label("chord"), _ref_label(plans["chord"][i]))

    # -------------------------------------------------
    # --------------------- MELODY --------------------
    # -------------------------------------------------
    melody_seed  = pack.songs["melody"]
    melody_stats = pack.stats("melody")
    alpha_m      = melody_config.get("alpha", Stats.DEFAULT_ALPHA)
    n_candidates = melody_config.get("n_candidates", Melody.N_CANDIDATES)
    with _stage("melody"):
        ratings_config = melody_config.get("ratings_config", None)
        styles = {True  : Rating.MelodyStyle(melody_stats, general, alpha_m, tempo = melody_seed.tempo),
                  False : Rating.MelodyStyle(melody_stats, general, 0.,      tempo = melody_seed.tempo)}
        collections = {k: Rating.make_RatingCollection(style, ratings_config) for k, style in styles.items()}
    section_melodies = []
    for i, s in enumerate(sections):
        plan = plans["melody"]
        with _stage("melody", i):
            if sources[i] is not None:
                section_melodies.append(list(section_melodies[sources[i]]))
                target_frames = None
            else:
                ref = plan[i]
                imitated = resolve_reference(plan, i)
                if isinstance(ref, Structure.SeedRef):
                    targets = Melody.targets_from_notes(melody_seed.section_notes("melody", ref.index))
                elif isinstance(ref, Structure.SelfRef):
                    targets = Melody.targets_from_notes(section_melodies[ref.index])
                else:
                    targets = None
                best, candidates = Melody.best_of(section_chords[i], collections[imitated is not None],
                                                  n_candidates, int(rng_melody.integers(2**63)),
                                                  targets = targets,
                                                  rhythm_threshold = melody_config.get("rhythm_threshold",
                                                                                       Melody.RHYTHM_THRESHOLD),
                                                  contour_floor = melody_config.get("contour_floor",
                                                                                    Melody.CONTOUR_FLOOR))
                section_melodies.append(best.notes)
                target_frames = None if targets is None else targets.frames
                if logger is not None:
                    logger.log_candidates(i, candidates, best)
        if logger is not None:
            logger.log_provenance("melody", i, pack.label("melody"), _ref_label(plans["melody"][i]))
            logger.log_section(i, s.name, _ref_label(plans["melody"][i]), section_melodies[i], target_frames)
        if verbose > 1:
            print("Section %i (%s): %s, %i melody notes" % (i, s.name, _ref_label(plans["melody"][i]),
                                                            len(section_melodies[i])))

    # -------------------------------------------------
    # ---------------------- BASS ---------------------
    # -------------------------------------------------
    bass_seed   = pack.songs["bass"]
    per_section = bass_config.get("per_section", True)
    with _stage("bass"):
        global_style = Bass.global_bass_style(bass_seed)
    section_basses = []
    bass_styles    = []
    prev_degree    = None
    for i, s in enumerate(sections):
        plan = plans["bass"]
        with _stage("bass", i):
            if sources[i] is not None:
                section_basses.append(list(section_basses[sources[i]]))
                bass_styles.append(bass_styles[sources[i]])
            else:
                ref = plan[i]
                style = global_style
                if per_section and isinstance(ref, Structure.SeedRef):
                    try:
                        style = Bass.extract_bass_style(bass_seed.section_notes("bass", ref.index),
                                                        bass_seed.section_chords(ref.index))
                    except N.InputError:
                        warnings.warn("Seed section %i has no bass, using the global bass style." % ref.index)
                elif per_section and isinstance(ref, Structure.SelfRef):
                    style = bass_styles[ref.index]
                bass_styles.append(style)
                section_basses.append(Bass.generate_bass(section_chords[i], style, prev_degree))
            pitched = [n.pitch for n in section_basses[-1] if not n.is_rest]
            if len(pitched) > 0:
                prev_degree = pitched[-1]
        if logger is not None:
            logger.log_provenance("bass", i, pack.label("bass"), _ref_label(plans["bass"][i]))

    # -------------------------------------------------
    # -------------------- ASSEMBLY -------------------
    # -------------------------------------------------
    with _stage("assembly"):
        song = Song(sections      = sections,
                    melody        = [n for notes in section_melodies for n in notes],
                    chords        = [c for chords in section_chords for c in chords],
                    bass          = [n for notes in section_basses for n in notes],
                    tempo         = melody_seed.tempo,
                    mode          = melody_seed.mode,
                    melody_octave = melody_seed.melody_octave,
                    bass_octave   = bass_seed.bass_octave,
                    name          = name)
    if logger is not None and logger.do_save:
        logger.save_log()
    if verbose:
        print("Generated %s in %.3f s" % (song, time.perf_counter() - t0))
    return song
