import copy
import glob
import os
import functools

try:
    import tomllib
except ModuleNotFoundError:
    import tomli as tomllib

# Internal imports
from popstyle.config.config1 import config1
from popstyle.compose import compose as Compose
from popstyle.compose import monitoring
from popstyle.songsym import stats as Stats
from popstyle.songsym import midi as Midi
from popstyle.songsym import textscore as TextScore
from popstyle.songsym.note import InputError

# Errors raised by generation modules
PipelineError = Compose.PipelineError

# DEFAULT RUN CONFIG TO USE
default_config = config1

# BUNDLED DATA
DATA_DIR         = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "data")
SEEDS_DIR        = os.path.join(DATA_DIR, "seeds")
CHORD_CORPUS_DIR = os.path.join(DATA_DIR, "chord_corpus")

SCORE_EXTENSIONS = (".txt", ".score")
MIDI_EXTENSIONS  = (".mid", ".midi")
CHORDS_EXTENSION = ".chords"


# ----------------------------------------------------------------------------------------------------------------------
# -------------------------------------------------------- INPUTS ------------------------------------------------------
# ----------------------------------------------------------------------------------------------------------------------

def read_song (path, sidecar_path = None):
    """
    Reads a seed song from a text score or a MIDI file (with its annotation sidecar).
    """
    ext = os.path.splitext(path)[1].lower()
    if ext in MIDI_EXTENSIONS:
        return Midi.read_midi(path, sidecar_path)
    if ext in SCORE_EXTENSIONS:
        return TextScore.read_text_score(path)
    raise InputError("Unknown song file type %r (expected one of %s)." % (path, SCORE_EXTENSIONS + MIDI_EXTENSIONS))


def read_corpus (directory):
    """
    Reads a corpus directory: text scores, MIDI files with sidecars and chord-annotation files.
    Returns
    -------
    corpus : list of song.Song or stats.ChordAnnotation
    """
    if not os.path.isdir(directory):
        raise InputError("Corpus directory %r does not exist." % directory)
    corpus = []
    for path in sorted(glob.glob(os.path.join(directory, "*"))):
        ext = os.path.splitext(path)[1].lower()
        if ext in SCORE_EXTENSIONS or ext in MIDI_EXTENSIONS:
            corpus.append(read_song(path))
        elif ext == CHORDS_EXTENSION:
            with open(path, "r") as f:
                corpus.append(Stats.parse_chord_annotation(f.read(), name = path))
    if len(corpus) == 0:
        raise InputError("Corpus directory %r holds no song or chord annotation." % directory)
    return corpus


def bundled_seeds ():
    """
    Paths of bundled seed songs.
    """
    return sorted(glob.glob(os.path.join(SEEDS_DIR, "*.txt")))


@functools.lru_cache(maxsize=1)
def bundled_corpus ():
    """
    Bundled seed songs and chord-annotation corpus.
    Returns
    -------
    songs, annotations : tuple of song.Song, tuple of stats.ChordAnnotation
    """
    return tuple(read_song(path) for path in bundled_seeds()), tuple(read_corpus(CHORD_CORPUS_DIR))


@functools.lru_cache(maxsize=16)
def _bundled_stats (excluded):
    songs, annotations = bundled_corpus()
    corpus = [s for i, s in enumerate(songs) if i not in excluded] + list(annotations)
    return Stats.build_general_stats(corpus, name = "bundled")


def default_general_stats (exclude = ()):
    """
    General statistics of the bundled seed songs and chord-annotation corpus.
    Parameters
    ----------
    exclude : iterable of song.Song
        Songs left out of the corpus (the seeds being imitated), all songs are kept if none would remain.
    Returns
    -------
    general : stats.StatTables
    """
    songs, _ = bundled_corpus()
    exclude = list(exclude)
    excluded = tuple(i for i, s in enumerate(songs) if any(s == e for e in exclude))
    if len(excluded) == len(songs):
        excluded = ()
    return _bundled_stats(excluded)


def load_general_stats (path = None, exclude = ()):
    """
    General statistics saved at path, or bundled ones without the songs of exclude if path is None.
    """
    if path is None:
        return default_general_stats(exclude)
    return Stats.StatTables.load(path)


# ----------------------------------------------------------------------------------------------------------------------
# --------------------------------------------------- CONFIGURATION ----------------------------------------------------
# ----------------------------------------------------------------------------------------------------------------------

# Option -> (run config dict, key) ; options mirror the long command line flags
CONFIG_KEYS = {
    "structure"             : ("structure_config", "mode"),
    "max_dist"              : ("structure_config", "max_dist"),
    "copy_repeats"          : ("structure_config", "copy_repeats"),
    "alpha_chords"          : ("chords_config",    "alpha"),
    "distinctive_threshold" : ("chords_config",    "distinctive_threshold"),
    "boost"                 : ("chords_config",    "boost"),
    "alpha_melody"          : ("melody_config",    "alpha"),
    "rhythm_threshold"      : ("melody_config",    "rhythm_threshold"),
    "contour_floor"         : ("melody_config",    "contour_floor"),
    "candidates"            : ("melody_config",    "n_candidates"),
    "per_section_bass"      : ("bass_config",      "per_section"),
}
# Options not part of the run config
RUN_KEYS = ("rng_seed", "out", "stats", "log", "name")
SEED_PARTS = Compose.PARTS


class GenerationConfig:
    """
    Complete description of a generation run.
    Attributes
    ----------
    seeds : dict of str -> str
        Seed path per part ("structure", "chord", "melody", "bass").
    run_config : dict
        Run config (see popstyle.config.config0).
    rng_seed : int
    out : str or None
        Output path prefix (".mid" and ".txt" are appended).
    stats : str or None
        Path of general statistics (bundled corpus if None).
    log : str or None
        Path of candidates CSV log.
    name : str or None
    """
    def __init__(self, seeds, run_config = None, rng_seed = 0, out = None, stats = None, log = None, name = None):
        if isinstance(seeds, str):
            seeds = {"melody": seeds}
        assert isinstance(seeds, dict) and "melody" in seeds, "A melody seed path is required."
        for part in seeds:
            assert part in SEED_PARTS, "Unknown seed part %r (available: %s)." % (part, SEED_PARTS)
        self.seeds      = {part: seeds.get(part, seeds["melody"]) for part in SEED_PARTS}
        self.run_config = copy.deepcopy(default_config if run_config is None else run_config)
        try: self.rng_seed = int(rng_seed)
        except (TypeError, ValueError): raise InputError("rng_seed must be an integer, not %r." % (rng_seed,))
        self.out   = out
        self.stats = stats
        self.log   = log
        self.name  = name

    def set(self, key, value):
        """
        Sets an option by its long flag name (dashes or underscores).
        """
        key = key.replace("-", "_")
        if key in CONFIG_KEYS:
            section, item = CONFIG_KEYS[key]
            self.run_config[section][item] = value
        elif key == "rng_seed":
            try: self.rng_seed = int(value)
            except (TypeError, ValueError): raise InputError("rng_seed must be an integer, not %r." % (value,))
        elif key in RUN_KEYS:
            setattr(self, key, value)
        elif key in ("seed", "melody_seed"):
            self.seeds["melody"] = value
        elif key.endswith("_seed") and key[:-len("_seed")] in SEED_PARTS:
            self.seeds[key[:-len("_seed")]] = value
        else:
            raise InputError("Unknown configuration key %r." % key)

    def get(self, key):
        section, item = CONFIG_KEYS[key.replace("-", "_")]
        return self.run_config[section][item]

    @classmethod
    def from_sources(cls, seeds = None, config_path = None, overrides = None, run_config = None):
        """
        Layers defaults, then a TOML config file, then explicit overrides.
        Parameters
        ----------
        seeds : dict of str -> str or None
            Seed paths given on the command line.
        config_path : str or None
            TOML file: keys mirror the long flag names, optional [seeds] table (melody, chord, bass, structure).
        overrides : dict or None
            Explicit options (None values are ignored).
        run_config : dict or None
            Defaults (popstyle.config.config1 if None).
        Returns
        -------
        config : generate.GenerationConfig
        """
        file_seeds, file_options = {}, {}
        if config_path is not None:
            with open(config_path, "rb") as f:
                data = tomllib.load(f)
            for key, value in data.items():
                if key == "seeds":
                    if not isinstance(value, dict):
                        raise InputError("[seeds] must be a table.")
                    file_seeds.update(value)
                else:
                    file_options[key] = value
        all_seeds = dict(file_seeds)
        all_seeds.update({k: v for k, v in (seeds or {}).items() if v is not None})
        if "seed" in file_options and "melody" not in all_seeds:
            all_seeds["melody"] = file_options["seed"]
        file_options.pop("seed", None)
        if "melody" not in all_seeds:
            raise InputError("No melody seed given (--seed or [seeds] melody in config file).")
        config = cls(seeds = all_seeds, run_config = run_config)
        for key, value in file_options.items():
            config.set(key, value)
        for key, value in (overrides or {}).items():
            if value is not None:
                config.set(key, value)
        return config

    def __repr__(self):
        return "GenerationConfig(seeds = %s, rng_seed = %i)" % (self.seeds, self.rng_seed)


# ----------------------------------------------------------------------------------------------------------------------
# ------------------------------------------------------- RUNNING ------------------------------------------------------
# ----------------------------------------------------------------------------------------------------------------------

def read_seeds (config):
    """
    Seed songs per part, each distinct path being read once.
    """
    songs = {}
    by_path = {}
    for part, path in config.seeds.items():
        if path not in by_path:
            by_path[path] = read_song(path)
        songs[part] = by_path[path]
    return songs


def output_paths (out):
    """
    (MIDI path, text score path) of an output prefix.
    """
    base, ext = os.path.splitext(out)
    if ext.lower() not in MIDI_EXTENSIONS + SCORE_EXTENSIONS:
        base = out
    return base + ".mid", base + ".txt"


def run_generate (config, logger = None, verbose = 0):
    """
    Runs the generation pipeline and writes outputs (atomically) when config.out is set.
    Parameters
    ----------
    config : generate.GenerationConfig
    logger : monitoring.GenerationLogger or None
        Logger to use (one is made when config.log is set).
    verbose : int
    Returns
    -------
    song, midi_bytes, text : song.Song, bytes, str
    """
    seeds   = read_seeds(config)
    general = load_general_stats(config.stats, exclude = seeds.values())
    if logger is None and config.log is not None:
        logger = monitoring.GenerationLogger(save_path = config.log, do_save = True)
    song = Compose.compose(seeds   = seeds,
                           general = general,
                           rng_seed = config.rng_seed,
                           logger  = logger,
                           verbose = verbose,
                           name    = config.name,
                           **config.run_config)
    midi_bytes = Midi.export_midi(song)
    text       = TextScore.render_text_score(song)
    if config.out is not None:
        midi_path, text_path = output_paths(config.out)
        Stats.write_atomic(midi_path, midi_bytes)
        Stats.write_atomic(text_path, text)
        if verbose:
            print("Wrote %s and %s" % (midi_path, text_path))
    return song, midi_bytes, text


def generate (seed, rng_seed = 0, run_config = None, general = None, **options):
    """
    Generates a song imitating seed (path, song.Song or dict of part -> song.Song) without writing files.
    (Wrapper around popstyle.compose.compose)
    Parameters
    ----------
    seed : str or song.Song or dict
    rng_seed : int
    run_config : dict or None
        Run config (popstyle.config.config1 if None).
    general : stats.StatTables or None
        General statistics (bundled corpus if None).
    options : dict
        Options by long flag name (eg. alpha_melody = 1.).
    Returns
    -------
    song : song.Song
    """
    if isinstance(seed, str):
        seed = read_song(seed)
    config = GenerationConfig(seeds = {"melody": "<memory>"}, run_config = run_config, rng_seed = rng_seed)
    for key, value in options.items():
        config.set(key, value)
    if general is None:
        general = default_general_stats(seed.values() if isinstance(seed, dict) else [seed])
    return Compose.compose(seeds = seed, general = general, rng_seed = config.rng_seed, **config.run_config)


def run_analyze (path, sidecar_path = None, verbose = 0):
    """
    Seed statistics of a song file and their printable summary.
    Returns
    -------
    tables, summary : stats.StatTables, str
    """
    song = read_song(path, sidecar_path)
    tables = Stats.build_seed_stats(song)
    summary = "%s\n%s" % (song, tables.summary())
    if verbose:
        print(summary)
    return tables, summary


def run_stats_build (directory, out, smoothing = Stats.GENERAL_SMOOTHING, verbose = 0):
    """
    Builds general statistics from a corpus directory and saves them (atomically) to out.
    """
    corpus = read_corpus(directory)
    tables = Stats.build_general_stats(corpus, smoothing = smoothing, name = os.path.basename(os.path.normpath(directory)))
    tables.save(out)
    if verbose:
        print("Built %s from %i corpus items -> %s" % (tables, len(corpus), out))
    return tables
