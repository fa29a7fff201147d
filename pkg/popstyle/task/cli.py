import argparse
import json
import sys

try:
    import tomllib
except ModuleNotFoundError:
    import tomli as tomllib

# Internal imports
from popstyle.config.config0 import config0
from popstyle.compose import monitoring
from popstyle.songsym import stats as Stats
from popstyle.songsym.note import InputError, InvariantViolation
from popstyle.task import generate as Generate
from popstyle.task import evaluate as Evaluate

EXIT_OK        = 0
EXIT_INPUT     = 2
EXIT_INVARIANT = 3

# Generate flags mirrored by config file keys
GENERATE_OPTIONS = ("structure", "max_dist", "alpha_chords", "distinctive_threshold", "alpha_melody",
                    "rhythm_threshold", "contour_floor", "candidates", "rng_seed", "out", "stats", "log")


def make_parser ():
    parser = argparse.ArgumentParser(prog="popstyle",
                                     description="Generate pop songs imitating the style of a seed song.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-v", "--verbose", action="count", default=0, help="verbosity level")
    sub = parser.add_subparsers(dest="command", required=True)

    # ---------- ANALYZE ----------
    p = sub.add_parser("analyze", parents=[common], help="print seed statistics of a song")
    p.add_argument("path", help="text score or MIDI file")
    p.add_argument("--sidecar", default=None, help="annotation sidecar of a MIDI file (default: <file>.json)")

    # ---------- STATS ----------
    p = sub.add_parser("stats", help="general statistics")
    stats_sub = p.add_subparsers(dest="stats_command", required=True)
    b = stats_sub.add_parser("build", parents=[common], help="build general statistics from a corpus directory")
    b.add_argument("corpus", help="directory of text scores, MIDI files with sidecars and .chords files")
    b.add_argument("-o", "--out", required=True, help="output stats.json")
    b.add_argument("--smoothing", type=float, default=Stats.GENERAL_SMOOTHING, help="pseudo-count per cell")

    # ---------- GENERATE ----------
    p = sub.add_parser("generate", parents=[common], help="generate a song imitating seed songs")
    p.add_argument("--seed", "--melody-seed", dest="seed", default=None, help="melody seed (and default for all parts)")
    p.add_argument("--chord-seed",     default=None, help="seed of the chord module")
    p.add_argument("--bass-seed",      default=None, help="seed of the bass module")
    p.add_argument("--structure-seed", default=None, help="seed of the structure module")
    p.add_argument("--config", default=None, help="TOML config file (flags override it)")
    p.add_argument("--fast", action="store_true", help="use the fast run config (few candidates)")
    p.add_argument("--structure", default=None, help="copy, random or a letter string such as AABABC")
    p.add_argument("--max-dist", type=float, default=None, help="max section alignment distance")
    p.add_argument("--alpha-chords", type=float, default=None, help="chord blending parameter")
    p.add_argument("--distinctive-threshold", type=float, default=None, help="distinctive n-gram threshold")
    p.add_argument("--alpha-melody", type=float, default=None, help="melody blending parameter")
    p.add_argument("--rhythm-threshold", type=float, default=None, help="rhythm similarity gate")
    p.add_argument("--contour-floor", type=float, default=None, help="floor of contour similarity factor")
    p.add_argument("--candidates", type=int, default=None, help="candidate melodies per section")
    p.add_argument("--rng-seed", type=int, default=None, help="random seed (default 0)")
    p.add_argument("--stats", default=None, help="general statistics (default: bundled corpus)")
    p.add_argument("--out", default=None, help="output prefix, writes <out>.mid and <out>.txt")
    p.add_argument("--log", default=None, help="candidates CSV log")
    p.add_argument("--plot", default=None, help="contour and candidate scores figure")

    # ---------- EVALUATE ----------
    p = sub.add_parser("evaluate", parents=[common], help="likelihood of songs under a seed style")
    p.add_argument("--seed", default=None, help="seed song whose style songs are scored under")
    p.add_argument("--candidates", nargs="+", default=None, help="songs to score")
    p.add_argument("--experiment", nargs="+", default=None, help="seeds of an imitation experiment")
    p.add_argument("--stats", default=None, help="general statistics (default: bundled corpus)")
    p.add_argument("--alpha", type=float, default=Stats.DEFAULT_ALPHA, help="blending parameter of scoring")
    p.add_argument("--rng-seed", type=int, default=0, help="random seed of the experiment")
    p.add_argument("--fast", action="store_true", help="use the fast run config in the experiment")
    p.add_argument("--out", default=None, help="output CSV (default: stdout)")

    return parser


# ----------------------------------------------------------------------------------------------------------------------
# ------------------------------------------------------ COMMANDS ------------------------------------------------------
# ----------------------------------------------------------------------------------------------------------------------

def cmd_analyze (args):
    _, summary = Generate.run_analyze(args.path, args.sidecar)
    print(summary)


def cmd_stats (args):
    Generate.run_stats_build(args.corpus, args.out, smoothing = args.smoothing, verbose = args.verbose)


def cmd_generate (args):
    seeds = {"melody": args.seed, "chord": args.chord_seed, "bass": args.bass_seed, "structure": args.structure_seed}
    overrides = {key: getattr(args, key) for key in GENERATE_OPTIONS}
    config = Generate.GenerationConfig.from_sources(seeds       = seeds,
                                                    config_path = args.config,
                                                    overrides   = overrides,
                                                    run_config  = config0 if args.fast else None)
    logger = None
    if config.log is not None or args.plot is not None:
        logger = monitoring.GenerationLogger(save_path = config.log, do_save = config.log is not None)
    _, _, text = Generate.run_generate(config, logger = logger, verbose = args.verbose)
    if args.plot is not None:
        monitoring.GenerationVisualiser(save_path = args.plot).visualise(logger)
    if config.out is None:
        sys.stdout.write(text)


def _write_table (df, out):
    if out is None:
        sys.stdout.write(df.to_csv(index=False))
    else:
        Stats.write_atomic(out, df.to_csv(index=False))


def cmd_evaluate (args):
    if args.experiment is not None:
        general = Generate.load_general_stats(args.stats)
        seeds = [Generate.read_song(path) for path in args.experiment]
        result = Evaluate.imitation_experiment(seeds, general, run_config = config0 if args.fast else None,
                                               alpha = args.alpha, rng_seed = args.rng_seed, verbose = args.verbose)
        _write_table(result.tests, args.out)
        return
    if args.seed is None or args.candidates is None:
        raise InputError("evaluate needs --seed and --candidates (or --experiment).")
    seed    = Generate.read_song(args.seed)
    songs   = [Generate.read_song(path) for path in args.candidates]
    general = Generate.load_general_stats(args.stats, exclude = [seed])
    _write_table(Evaluate.evaluate(songs, seed, general, alpha = args.alpha), args.out)


COMMANDS = {
    "analyze"  : cmd_analyze,
    "stats"    : cmd_stats,
    "generate" : cmd_generate,
    "evaluate" : cmd_evaluate,
}


def exit_code (error):
    """
    Exit code of an error: 3 for invariant violations, 2 for input errors, None for others.
    """
    if isinstance(error, Generate.PipelineError):
        return exit_code(error.error)
    if isinstance(error, InvariantViolation):
        return EXIT_INVARIANT
    if isinstance(error, (InputError, OSError, json.JSONDecodeError, tomllib.TOMLDecodeError)):
        return EXIT_INPUT
    return None


def main (argv = None):
    """
    Runs the command line, returns the exit code.
    """
    args = make_parser().parse_args(argv)
    try:
        COMMANDS[args.command](args)
    except Exception as e:
        code = exit_code(e)
        if code is None:
            raise
        print("popstyle: error: %s" % e, file=sys.stderr)
        return code
    return EXIT_OK


if __name__ == '__main__':
    sys.exit(main())
