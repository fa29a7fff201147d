# External packages
import copy

# Internal code import
from popstyle.config.config1 import config1
from popstyle.compose import compose as Compose
from popstyle.compose import monitoring
from popstyle.songsym import midi as Midi
from popstyle.songsym import textscore as TextScore
from popstyle.task import generate as Generate


# ------------------------------------ SEEDS ------------------------------------
# One seed per part : structure of the ballad, chords of the doo-wop tune, melody of the pop tune, bass of the rock tune
paths = {path.split("/")[-1].split(".")[0]: path for path in Generate.bundled_seeds()}
seeds = {"structure" : Generate.read_song(paths["slow_ballad"]),
         "chord"     : Generate.read_song(paths["doo_wop"]),
         "melody"    : Generate.read_song(paths["sunny_pop"]),
         "bass"      : Generate.read_song(paths["rock_drive"]),}

# ------------------------------------ RUN CONFIG ------------------------------------
run_config = copy.deepcopy(config1)
run_config["melody_config"]["n_candidates"] = 20

# ------------------------------------ LOGGING ------------------------------------
logger     = monitoring.GenerationLogger(save_path = "demo_hybrid_song.log.csv", do_save = True)
visualiser = monitoring.GenerationVisualiser(save_path = "demo_hybrid_song_contours.png")

# ------------------------------------ RUN ------------------------------------
song = Compose.compose(seeds   = seeds,
                       general = Generate.default_general_stats(seeds.values()),
                       rng_seed = 42,
                       logger  = logger,
                       verbose = 2,
                       name    = "hybrid",
                       **run_config)
visualiser.visualise(logger)

with open("demo_hybrid_song.mid", "wb") as f:
    f.write(Midi.export_midi(song))
with open("demo_hybrid_song.txt", "w") as f:
    f.write(TextScore.render_text_score(song))

# ------------------------------------ RESULTS ------------------------------------
df = logger.get_candidates_df()
print(df.groupby("section")["score"].agg(["mean", "max"]))
print("Provenance :")
print(logger.get_provenance_df().to_string(index=False))
