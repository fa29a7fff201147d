#!/usr/bin/env python
# coding: utf-8

# # popstyle demo (quick song)

# External packages
import numpy as np
# Internal code import
import popstyle
from popstyle.songsym import textscore as TextScore
from popstyle.songsym import midi as Midi
from popstyle.task import generate as Generate


# ### Seed song

seed_path = Generate.bundled_seeds()[-1]
seed = Generate.read_song(seed_path)
print(seed)


# ### Generating an imitation

# Fast config : few candidate melodies per section
song = popstyle.generate(seed,
                         rng_seed   = 0,
                         run_config = popstyle.config.config0.config0,
                         # Sticking closer to the seed melody statistics
                         alpha_melody = 0.8,
                         )
print(song)


# ### Inspecting the song

print(TextScore.render_text_score(song))

with open("demo_quick_song.mid", "wb") as f:
    f.write(Midi.export_midi(song))


# ### Likelihood under the seed style vs under other styles

others = [Generate.read_song(path) for path in Generate.bundled_seeds()[:-1]]
report = popstyle.evaluate([song] + others, seed)
totals = report[report["function"] == "total"]
print(totals.to_string(index=False))
print("Imitation ranks first : %s" % (np.argmax(totals["value"].values) == 0))
