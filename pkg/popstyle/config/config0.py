"""
Configuration config0 is a fast configuration drawing few candidate melodies per section, meant for quick previews
and tests. Use config1 for the full candidate count.
"""

# Number of candidate melodies per section
N_CANDIDATES = 5

# ---------- STRUCTURE CONFIG ----------
structure_config = {
    "mode"         : "copy",
    "max_dist"     : 0.35,
    "copy_repeats" : True,
}

# ---------- CHORDS CONFIG ----------
chords_config = {
    "alpha"                 : 0.5,
    "distinctive_threshold" : 0.05,
    "boost"                 : 2.0,
}

# ---------- RATINGS CONFIG ----------
ratings_config = [
    ("pitch_freq"       , None),
    ("pitch_harmony"    , None),
    ("interval_freq"    , None),
    ("interval_harmony" , {"up_leap": 4, "down_step": 2, "direction_boost": 1.2, "harmony_span": 4.}),
    ("downbeat"         , {"scale": 1.4}),
    ("dur_freq"         , None),
    ("dur_trans"        , None),
    ("rest_dur"         , None),
    ("pos_dur"          , None),
    ("harmony_dur"      , None),
    ("interval_dur"     , None),
    ("rest_freq"        , None),
                 ]

# ---------- MELODY CONFIG ----------
melody_config = {
    "alpha"            : 0.5,
    "rhythm_threshold" : 0.6,
    "contour_floor"    : 0.05,
    "n_candidates"     : N_CANDIDATES,
    "ratings_config"   : ratings_config,
}

# ---------- BASS CONFIG ----------
bass_config = {
    "per_section" : True,
}

# ---------- RUN CONFIG ----------
config0 = {
    "structure_config" : structure_config,
    "chords_config"    : chords_config,
    "melody_config"    : melody_config,
    "bass_config"      : bass_config,
}
