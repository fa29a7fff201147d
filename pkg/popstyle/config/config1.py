"""
Configuration config1 draws 30 candidate melodies per section and keeps the best rated one.
"""

# Number of candidate melodies per section
N_CANDIDATES = 30

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
config1 = {
    "structure_config" : structure_config,
    "chords_config"    : chords_config,
    "melody_config"    : melody_config,
    "bass_config"      : bass_config,
}
