import numpy as np
from collections import namedtuple

# Internal imports
from popstyle.songsym.note import SectionSpec, InputError

# ---------- DISTANCE WEIGHTS ----------
W_LENGTH    = 0.7
W_POSITION  = 0.15
W_VARIATION = 0.15
W_FREQUENCY = 0.1
# Max distance for a section to be aligned
DEFAULT_MAX_DIST = 0.35
# Length of sections of structures given as letter strings
SPEC_SECTION_LENGTH = 8
# Collection of typical structures drawn from in random mode
TYPICAL_STRUCTURES = ("ABAB", "ABABB", "AABABC", "ABABCB", "AABB")

STRUCTURE_MODES = ("copy", "random")


class StructureSpecError(InputError):
    pass


# (L, P, M, F): length in bars, number of sections before, variation flag, count of sections sharing the name
SectionFeatures = namedtuple("SectionFeatures", ["L", "P", "M", "F"])

# ---------- ALIGNMENT TARGETS ----------
SeedRef = namedtuple("SeedRef", ["index", "distance"])
SelfRef = namedtuple("SelfRef", ["index", "distance"])
Fresh   = namedtuple("Fresh",   [])


def section_features (sections):
    """
    Features of each section of a structure and the structure totals (total bars, number of sections).
    Parameters
    ----------
    sections : list of note.SectionSpec
    Returns
    -------
    features, totals : list of structure.SectionFeatures, (int, int)
    """
    names = [s.name for s in sections]
    features = [SectionFeatures(L = s.length, P = i, M = int(s.is_variation), F = names.count(s.name))
                for i, s in enumerate(sections)]
    totals = (sum(s.length for s in sections), len(sections))
    return features, totals


def section_distance (a, ctx_a, b, ctx_b):
    """
    Weighted distance between two sections of two songs with normalized features:
    w_l |L1/Ls - L2/Ln| + w_p |(P1+1)/Ps - (P2+1)/Pn| + w_m |M1 - M2| + w_f |F1/Ps - F2/Pn|.
    Parameters
    ----------
    a, b : structure.SectionFeatures
    ctx_a, ctx_b : (int, int)
        (total bars, number of sections) of the song of each section.
    Returns
    -------
    distance : float
    """
    La, Pa = ctx_a
    Lb, Pb = ctx_b
    assert La > 0 and Pa > 0 and Lb > 0 and Pb > 0, "Totals must be positive."
    return (W_LENGTH    * abs(a.L / La - b.L / Lb)
          + W_POSITION  * abs((a.P + 1) / Pa - (b.P + 1) / Pb)
          + W_VARIATION * abs(a.M - b.M)
          + W_FREQUENCY * abs(a.F / Pa - b.F / Pb))


def align (new_sections, seed_sections, max_dist = DEFAULT_MAX_DIST):
    """
    Aligns each new section to its nearest seed section (earliest on ties) if within max_dist, else to its nearest
    earlier new section if within max_dist, else to nothing.
    Parameters
    ----------
    new_sections : list of note.SectionSpec
    seed_sections : list of note.SectionSpec
    max_dist : float
    Returns
    -------
    plan : list of structure.SeedRef, structure.SelfRef or structure.Fresh
    """
    assert len(new_sections) > 0 and len(seed_sections) > 0, "Structures to align must be nonempty."
    new_feats,  new_ctx  = section_features(new_sections)
    seed_feats, seed_ctx = section_features(seed_sections)
    plan = []
    for i, feat in enumerate(new_feats):
        d_seed = np.array([section_distance(s, seed_ctx, feat, new_ctx) for s in seed_feats])
        j = int(np.argmin(d_seed))
        if d_seed[j] <= max_dist:
            plan.append(SeedRef(j, float(d_seed[j])))
            continue
        if i > 0:
            d_self = np.array([section_distance(s, new_ctx, feat, new_ctx) for s in new_feats[:i]])
            j = int(np.argmin(d_self))
            if d_self[j] <= max_dist:
                plan.append(SelfRef(j, float(d_self[j])))
                continue
        plan.append(Fresh())
    return plan


def structure_from_string (spec):
    """
    Structure from a letter string, one 8-bar section per letter. Later occurrences of a letter are exact repeats,
    except a final letter doubling a letter already heard earlier (eg. the last B of ABABB), which is a variation.
    """
    if not isinstance(spec, str) or len(spec) == 0 or not spec.isalpha():
        raise StructureSpecError("Structure spec must be a nonempty letter string, not %r." % (spec,))
    sections = [SectionSpec(letter, SPEC_SECTION_LENGTH, False) for letter in spec]
    n = len(spec)
    if n >= 3 and spec[-1] == spec[-2] and spec[-1] in spec[:-2]:
        sections[-1] = SectionSpec(spec[-1], SPEC_SECTION_LENGTH, True)
    return sections


def generate_structure (mode, seed_sections, rng):
    """
    New song structure.
    Parameters
    ----------
    mode : str
        "copy" (seed structure), "random" (draw from TYPICAL_STRUCTURES) or a letter string (eg. "AABABC").
    seed_sections : list of note.SectionSpec
    rng : numpy.random.Generator
    Returns
    -------
    sections : list of note.SectionSpec
    """
    if mode == "copy":
        return list(seed_sections)
    if mode == "random":
        return structure_from_string(TYPICAL_STRUCTURES[int(rng.integers(len(TYPICAL_STRUCTURES)))])
    return structure_from_string(mode)
