import unittest
import numpy as np

# Internal imports
from popstyle.songsym import structure as Structure
from popstyle.songsym.note import SectionSpec, InputError


def specs (*items):
    return [SectionSpec(*item) for item in items]


class StructureTest(unittest.TestCase):

    def test_section_features (self):
        feats, totals = Structure.section_features(specs(("A", 8, False), ("B", 4, False), ("A", 8, True)))
        self.assertEqual(feats[2], Structure.SectionFeatures(L = 8, P = 2, M = 1, F = 2))
        self.assertEqual(feats[1].F, 1)
        self.assertEqual(totals, (20, 3))
        return None

    def test_section_distance (self):
        a = Structure.SectionFeatures(L = 8, P = 0, M = 0, F = 1)
        b = Structure.SectionFeatures(L = 8, P = 1, M = 1, F = 1)
        self.assertAlmostEqual(Structure.section_distance(a, (16, 2), b, (16, 2)), 0.225)
        self.assertAlmostEqual(Structure.section_distance(a, (16, 2), a, (16, 2)), 0.)
        return None

    def test_align_identical (self):
        sections = specs(("A", 8, False), ("B", 8, False), ("A", 8, True), ("C", 4, False))
        plan = Structure.align(sections, sections)
        self.assertEqual([ref.index for ref in plan], [0, 1, 2, 3])
        self.assertTrue(all(isinstance(ref, Structure.SeedRef) and ref.distance == 0. for ref in plan))
        return None

    def test_align_self_reference (self):
        seed = specs(("A", 1, False), ("B", 1, False), ("C", 30, False))
        new  = specs(("X", 16, False), ("X", 16, False))
        plan = Structure.align(new, seed)
        self.assertIsInstance(plan[0], Structure.Fresh)
        self.assertIsInstance(plan[1], Structure.SelfRef)
        self.assertEqual(plan[1].index, 0)
        self.assertAlmostEqual(plan[1].distance, 0.075)
        return None

    def test_align_max_dist (self):
        seed = specs(("A", 8, False), ("B", 8, False))
        new  = specs(("A", 8, False), ("B", 8, False))
        # Negative max_dist forbids every alignment
        plan = Structure.align(new, seed, max_dist = -1.)
        self.assertTrue(all(isinstance(ref, Structure.Fresh) for ref in plan))
        # Large max_dist aligns everything to the nearest seed section
        plan = Structure.align(new, seed, max_dist = 10.)
        self.assertTrue(all(isinstance(ref, Structure.SeedRef) for ref in plan))
        return None

    def test_align_ties_earliest (self):
        seed = specs(("A", 4, False), ("A", 4, False))
        new  = specs(("A", 8, False))
        d = [Structure.section_distance(f, (8, 2), Structure.section_features(new)[0][0], (8, 1))
             for f in Structure.section_features(seed)[0]]
        plan = Structure.align(new, seed, max_dist = 10.)
        self.assertEqual(plan[0].index, int(np.argmin(d)))
        return None

    def test_structure_from_string (self):
        sections = Structure.structure_from_string("ABABB")
        self.assertEqual([s.name for s in sections], list("ABABB"))
        self.assertEqual([s.is_variation for s in sections], [False, False, False, False, True])
        self.assertTrue(all(s.length == Structure.SPEC_SECTION_LENGTH for s in sections))
        sections = Structure.structure_from_string("AABABC")
        self.assertFalse(any(s.is_variation for s in sections))
        for bad in ("", "AB1", None):
            with self.assertRaises(Structure.StructureSpecError):
                Structure.structure_from_string(bad)
        self.assertTrue(issubclass(Structure.StructureSpecError, InputError))
        return None

    def test_generate_structure (self):
        seed = specs(("V", 4, False), ("C", 4, False))
        self.assertEqual(Structure.generate_structure("copy", seed, np.random.default_rng(0)), seed)
        a = Structure.generate_structure("random", seed, np.random.default_rng(3))
        b = Structure.generate_structure("random", seed, np.random.default_rng(3))
        self.assertEqual(a, b)
        self.assertIn("".join(s.name for s in a), Structure.TYPICAL_STRUCTURES)
        self.assertEqual(len(Structure.generate_structure("ABC", seed, np.random.default_rng(0))), 3)
        return None


if __name__ == '__main__':
    unittest.main(verbosity=2)
