import copy
import time as time
import unittest

import numpy as np

# Internal imports
from popstyle.songsym import note as N
from popstyle.songsym import contour as Contour


def brute_force_similarity (gen, seed):
    """
    Full DTW matrices of the generated and of the flat melody against every seed prefix.
    """
    gen  = np.asarray(gen,  dtype=float)
    seed = np.asarray(seed, dtype=float)
    ref  = Contour.reference_pitch(seed)
    s_deltas = Contour.frame_deltas(seed)

    def dtw (frames, deltas):
        n, m = len(frames), len(seed)
        D = np.zeros((n + 1, m + 1))
        for j in range(1, m + 1):
            D[0, j] = D[0, j - 1] + float(Contour.insertion_cost(seed[j - 1], ref))
        for i in range(1, n + 1):
            D[i, 0] = D[i - 1, 0] + float(Contour.insertion_cost(frames[i - 1], ref))
            for j in range(1, m + 1):
                sub = float(Contour.substitution_cost(frames[i - 1], deltas[i - 1], seed[j - 1], s_deltas[j - 1]))
                D[i, j] = min(D[i - 1, j - 1] + sub,
                              D[i - 1, j] + float(Contour.insertion_cost(frames[i - 1], ref)),
                              D[i, j - 1] + float(Contour.insertion_cost(seed[j - 1], ref)))
        return D[n]

    row  = dtw(gen, Contour.frame_deltas(gen))
    flat = dtw(np.full(len(gen), ref), np.zeros(len(gen)))
    j = int(np.argmin(row[1:])) + 1
    a, b = row[j], flat[j]
    if b == 0:
        return 1. if a == 0 else 0.
    return max(1. - a / b, 0.)


class ContourTest(unittest.TestCase):

    def test_frame_deltas (self):
        deltas = Contour.frame_deltas([5, 3, 3, 0, 4, 6])
        self.assertTrue(np.array_equal(deltas, [0., 2., 0., Contour.REST_DELTA, Contour.REST_DELTA, -2.]))
        deltas = Contour.frame_deltas([5, 3], prev = 1)
        self.assertTrue(np.array_equal(deltas, [-4., 2.]))
        return None

    def test_costs (self):
        self.assertEqual(float(Contour.pitch_distance(3., 7.)), 4.)
        self.assertEqual(float(Contour.pitch_distance(0., 7.)), Contour.REST_PITCH_COST)
        self.assertEqual(float(Contour.pitch_distance(0., 0.)), 0.)
        self.assertEqual(float(Contour.direction_distance(2., 3.)),  0.)
        self.assertEqual(float(Contour.direction_distance(2., -1.)), 2.)
        self.assertEqual(float(Contour.direction_distance(0., -1.)), 1.)
        self.assertEqual(float(Contour.direction_distance(Contour.REST_DELTA, Contour.REST_DELTA)), 0.)
        self.assertEqual(float(Contour.direction_distance(Contour.REST_DELTA, 1.)), Contour.REST_DIRECTION_COST)
        self.assertEqual(float(Contour.insertion_cost(0., 5.)), Contour.REST_INSERTION_COST)
        self.assertEqual(float(Contour.insertion_cost(8., 5.)), 3.)
        self.assertEqual(Contour.reference_pitch([0, 0]), Contour.DEFAULT_REFERENCE_PITCH)
        self.assertEqual(Contour.reference_pitch([1, 0, 5]), 3.)
        return None

    def test_identical_melody (self):
        seed = [1, 1, 3, 3, 5, 5, 0, 8]
        self.assertAlmostEqual(Contour.contour_similarity(seed, seed), 1.)
        # A prefix of the seed matches perfectly
        self.assertAlmostEqual(Contour.contour_similarity(seed[:4], seed), 1.)
        return None

    def test_similarity_range (self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            gen  = rng.integers(0, 16, size=int(rng.integers(1, 12)))
            seed = rng.integers(0, 16, size=int(rng.integers(1, 12)))
            sim = Contour.contour_similarity(gen, seed)
            self.assertTrue(0. <= sim <= 1.)
        return None

    def test_brute_force_oracle (self):
        rng = np.random.default_rng(42)
        t0 = time.perf_counter()
        for _ in range(200):
            gen  = rng.integers(0, 16, size=int(rng.integers(1, 7)))
            seed = rng.integers(0, 16, size=int(rng.integers(1, 7)))
            # Fewer rests
            gen  = np.where(rng.random(len(gen))  < 0.2, 0, np.maximum(gen,  1))
            seed = np.where(rng.random(len(seed)) < 0.2, 0, np.maximum(seed, 1))
            self.assertAlmostEqual(Contour.contour_similarity(gen, seed), brute_force_similarity(gen, seed),
                                   places=9)
        t1 = time.perf_counter()
        print("\ncontour brute force check time = %.3f s" % (t1 - t0))
        return None

    def test_candidate_grid (self):
        seed = [5, 5, 6, 6, 8, 8, 8, 8, 0, 0, 6, 6, 5, 5, 3, 3]
        tracker = Contour.ContourTracker(seed)
        tracker.push(5, 2)
        tracker.push(7, 2)
        pitches = [0, 3, 8, 12]
        grid = tracker.candidate_grid(pitches, 6)
        self.assertEqual(grid.shape, (4, 6))
        for i, p in enumerate(pitches):
            for d in range(1, 7):
                t = copy.deepcopy(tracker)
                t.push(p, d)
                self.assertAlmostEqual(grid[i, d - 1], t.similarity(), places=12)
        # Incremental pushes match the batch function
        self.assertAlmostEqual(tracker.similarity(), Contour.contour_similarity([5, 5, 7, 7], seed))
        return None

    def test_empty_seed (self):
        with self.assertRaises(N.InputError):
            Contour.ContourTracker([])
        return None

    def test_rhythm_similarity (self):
        self.assertAlmostEqual(Contour.rhythm_similarity([0, 4, 8], [0, 8], 16), 15. / 16.)
        self.assertAlmostEqual(Contour.rhythm_similarity([0, 4], [0, 4, 20], 16), 1.)
        notes = N.notes_from_pairs([(1, 4), (N.REST, 4), (3, 8)])
        self.assertTrue(np.array_equal(np.nonzero(Contour.onset_mask(notes))[0], [0, 8]))
        return None

    def test_rhythm_tracker (self):
        target = Contour.onset_mask(N.notes_from_pairs([(1, 4), (3, 4), (5, 8)]))
        tracker = Contour.RhythmTracker(target, 32)
        pairs = [(1, 4), (N.REST, 2), (3, 2), (5, 8), (1, 16)]
        for p, d in pairs:
            grid = tracker.candidate_grid(N.MAX_DURATION)
            expected = grid[int(p == N.REST), d - 1]
            tracker.push(d, p == N.REST)
            self.assertAlmostEqual(tracker.similarity(), expected)
        # Target tiled cyclically over 32 frames
        generated = Contour.onset_mask(N.notes_from_pairs(pairs))
        tiled_target = np.nonzero(np.resize(target, 32))[0]
        self.assertAlmostEqual(tracker.similarity(),
                               Contour.rhythm_similarity(np.nonzero(generated)[0], tiled_target, 32))
        return None


if __name__ == '__main__':
    unittest.main(verbosity=2)
