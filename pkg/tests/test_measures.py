from __future__ import annotations

import io
import math
import unittest

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from drift_app.distributions import align_pair, build_distribution
from drift_app.errors import MeasureDivisionByZero
from drift_app.ingest import parse_records, partition, serialize_records
from drift_app.measures import all_measures, measure_vector
from drift_app.models import MEASURES, MeasureId

from synthetic_corpus import TABLE_P, TABLE_Q, table_expected, table_records


def _random_distribution(rng: np.random.Generator, size: int, zero_share: float) -> np.ndarray:
    weights = rng.random(size)
    weights[rng.random(size) < zero_share] = 0.0
    if weights.sum() == 0.0:
        weights[rng.integers(size)] = 1.0
    return weights / weights.sum()


class TablePairTests(unittest.TestCase):
    def test_all_measures_match_exact_reference(self) -> None:
        corpus = partition(table_records(), ["ES"], (2000, 2001))
        pair = align_pair(build_distribution(corpus.bucket("ES", 2000)), build_distribution(corpus.bucket("ES", 2001)))
        row = all_measures(pair, "ES", 2000)

        expected = table_expected()
        self.assertEqual((row.field_code, row.year_from, row.year_to), ("ES", 2000, 2001))
        for measure in MEASURES:
            with self.subTest(measure=measure.label):
                self.assertTrue(math.isclose(row.value(measure), expected[measure], rel_tol=1e-9, abs_tol=1e-12))

    def test_table_pair_survives_ingest(self) -> None:
        expected = table_expected()
        for fmt in ("tsv", "jsonl"):
            with self.subTest(fmt=fmt):
                parsed = parse_records(io.BytesIO(serialize_records(table_records(), fmt)), fmt, strict=True)
                self.assertEqual(len(parsed.records), 160)
                corpus = partition(parsed.records, ["ES"], (2000, 2001))
                left = build_distribution(corpus.bucket("ES", 2000))
                right = build_distribution(corpus.bucket("ES", 2001))
                pair = align_pair(left, right)

                self.assertEqual((left.total_count, right.total_count), (70, 90))
                self.assertEqual((pair.v_left, pair.v_right, pair.common_count, pair.size), (4, 5, 3, 6))
                np.testing.assert_allclose(pair.p, np.array(TABLE_P) / 630, rtol=0, atol=1e-12)
                np.testing.assert_allclose(pair.q, np.array(TABLE_Q) / 630, rtol=0, atol=1e-12)
                row = all_measures(pair, "ES", 2000)
                for measure in MEASURES:
                    self.assertTrue(math.isclose(row.value(measure), expected[measure], rel_tol=1e-9, abs_tol=1e-12))

    def test_manhattan_counts_disjoint_mass(self) -> None:
        value = measure_vector(np.array(TABLE_P) / 630, np.array(TABLE_Q) / 630, MeasureId.MANHATTAN)
        self.assertAlmostEqual(value, 658 / 630, places=12)

    def test_spot_values(self) -> None:
        p = np.array(TABLE_P) / 630
        q = np.array(TABLE_Q) / 630
        expected = {
            MeasureId.MANHATTAN: 47 / 45,
            MeasureId.CZEKANOWSKI: 47 / 90,
            MeasureId.SOERGEL: 94 / 137,
            MeasureId.KULCZYNSKI: 94 / 43,
            MeasureId.CANBERRA: 3 + 1 / 4 + 31 / 101 + 37 / 107,
            MeasureId.EUCLIDEAN: math.sqrt(82950) / 630,
        }
        for measure, value in expected.items():
            with self.subTest(measure=measure.label):
                self.assertTrue(math.isclose(measure_vector(p, q, measure), value, rel_tol=1e-9))


class DisjointSupportTests(unittest.TestCase):
    EXPECTED = {
        MeasureId.CANBERRA: 2.0,
        MeasureId.CLARK: math.sqrt(2.0),
        MeasureId.COSINE: 1.0,
        MeasureId.CZEKANOWSKI: 1.0,
        MeasureId.EUCLIDEAN: math.sqrt(2.0),
        MeasureId.JENSEN_SHANNON: math.log(2.0),
        MeasureId.LORENTZIAN: 2.0 * math.log(2.0),
        MeasureId.MANHATTAN: 2.0,
        MeasureId.PROB_SYMMETRIC_CHI2: 4.0,
        MeasureId.SOERGEL: 1.0,
        MeasureId.SQUARED_CHORD: 2.0,
    }

    def test_maximal_values(self) -> None:
        p = np.array([1.0, 0.0])
        q = np.array([0.0, 1.0])
        for measure, expected in self.EXPECTED.items():
            with self.subTest(measure=measure.label):
                self.assertAlmostEqual(measure_vector(p, q, measure), expected, places=12)

    def test_kulczynski_is_undefined(self) -> None:
        with self.assertRaises(MeasureDivisionByZero) as ctx:
            measure_vector(np.array([1.0, 0.0]), np.array([0.0, 1.0]), MeasureId.KULCZYNSKI)
        self.assertEqual(ctx.exception.measure, "kulczynski")

    def test_shared_zero_coordinates_are_ignored(self) -> None:
        p = np.array([0.5, 0.0, 0.5])
        q = np.array([0.25, 0.0, 0.75])
        for measure in MEASURES:
            with self.subTest(measure=measure.label):
                self.assertEqual(
                    measure_vector(p, q, measure),
                    measure_vector(np.array([0.5, 0.5]), np.array([0.25, 0.75]), measure),
                )


class RandomPairPropertyTests(unittest.TestCase):
    PAIRS = 1000

    def setUp(self) -> None:
        rng = np.random.default_rng(20240601)
        self.pairs = []
        for _ in range(self.PAIRS):
            size = int(rng.integers(2, 40))
            p = _random_distribution(rng, size, 0.3)
            q = _random_distribution(rng, size, 0.3)
            # keep at least one shared keyword so kulczynski stays defined
            shared = int(rng.integers(size))
            if p[shared] == 0.0 or q[shared] == 0.0:
                p[shared] += 0.1
                q[shared] += 0.1
                p /= p.sum()
                q /= q.sum()
            self.pairs.append((p, q))

    def test_symmetry_and_identity(self) -> None:
        for p, q in self.pairs:
            for measure in MEASURES:
                self.assertAlmostEqual(measure_vector(p, q, measure), measure_vector(q, p, measure), places=12)
                self.assertAlmostEqual(measure_vector(p, p, measure), 0.0, places=12)

    def test_bounds(self) -> None:
        upper = {
            MeasureId.COSINE: 1.0,
            MeasureId.CZEKANOWSKI: 1.0,
            MeasureId.SOERGEL: 1.0,
            MeasureId.EUCLIDEAN: math.sqrt(2.0),
            MeasureId.JENSEN_SHANNON: math.log(2.0),
            MeasureId.MANHATTAN: 2.0,
            MeasureId.PROB_SYMMETRIC_CHI2: 4.0,
            MeasureId.SQUARED_CHORD: 2.0,
        }
        for p, q in self.pairs:
            for measure in MEASURES:
                value = measure_vector(p, q, measure)
                self.assertGreaterEqual(value, 0.0)
                if measure in upper:
                    self.assertLessEqual(value, upper[measure] + 1e-12)
            self.assertLessEqual(measure_vector(p, q, MeasureId.CANBERRA), len(p) + 1e-9)

    def test_identities_with_manhattan(self) -> None:
        for p, q in self.pairs:
            manhattan = measure_vector(p, q, MeasureId.MANHATTAN)
            self.assertTrue(math.isclose(measure_vector(p, q, MeasureId.CZEKANOWSKI), manhattan / 2, rel_tol=1e-12, abs_tol=1e-12))
            self.assertTrue(
                math.isclose(measure_vector(p, q, MeasureId.SOERGEL), manhattan / (1 + manhattan / 2), rel_tol=1e-12, abs_tol=1e-12)
            )
            self.assertTrue(
                math.isclose(measure_vector(p, q, MeasureId.KULCZYNSKI), manhattan / (1 - manhattan / 2), rel_tol=1e-9, abs_tol=1e-15)
            )
            if manhattan > 0:
                self.assertLess(measure_vector(p, q, MeasureId.LORENTZIAN), manhattan)
                self.assertNotEqual(measure_vector(p, q, MeasureId.KULCZYNSKI), measure_vector(p, q, MeasureId.SOERGEL))

    def test_permutation_invariance(self) -> None:
        rng = np.random.default_rng(7)
        for p, q in self.pairs[:200]:
            order = rng.permutation(len(p))
            for measure in MEASURES:
                self.assertTrue(
                    math.isclose(
                        measure_vector(p, q, measure),
                        measure_vector(p[order], q[order], measure),
                        rel_tol=1e-10,
                        abs_tol=1e-15,
                    )
                )


_weights = st.lists(st.integers(min_value=0, max_value=1000), min_size=2, max_size=30)


class HypothesisTests(unittest.TestCase):
    @settings(max_examples=200, deadline=None)
    @given(_weights, _weights)
    def test_symmetric_for_arbitrary_counts(self, left: list[int], right: list[int]) -> None:
        size = min(len(left), len(right))
        left, right = left[:size], right[:size]
        if sum(left) == 0 or sum(right) == 0:
            return
        p = np.array(left, dtype=float) / sum(left)
        q = np.array(right, dtype=float) / sum(right)
        for measure in MEASURES:
            try:
                forward = measure_vector(p, q, measure)
            except MeasureDivisionByZero:
                self.assertEqual(measure, MeasureId.KULCZYNSKI)
                with self.assertRaises(MeasureDivisionByZero):
                    measure_vector(q, p, measure)
                continue
            self.assertTrue(math.isclose(forward, measure_vector(q, p, measure), rel_tol=1e-12, abs_tol=1e-15))


if __name__ == "__main__":
    unittest.main()
