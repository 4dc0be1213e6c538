"""Tests for the QUBO representation and its algebra."""

import numpy as np
import pytest

from bboq.qubo import (
    QuboModel,
    add_scaled,
    evaluate,
    fold_diagonal,
    from_triplets,
    max_abs_coefficient,
    symmetrized,
    to_triplets,
)


def brute_force_energies(model):
    """Independent oracle: enumerate every assignment explicitly."""
    d = model.dim
    out = {}
    for k in range(2**d):
        x = np.array([(k >> i) & 1 for i in range(d)], dtype=np.float64)
        e = 0.0
        for i in range(d):
            for j in range(d):
                e += model.quadratic[i, j] * x[i] * x[j]
        e += float(model.linear @ x) + model.constant
        out[k] = e
    return out


def random_model(rng, d):
    return QuboModel(symmetrized(rng.normal(size=(d, d))), rng.normal(size=d))


class TestEvaluate:
    def test_two_bit_model_all_assignments(self):
        model = QuboModel(np.array([[0.0, 1.0], [1.0, 0.0]]), np.array([-1.0, -1.0]))
        oracle = brute_force_energies(model)
        assert evaluate(model, [1, 1]) == oracle[3] == 0.0
        assert evaluate(model, [1, 0]) == oracle[1] == -1.0
        assert evaluate(model, [0, 1]) == oracle[2] == -1.0
        assert evaluate(model, [0, 0]) == oracle[0] == 0.0

    def test_zero_model(self):
        model = QuboModel.zeros(3)
        for k in range(8):
            x = [(k >> i) & 1 for i in range(3)]
            assert evaluate(model, x) == 0.0

    def test_identity_diagonal(self):
        model = QuboModel(np.eye(3), np.zeros(3))
        assert evaluate(model, [1, 1, 1]) == 3.0

    def test_length_mismatch(self):
        model = QuboModel.zeros(3)
        with pytest.raises(ValueError):
            evaluate(model, [1, 0])


class TestConstruction:
    def test_rejects_asymmetric(self):
        quad = np.array([[0.0, 1.0], [0.5, 0.0]])
        with pytest.raises(ValueError, match="symmetric"):
            QuboModel(quad, np.zeros(2))

    def test_rejects_non_finite(self):
        quad = np.array([[np.inf]])
        with pytest.raises(ValueError):
            QuboModel(quad, np.zeros(1))

    def test_arrays_frozen(self):
        model = QuboModel.zeros(2)
        with pytest.raises(ValueError):
            model.quadratic[0, 0] = 1.0


class TestAddScaled:
    def test_scale_zero_is_identity(self):
        rng = np.random.default_rng(0)
        a, b = random_model(rng, 4), random_model(rng, 4)
        out = add_scaled(a, b, 0.0)
        assert np.array_equal(out.quadratic, a.quadratic)
        assert np.array_equal(out.linear, a.linear)

    def test_cancellation(self):
        rng = np.random.default_rng(1)
        a = random_model(rng, 4)
        neg = add_scaled(QuboModel.zeros(4), a, -1.0)
        out = add_scaled(a, neg, 1.0)
        assert np.all(out.quadratic == 0) and np.all(out.linear == 0)

    def test_distribution_law(self):
        rng = np.random.default_rng(2)
        for _ in range(5):
            a, b = random_model(rng, 6), random_model(rng, 6)
            s = float(rng.normal())
            combo = add_scaled(a, b, s)
            for _ in range(20):
                x = (rng.random(6) < 0.5).astype(float)
                expected = evaluate(a, x) + s * evaluate(b, x)
                assert abs(evaluate(combo, x) - expected) < 1e-10

    def test_dim_mismatch(self):
        with pytest.raises(ValueError):
            add_scaled(QuboModel.zeros(2), QuboModel.zeros(3), 1.0)


class TestMaxAbs:
    def test_zero_model(self):
        assert max_abs_coefficient(QuboModel.zeros(3)) == 0.0

    def test_identity(self):
        assert max_abs_coefficient(QuboModel(np.eye(3), np.zeros(3))) == 1.0

    def test_mixed_signs(self):
        model = QuboModel(symmetrized(np.array([[0.0, -4.0], [-4.0, 0.0]])), np.array([2.0, 0.0]))
        assert max_abs_coefficient(model) == 4.0


class TestCanonicalExport:
    def test_triplets_upper_triangular_sorted(self):
        rng = np.random.default_rng(3)
        model = random_model(rng, 5)
        trips = to_triplets(model)
        assert trips == sorted(trips)
        assert all(i <= j for i, j, _ in trips)

    def test_triplet_values_double_off_diagonal(self):
        quad = symmetrized(np.array([[1.0, 2.0], [2.0, 3.0]]))
        model = QuboModel(quad, np.zeros(2))
        assert to_triplets(model) == [(0, 0, 1.0), (0, 1, 4.0), (1, 1, 3.0)]

    def test_round_trip_exact(self):
        rng = np.random.default_rng(4)
        for _ in range(10):
            model = random_model(rng, 7)
            rebuilt = from_triplets(
                model.dim, to_triplets(model), model.linear, model.constant
            )
            assert np.array_equal(rebuilt.quadratic, model.quadratic)
            assert np.array_equal(rebuilt.linear, model.linear)

    def test_diagonal_fold_preserves_evaluate(self):
        rng = np.random.default_rng(5)
        for _ in range(10):
            model = random_model(rng, 6)
            folded = fold_diagonal(model)
            assert np.all(np.diag(folded.quadratic) == 0)
            for _ in range(10):
                x = (rng.random(6) < 0.5).astype(float)
                assert abs(evaluate(folded, x) - evaluate(model, x)) < 1e-12
