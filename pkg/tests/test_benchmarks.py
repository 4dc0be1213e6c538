"""Tests for the landscapes, flip treatment, and named presets."""

import numpy as np
import pytest

from bboq.benchmarks import (
    FlipMask,
    make_flipped,
    make_mask,
    preset,
    rastrigin,
    rosenbrock,
)


class TestRosenbrock:
    def test_global_minimum(self):
        assert rosenbrock(np.ones(7)) == 0.0

    def test_origin_two_dim(self):
        assert rosenbrock(np.array([0.0, 0.0])) == 1.0

    def test_hand_value(self):
        assert rosenbrock(np.array([-1.0, 1.0])) == 4.0

    def test_needs_two_coordinates(self):
        with pytest.raises(ValueError):
            rosenbrock(np.array([1.0]))

    def test_non_negative_sampled(self):
        rng = np.random.default_rng(0)
        for _ in range(200):
            x = rng.uniform(-3, 3, size=rng.integers(2, 8))
            assert rosenbrock(x) >= 0.0


class TestRastrigin:
    def test_global_minimum(self):
        assert rastrigin(np.zeros(5)) == 0.0

    def test_unit_vector(self):
        assert abs(rastrigin(np.array([1.0, 1.0])) - 2.0) < 1e-9

    def test_half(self):
        assert abs(rastrigin(np.array([0.5])) - 20.25) < 1e-12

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            rastrigin(np.array([]))

    def test_non_negative_sampled(self):
        rng = np.random.default_rng(1)
        for _ in range(200):
            x = rng.uniform(-3, 3, size=rng.integers(1, 8))
            assert rastrigin(x) >= -1e-9


class TestFlip:
    def test_flip_rule_by_hand(self):
        seen = {}

        def recorder(x):
            seen["x"] = np.array(x)
            return 0.0

        mask = FlipMask(indices=frozenset({1, 3}), d=4, seed=0)
        flipped = make_flipped(recorder, 4, seed=0, mask=mask)
        flipped(np.array([0.0, 1.0, 1.0, 0.0]))
        assert seen["x"].tolist() == [1.0, 1.0, 0.0, 0.0]

    def test_flipped_rastrigin_optimum_at_mask_indicator(self):
        mask = make_mask(12, seed=5)
        flipped = make_flipped(rastrigin, 12, seed=5)
        indicator = np.zeros(12)
        indicator[mask.zero_based] = 1.0
        assert flipped(indicator) == 0.0

    def test_same_seed_same_mask(self):
        assert make_mask(20, seed=9).indices == make_mask(20, seed=9).indices
        assert make_mask(20, seed=9).indices != make_mask(20, seed=10).indices

    def test_involution(self):
        rng = np.random.default_rng(3)
        mask = make_mask(10, seed=4)
        flipped = make_flipped(rastrigin, 10, seed=4, mask=mask)
        double = make_flipped(flipped, 10, seed=4, mask=mask)
        for _ in range(20):
            x = (rng.random(10) < 0.5).astype(float)
            assert double(x) == rastrigin(x)

    def test_mask_size_floor_half(self):
        assert len(make_mask(9, seed=1).indices) == 4
        assert len(make_mask(10, seed=1).indices) == 5

    def test_mask_indices_validated(self):
        with pytest.raises(ValueError):
            FlipMask(indices=frozenset({0, 2}), d=4, seed=0)
        with pytest.raises(ValueError):
            FlipMask(indices=frozenset({1}), d=4, seed=0)


TABLE_ROWS = {
    "r5n": (5, (-3.0, 3.0), 301, 1500),
    "r5": (5, (-3.0, 3.0), 61, 300),
    "r10": (10, (-3.0, 3.0), 61, 600),
    "r20": (20, (-3.0, 3.0), 61, 1200),
    "r40": (40, (-3.0, 3.0), 61, 2400),
    "r80": (80, (-3.0, 3.0), 61, 4800),
    "b40": (40, None, None, 40),
    "b80": (80, None, None, 80),
    "b160": (160, None, None, 160),
    "b320": (320, None, None, 320),
    "b640": (640, None, None, 640),
}


class TestPresets:
    @pytest.mark.parametrize("name", sorted(TABLE_ROWS))
    def test_rows(self, name):
        d, bounds, n_bins, d_b = TABLE_ROWS[name]
        space, cfg = preset(name)
        assert space.dim == d
        assert space.total_bits == d_b
        for spec in space.vars:
            if bounds is None:
                assert spec.kind == "binary"
            else:
                assert spec.kind == "real"
                assert (spec.lower, spec.upper) == bounds
                assert spec.n_bins == n_bins
        assert cfg.n_init == 10
        assert cfg.beta == 0.0
        assert cfg.lam == 1.0
        assert cfg.gamma == 0.0
        assert cfg.alpha_exp == 1.0

    def test_unknown_name(self):
        with pytest.raises(KeyError, match="unknown preset"):
            preset("r7")
