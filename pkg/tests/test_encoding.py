"""Tests for domain-wall encoding, decoding, and the wall penalty."""

import itertools

import numpy as np
import pytest

from bboq.encoding import (
    Discretization,
    decode_point,
    decode_real,
    domain_wall_penalty,
    encode_point,
    encode_real,
)
from bboq.problem import VariableSpec, build_space
from bboq.qubo import evaluate

FIVE_GRID = Discretization(grid=np.array([0.0, 0.25, 0.5, 0.75, 1.0]), step=0.25)


class TestEncodeReal:
    def test_midpoint_value(self):
        # index floor(0.5 / 0.25 + 0.5) = 2 -> two leading ones
        assert encode_real(0.5, FIVE_GRID).tolist() == [1, 1, 0, 0]

    def test_lower_is_all_zero(self):
        assert encode_real(0.0, FIVE_GRID).tolist() == [0, 0, 0, 0]

    def test_upper_is_all_one(self):
        assert encode_real(1.0, FIVE_GRID).tolist() == [1, 1, 1, 1]

    def test_half_ties_round_up(self):
        # 0.125 sits exactly between bins 0 and 1
        assert encode_real(0.125, FIVE_GRID).tolist() == [1, 0, 0, 0]

    def test_out_of_bounds(self):
        with pytest.raises(ValueError, match="outside bounds"):
            encode_real(1.5, FIVE_GRID)

    def test_explicit_grid_requires_member(self):
        disc = Discretization(grid=np.array([0.0, 0.3, 1.0]), step=None)
        assert encode_real(0.3, disc).tolist() == [1, 0]
        with pytest.raises(ValueError, match="not on the explicit grid"):
            encode_real(0.25, disc)


class TestDecodeReal:
    def test_valid_wall(self):
        assert decode_real(np.array([1, 1, 0, 0]), FIVE_GRID) == 0.5

    def test_all_zero_is_lower(self):
        assert decode_real(np.zeros(4, dtype=np.uint8), FIVE_GRID) == 0.0

    def test_broken_wall_uses_bit_sum(self):
        assert decode_real(np.array([1, 0, 1, 0]), FIVE_GRID) == 0.5

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            decode_real(np.array([1, 0]), FIVE_GRID)

    def test_total_on_all_vectors(self):
        for bits in itertools.product([0, 1], repeat=4):
            v = decode_real(np.array(bits), FIVE_GRID)
            assert v in FIVE_GRID.grid


class TestPointCodec:
    def test_binary_space_identity(self):
        space = build_space([VariableSpec.binary() for _ in range(6)])
        x = np.array([1.0, 0.0, 1.0, 1.0, 0.0, 0.0])
        bits = encode_point(x, space)
        assert bits.tolist() == [1, 0, 1, 1, 0, 0]
        assert decode_point(bits, space).tolist() == x.tolist()

    def test_five_reals_at_origin(self):
        space = build_space([VariableSpec.real(-3, 3, 61) for _ in range(5)])
        bits = encode_point(np.zeros(5), space)
        for i in range(5):
            block = bits[60 * i : 60 * (i + 1)]
            assert block[:30].tolist() == [1] * 30
            assert block[30:].tolist() == [0] * 30
        assert decode_point(bits, space).tolist() == [0.0] * 5

    def test_mixed_space(self):
        space = build_space([VariableSpec.binary(), VariableSpec.real(0, 1, 5)])
        bits = encode_point(np.array([1.0, 0.0]), space)
        assert bits.tolist() == [1, 0, 0, 0, 0]
        assert decode_point(bits, space).tolist() == [1.0, 0.0]

    def test_binary_value_must_be_exact(self):
        space = build_space([VariableSpec.binary()])
        with pytest.raises(ValueError, match="binary variable"):
            encode_point(np.array([0.4]), space)

    def test_round_trip_every_grid_point(self):
        specs = [
            VariableSpec.real(-3, 3, 61),
            VariableSpec.real_grid([0.0, 0.1, 0.4, 1.0]),
            VariableSpec.integer(-2, 2),
        ]
        for spec in specs:
            disc = Discretization.from_spec(spec)
            for g in disc.grid:
                assert decode_real(encode_real(g, disc), disc) == g

    def test_quantization_bound(self):
        spec = VariableSpec.real(-3, 3, 61)
        disc = Discretization.from_spec(spec)
        rng = np.random.default_rng(11)
        half = disc.step / 2
        for x in rng.uniform(-3, 3, size=2000):
            err = abs(decode_real(encode_real(x, disc), disc) - x)
            assert err <= half + 1e-12


class TestDomainWallPenalty:
    def test_valid_wall_scores_zero(self):
        space = build_space([VariableSpec.real(0, 1, 5)])
        penalty = domain_wall_penalty(space, 3.0)
        assert evaluate(penalty, [1, 1, 0, 0]) == 0.0

    def test_single_break_costs_weight(self):
        space = build_space([VariableSpec.real(0, 1, 3)])
        penalty = domain_wall_penalty(space, 3.0)
        assert evaluate(penalty, [0, 1]) == 3.0

    def test_all_ones_scores_zero(self):
        space = build_space([VariableSpec.real(0, 1, 5)])
        penalty = domain_wall_penalty(space, 3.0)
        assert evaluate(penalty, [1, 1, 1, 1]) == 0.0

    def test_soundness_via_enumeration(self):
        # two blocks (widths 3 and 2): zero penalty iff both blocks are
        # monotone non-increasing
        space = build_space([VariableSpec.real(0, 1, 4), VariableSpec.real(0, 1, 3)])
        penalty = domain_wall_penalty(space, 2.0)
        for bits in itertools.product([0, 1], repeat=5):
            blocks = [bits[:3], bits[3:]]
            valid = all(
                all(b[i] >= b[i + 1] for i in range(len(b) - 1)) for b in blocks
            )
            value = evaluate(penalty, list(bits))
            assert (value == 0.0) == valid
            assert value >= 0.0

    def test_binary_vars_unpenalized(self):
        space = build_space([VariableSpec.binary(), VariableSpec.binary()])
        penalty = domain_wall_penalty(space, 1.0)
        assert np.all(penalty.quadratic == 0) and np.all(penalty.linear == 0)

    def test_weight_must_be_positive(self):
        space = build_space([VariableSpec.real(0, 1, 3)])
        with pytest.raises(ValueError):
            domain_wall_penalty(space, 0.0)
