import math
from dataclasses import replace

import numpy as np
import pytest

from cohmdi.channel import ChannelModel
from cohmdi.keyrate import (
    SearchConfig,
    binary_entropy,
    key_rate,
    optimize_alpha,
    sweep,
)


class TestBinaryEntropy:
    def test_endpoints(self):
        assert binary_entropy(0.0) == 0.0
        assert binary_entropy(1.0) == 0.0

    def test_maximum(self):
        assert binary_entropy(0.5) == 1.0

    def test_spot_value(self):
        # direct evaluation: -0.11 log2 0.11 - 0.89 log2 0.89 = 0.4999159...
        assert binary_entropy(0.11) == pytest.approx(0.499916, abs=1e-6)

    def test_domain(self):
        with pytest.raises(ValueError):
            binary_entropy(-0.1)
        with pytest.raises(ValueError):
            binary_entropy(1.1)


class TestKeyRate:
    def test_ideal_low_loss_positive(self):
        # no side channels at the optimizer's preferred amplitude
        alpha_star, point, _ = optimize_alpha(0.0, 0.0, 0.0, p_d=0.0)
        assert point.R > 0.0
        assert point.e_bit == 0.0
        assert point.e_ph_U < 0.5

    def test_ideal_union_estimator_at_alpha_03(self):
        # with the combined-success estimator, alpha = 0.3 at eta = 1 keeps
        # the phase-error bound below 1/2
        point = key_rate(0.3, 0.0, 0.0, ChannelModel(eta=1.0, p_d=0.0), povm="union")
        assert point.e_bit == 0.0
        assert point.e_ph_U < 0.5
        assert point.R > 0.0

    def test_full_leakage_kills_rate(self):
        point = key_rate(0.3, 0.0, 1.0, ChannelModel(eta=1.0, p_d=1e-8))
        assert point.R == 0.0
        assert point.e_ph_U >= 0.5

    def test_cutoff_window(self):
        # the epsilon = 1e-6 cutoff sits between 13 and 15 dB
        _, p13, _ = optimize_alpha(13.0, 1e-6, 0.0, p_d=1e-8)
        _, p16, _ = optimize_alpha(16.0, 1e-6, 0.0, p_d=1e-8)
        assert p13.R > 0.0
        assert p16.R == 0.0

    def test_invariant_recomputable(self):
        for loss in (0.0, 10.0):
            for eps in (0.0, 1e-6):
                ch = ChannelModel.from_loss_db(loss, 1e-8)
                p = key_rate(0.2, 0.0, eps, ch)
                recomputed = max(
                    0.0,
                    p.Q * (1.0 - binary_entropy(min(p.e_ph_U, 0.5))
                           - p.f_e * binary_entropy(p.e_bit)),
                )
                assert p.R == pytest.approx(recomputed, abs=1e-12)

    def test_detail_payload(self):
        p = key_rate(0.3, 0.0, 1e-6, ChannelModel(eta=0.5, p_d=1e-8))
        d = p.detail
        assert d is not None
        assert d.yields.y_success.shape == (3, 3)
        assert d.deltas.shape == (3, 3)
        assert 0.0 <= d.delta_vir_L <= 1.0
        assert d.bound.gamma_U <= 1.0

    def test_per_pair_epsilon_table(self):
        table = np.full((3, 3), 1e-6)
        table[2, 2] = 1e-4
        p = key_rate(0.3, 0.0, table, ChannelModel(eta=0.5, p_d=1e-8))
        assert math.isnan(p.epsilon)
        uniform = key_rate(0.3, 0.0, 1e-6, ChannelModel(eta=0.5, p_d=1e-8))
        assert p.e_ph_U >= uniform.e_ph_U - 1e-15


class TestOptimizeAlpha:
    def test_beats_fixed_grid(self):
        grid = np.arange(1, 31) * 0.05
        for loss, eps in [(0.0, 0.0), (5.0, 1e-6), (10.0, 1e-6)]:
            alpha_star, point, _ = optimize_alpha(loss, eps, 0.0, p_d=1e-8)
            ch = ChannelModel.from_loss_db(loss, 1e-8)
            best_grid = max(key_rate(a, 0.0, eps, ch).R for a in grid)
            assert point.R >= best_grid - 1e-12

    def test_interior_optimum(self):
        alpha_star, _, trace = optimize_alpha(0.0, 0.0, 0.0, p_d=1e-8)
        assert 0.01 < alpha_star < 1.5
        assert not trace.boundary
        assert trace.bracket_width <= 1e-4

    def test_all_zero_flagged(self):
        _, point, _ = optimize_alpha(10.0, 1.0, 0.0, p_d=1e-8)
        assert point.R == 0.0
        assert point.flag == "no-positive-rate"

    def test_deterministic(self):
        a1, p1, t1 = optimize_alpha(7.0, 1e-6, 0.0, p_d=1e-8)
        a2, p2, t2 = optimize_alpha(7.0, 1e-6, 0.0, p_d=1e-8)
        assert a1 == a2
        assert p1.R == p2.R
        assert t1 == t2

    def test_carries_requested_loss(self):
        _, point, _ = optimize_alpha(0.5, 1e-6, 0.0, p_d=1e-8)
        assert point.loss_db == 0.5


class TestSweep:
    def test_ordering_and_flags(self):
        result = sweep(loss_grid=[0.0, 2.0, 4.0], epsilon_list=[0.0, 1e-6],
                       gamma_sq_list=[0.0], p_d=1e-8)
        assert len(result.points) == 6
        eps_seq = [p.epsilon for p in result.points]
        assert eps_seq == [0.0, 0.0, 0.0, 1e-6, 1e-6, 1e-6]
        loss_seq = [p.loss_db for p in result.points[:3]]
        assert loss_seq == sorted(loss_seq)
        assert all(p.flag in ("ok", "no-positive-rate") for p in result.points)

    def test_rate_non_increasing_in_loss(self):
        result = sweep(loss_grid=np.arange(0.0, 12.1, 1.0), epsilon_list=[1e-6],
                       gamma_sq_list=[0.0], p_d=1e-8)
        rates = [p.R for p in result.points]
        assert all(b <= a + 1e-12 for a, b in zip(rates, rates[1:]))

    def test_gamma_sq_recorded_exactly(self):
        result = sweep(loss_grid=[5.0], epsilon_list=[1e-6],
                       gamma_sq_list=[0.0, 1e-5], p_d=1e-8)
        assert [p.gamma_sq for p in result.points] == [0.0, 1e-5]

    def test_parallel_matches_serial(self):
        grid = [0.0, 3.0, 6.0]
        serial = sweep(grid, [1e-6], [0.0], p_d=1e-8, jobs=1)
        parallel = sweep(grid, [1e-6], [0.0], p_d=1e-8, jobs=2)
        for a, b in zip(serial.points, parallel.points):
            assert a.R == b.R and a.alpha == b.alpha and a.loss_db == b.loss_db


class TestSearchConfig:
    def test_scan_grid_contains_regression_grid(self):
        grid = SearchConfig().scan_grid()
        for k in range(1, 31):
            assert np.any(grid == k * 0.05)

    def test_scan_grid_bounds(self):
        grid = SearchConfig().scan_grid()
        assert grid[0] == 0.01
        assert grid[-1] == 1.5
