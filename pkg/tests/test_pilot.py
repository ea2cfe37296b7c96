"""Pilot sequence and frame construction tests."""

import numpy as np
import pytest

from otfssim.metrics import papr
from otfssim.numerics import QamConstellation, qam_map, vec
from otfssim.pilot import (EnergySplit, build_ep_frame, build_pilot_cp_vector,
                           build_s1d_frame, chu, default_ep_location,
                           ep_data_mask, s1d_data_mask, validate_config)
from otfssim.zak import FrameConfig, add_cp, idzt


def periodic_autocorr(seq, shift):
    return np.vdot(seq, np.roll(seq, shift)) / seq.size


def qpsk_symbols(rng, count):
    con = QamConstellation(4)
    return qam_map(rng.integers(0, 2, size=2 * count), con)


class TestChu:
    @pytest.mark.parametrize("length", [5, 8, 23, 24, 31])
    def test_unit_modulus(self, length):
        np.testing.assert_allclose(np.abs(chu(length)), 1.0, atol=1e-12)

    @pytest.mark.parametrize("length", [5, 8, 23, 24, 31])
    def test_zero_periodic_autocorrelation(self, length):
        seq = chu(length)
        for shift in range(1, length):
            assert abs(periodic_autocorr(seq, shift)) < 1e-9

    def test_other_coprime_roots_keep_the_property(self):
        seq = chu(24, root=5)
        np.testing.assert_allclose(np.abs(seq), 1.0, atol=1e-12)
        for shift in range(1, 24):
            assert abs(periodic_autocorr(seq, shift)) < 1e-9

    def test_non_coprime_root_is_rejected(self):
        with pytest.raises(ValueError, match="coprime"):
            chu(24, root=6)

    def test_cp_vector_is_cyclic_extension(self):
        seq = chu(24)
        col = build_pilot_cp_vector(seq, 8)
        assert col.size == 32
        np.testing.assert_array_equal(col[:8], seq[-8:])
        np.testing.assert_array_equal(col[8:], seq)
        # the prefix makes the column periodic with the sequence length
        np.testing.assert_allclose(col[:8], col[24:], atol=1e-12)


class TestEnergySplit:
    def test_alpha_bounds(self):
        with pytest.raises(ValueError, match="alpha"):
            EnergySplit(0.0, 512.0)
        with pytest.raises(ValueError, match="alpha"):
            EnergySplit(1.0, 512.0)
        with pytest.raises(ValueError, match="total_energy"):
            EnergySplit(0.5, 0.0)


class TestS1dFrame:
    def setup_method(self):
        self.cfg = FrameConfig()
        self.rng = np.random.default_rng(7)

    def build(self, alpha=0.4):
        split = EnergySplit(alpha, float(self.cfg.grid_size))
        syms = qpsk_symbols(self.rng, int(np.count_nonzero(s1d_data_mask(self.cfg))))
        return build_s1d_frame(syms, self.cfg, split)

    def test_pilot_energy_is_alpha_of_total(self):
        grid, layout = self.build(0.3)
        np.testing.assert_allclose(np.sum(np.abs(layout.pilot_grid) ** 2),
                                   0.3 * 512.0, rtol=1e-12)

    def test_data_energy_is_the_complement(self):
        grid, layout = self.build(0.3)
        data_part = grid - layout.pilot_grid
        np.testing.assert_allclose(np.sum(np.abs(data_part) ** 2),
                                   0.7 * 512.0, rtol=1e-12)
        np.testing.assert_allclose(layout.data_energy, 0.7 * 512.0 / 384,
                                   rtol=1e-12)

    def test_pilot_fills_one_full_column(self):
        grid, layout = self.build()
        col = layout.pilot_grid[:, layout.pilot_column]
        assert np.all(np.abs(col) > 0)
        others = np.delete(layout.pilot_grid, layout.pilot_column, axis=1)
        assert np.all(others == 0)

    def test_data_occupies_top_rows_everywhere(self):
        grid, layout = self.build()
        assert layout.n_data_cells == 384
        assert np.all(layout.data_mask[:24, :])
        assert not np.any(layout.data_mask[24:, :])
        # bottom rows away from the pilot column stay empty
        assert np.all(grid[24:, 1:] == 0)

    def test_pilot_only_frame_has_flat_time_envelope(self):
        split = EnergySplit(0.4, 512.0)
        grid, layout = build_s1d_frame(np.zeros(384), self.cfg, split)
        tx = add_cp(idzt(grid), self.cfg.cp_len)
        assert papr(tx) < 1e-9

    def test_wrong_symbol_count_is_rejected(self):
        with pytest.raises(ValueError, match="expected 384"):
            build_s1d_frame(np.zeros(10), self.cfg, EnergySplit(0.4, 512.0))

    def test_pilot_column_bounds(self):
        with pytest.raises(ValueError, match="pilot_column"):
            build_s1d_frame(np.zeros(384), self.cfg, EnergySplit(0.4, 512.0),
                            pilot_column=16)


class TestEpFrame:
    def setup_method(self):
        self.cfg = FrameConfig()
        self.rng = np.random.default_rng(8)

    def build(self, alpha=0.2, loc=None):
        split = EnergySplit(alpha, float(self.cfg.grid_size))
        n = int(np.count_nonzero(ep_data_mask(self.cfg, loc)))
        return build_ep_frame(qpsk_symbols(self.rng, n), self.cfg, split,
                              pilot_location=loc)

    def test_single_pilot_cell_carries_all_pilot_energy(self):
        grid, layout = self.build(0.2)
        lp, kp = layout.pilot_location
        assert (lp, kp) == default_ep_location(self.cfg)
        np.testing.assert_allclose(abs(layout.pilot_grid[lp, kp]) ** 2,
                                   0.2 * 512.0, rtol=1e-12)
        assert np.count_nonzero(layout.pilot_grid) == 1

    def test_guard_box_and_zero_rows_are_empty(self):
        grid, layout = self.build()
        lp, kp = layout.pilot_location
        box = grid[lp - 8: lp + 9, kp - 3: kp + 5].copy()
        box[8, 3] = 0.0  # the pilot itself
        assert np.all(box == 0)
        assert np.all(grid[24:, :] == 0)

    def test_data_cell_count_and_scale(self):
        grid, layout = self.build(0.2)
        assert layout.n_data_cells == 248
        data_part = grid - layout.pilot_grid
        np.testing.assert_allclose(np.sum(np.abs(data_part) ** 2),
                                   0.8 * 512.0, rtol=1e-12)
        np.testing.assert_allclose(layout.data_energy, 0.8 * 512.0 / 248,
                                   rtol=1e-12)

    def test_every_pilot_shift_lands_inside_the_guard(self):
        _, layout = self.build()
        lp, kp = layout.pilot_location
        for ell in range(9):
            for k in range(-3, 5):
                m, c = lp + ell, (kp + k) % self.cfg.N
                assert not layout.data_mask[m, c]

    def test_off_grid_pilot_location_is_rejected(self):
        with pytest.raises(ValueError, match="guard"):
            ep_data_mask(self.cfg, (2, 8))
        with pytest.raises(ValueError, match="guard"):
            ep_data_mask(self.cfg, (8, 1))


class TestValidateConfig:
    def test_default_is_clean(self):
        assert validate_config(FrameConfig()) == []

    def test_violations_are_reported(self):
        assert validate_config(FrameConfig(M=8, ell_max=8))
        assert validate_config(FrameConfig(N=7, k_max=4))
        assert validate_config(FrameConfig(cp_len=4, ell_max=8))
        assert validate_config(FrameConfig(M=12, ell_max=7))
