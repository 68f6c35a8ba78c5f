import numpy as np
import pytest

import traderank.spectrum as spectrum_module
from helpers import money_from_array, random_money
from traderank.google_matrix import (
    Direction,
    StochasticMatrix,
    build_google,
    build_stochastic,
    stochastic_from_flows,
)
from traderank.spectrum import (
    ScalingMismatchError,
    Spectrum,
    detect_quasi_degenerate,
    full_spectrum,
    verify_alpha_scaling,
)
from traderank.trade_graph import load_flows


def two_community_matrix():
    """Two disconnected triangles; each block relaxes on its own."""
    block = np.ones((3, 3)) - np.eye(3)
    values = np.zeros((6, 6))
    values[:3, :3] = block
    values[3:, 3:] = block
    return money_from_array(values)


def google_of(values, alpha):
    return build_google(stochastic_from_flows(np.asarray(values, dtype=float)), alpha)


class TestFullSpectrum:
    def test_uniform_matrix_has_single_unit_eigenvalue(self):
        g = google_of(np.zeros((8, 8)) + np.eye(8) * 0.0, alpha=0.5)
        # All columns dangling, so the damped matrix is exactly uniform.
        sp = full_spectrum(g)
        assert abs(sp.leading - 1.0) < 1e-12
        assert np.all(np.abs(sp.eigenvalues[1:]) < 1e-12)

    def test_flip_matrix_spectrum(self):
        g = google_of([[0.0, 1.0], [1.0, 0.0]], alpha=1.0)
        sp = full_spectrum(g)
        assert sp.eigenvalues.tolist() == pytest.approx([1.0 + 0.0j, -1.0 + 0.0j])

    def test_two_community_multiset(self):
        g = build_google(build_stochastic(two_community_matrix(), Direction.DIRECT), 1.0)
        sp = full_spectrum(g)
        expected = sorted([1.0, 1.0, -0.5, -0.5, -0.5, -0.5])
        assert sorted(sp.eigenvalues.real.tolist()) == pytest.approx(expected, abs=1e-10)
        assert np.abs(sp.eigenvalues.imag).max() < 1e-10

    def test_sorted_by_descending_modulus(self):
        rng = np.random.default_rng(51)
        sp = full_spectrum(google_of(random_money(15, rng), alpha=0.85))
        moduli = np.abs(sp.eigenvalues)
        assert np.all(moduli[:-1] >= moduli[1:] - 1e-15)

    def test_conjugate_pairs_present(self):
        rng = np.random.default_rng(53)
        sp = full_spectrum(google_of(random_money(12, rng), alpha=0.85))
        complex_ones = sp.eigenvalues[np.abs(sp.eigenvalues.imag) > 1e-12]
        for value in complex_ones:
            assert np.abs(complex_ones - np.conj(value)).min() < 1e-10

    def test_eigenvalue_sum_equals_trace(self):
        rng = np.random.default_rng(54)
        g = google_of(random_money(20, rng, density=0.4), alpha=0.85)
        sp = full_spectrum(g)
        assert abs(sp.eigenvalues.sum() - np.trace(g.effective())) < 1e-8

    def test_leading_close_to_one_for_positive_matrix(self):
        rng = np.random.default_rng(55)
        sp = full_spectrum(google_of(random_money(25, rng), alpha=0.5))
        assert abs(sp.leading - 1.0) < 1e-10

    def test_size_guard(self, monkeypatch):
        rng = np.random.default_rng(56)
        g = google_of(random_money(4, rng), alpha=0.5)
        monkeypatch.setattr(spectrum_module, "MAX_DENSE_N", 3)
        with pytest.raises(ValueError):
            full_spectrum(g)

    def test_year_and_commodity_carried(self):
        rng = np.random.default_rng(57)
        sp = full_spectrum(google_of(random_money(4, rng), 0.5), year=2008, commodity="TOTAL")
        assert (sp.year, sp.commodity) == (2008, "TOTAL")

    def test_three_country_alpha_half_values(self, three_country_csv):
        matrix = load_flows(three_country_csv, year=2008, commodity="TOTAL")
        sp = full_spectrum(build_google(build_stochastic(matrix, Direction.DIRECT), 0.5))
        # Characteristic roots computed independently from the 3x3 matrix.
        coeffs = np.poly(build_google(build_stochastic(matrix, Direction.DIRECT), 0.5).effective())
        reference = np.roots(coeffs)
        for value in sp.eigenvalues:
            assert np.abs(reference - value).min() < 1e-12


class TestAlphaScaling:
    def test_random_matrices_follow_the_law(self):
        rng = np.random.default_rng(61)
        for alpha in (0.5, 0.85):
            for _ in range(10):
                s = stochastic_from_flows(random_money(10, rng, density=0.6))
                report = verify_alpha_scaling(s, alpha)
                assert report.max_mismatch < 1e-8
                assert report.alpha == alpha

    def test_alpha_one_is_nearly_exact(self):
        rng = np.random.default_rng(62)
        s = stochastic_from_flows(random_money(9, rng))
        report = verify_alpha_scaling(s, alpha=1.0)
        assert report.max_mismatch < 1e-12

    def test_uniform_stochastic(self):
        s = StochasticMatrix(
            columns=np.full((5, 5), 0.2), dangling=np.zeros(5, dtype=bool)
        )
        report = verify_alpha_scaling(s, alpha=0.5)
        assert report.max_mismatch < 1e-12

    def test_zero_tolerance_raises(self):
        rng = np.random.default_rng(63)
        s = stochastic_from_flows(random_money(8, rng))
        with pytest.raises(ScalingMismatchError):
            verify_alpha_scaling(s, alpha=0.5, tolerance=0.0)


class TestQuasiDegenerate:
    def test_two_communities_flag_exactly_two(self):
        g = build_google(build_stochastic(two_community_matrix(), Direction.DIRECT), 1.0)
        flagged = detect_quasi_degenerate(full_spectrum(g), gap_threshold=0.01)
        assert flagged.size == 2
        assert np.abs(flagged - 1.0).max() < 1e-10

    def test_connected_network_flags_only_the_leader(self):
        rng = np.random.default_rng(71)
        g = google_of(random_money(10, rng), alpha=1.0)
        flagged = detect_quasi_degenerate(full_spectrum(g), gap_threshold=0.01)
        assert flagged.size == 1

    def test_period_two_modes_count_as_slow(self):
        # A pure swap never mixes, so its -1 mode sits on the unit circle
        # and is picked up alongside the stationary one.
        g = google_of([[0.0, 1.0], [1.0, 0.0]], alpha=1.0)
        flagged = detect_quasi_degenerate(full_spectrum(g), gap_threshold=0.01)
        assert flagged.size == 2

    def test_requires_undamped_spectrum(self):
        rng = np.random.default_rng(72)
        sp = full_spectrum(google_of(random_money(5, rng), alpha=0.5))
        with pytest.raises(ValueError):
            detect_quasi_degenerate(sp)

    @pytest.mark.parametrize("gap", [0.0, 1.0, -0.1])
    def test_gap_threshold_validated(self, gap):
        rng = np.random.default_rng(73)
        sp = full_spectrum(google_of(random_money(5, rng), alpha=1.0))
        with pytest.raises(ValueError):
            detect_quasi_degenerate(sp, gap_threshold=gap)

    def test_wider_gap_flags_more(self):
        g = google_of([[0.0, 1.0, 0.0], [1.0, 0.0, 1.0], [0.0, 0.0, 0.0]], alpha=1.0)
        sp = full_spectrum(g)
        narrow = detect_quasi_degenerate(sp, gap_threshold=0.01)
        wide = detect_quasi_degenerate(sp, gap_threshold=0.99)
        assert narrow.size <= wide.size


class TestSpectrumValue:
    def test_real_input_coerced_to_complex(self):
        sp = Spectrum(eigenvalues=np.array([1.0, 0.5]), alpha=0.5)
        assert sp.eigenvalues.dtype == np.complex128

    def test_leading_is_first(self):
        sp = Spectrum(eigenvalues=np.array([1.0 + 0.0j, 0.3 + 0.1j]), alpha=0.5)
        assert sp.leading == 1.0 + 0.0j
        assert sp.n == 2
