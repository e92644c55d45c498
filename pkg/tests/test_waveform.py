"""Effective bandwidth, OFDM draws, and the SNR convention."""

import numpy as np
import pytest

from isac_lab import (
    Constellation,
    EmptySpectrum,
    OfdmSpec,
    draw_ofdm_beta,
    effective_bandwidth,
    flat_comb_beta,
    sigma_from_snr,
)


def test_flat_spectrum_second_moment():
    w = 48e6
    f = np.linspace(-w / 2, w / 2, 4801)
    beta = effective_bandwidth(f, np.ones_like(f))
    # discrete uniform comb: exact closed form, approaching W/sqrt(12)
    n = f.size
    exact = (w / (n - 1)) * np.sqrt((n**2 - 1) / 12.0)
    assert beta == pytest.approx(exact, rel=1e-12)
    assert beta == pytest.approx(w / np.sqrt(12.0), rel=1e-3)
    assert beta == pytest.approx(13.8564e6, rel=2e-3)


def test_single_tone_and_scale_invariance():
    assert effective_bandwidth([0.0], [3.0]) == 0.0
    f = np.linspace(-1e6, 1e6, 101)
    p = np.random.default_rng(0).uniform(0.0, 1.0, size=f.size)
    b1 = effective_bandwidth(f, p)
    b2 = effective_bandwidth(f, 7.0 * p)
    assert b1 == pytest.approx(b2, rel=1e-14)
    # frequency translation invariance (centroid-relative)
    b3 = effective_bandwidth(f + 5e9, p)
    assert b3 == pytest.approx(b1, rel=1e-9)


def test_empty_spectrum_raises():
    with pytest.raises(EmptySpectrum):
        effective_bandwidth([1.0, 2.0], [0.0, 0.0])
    with pytest.raises(ValueError):
        effective_bandwidth([1.0, 2.0], [1.0, -1.0])


def test_constant_modulus_comb_matches_closed_form():
    spec = OfdmSpec(n_sub=1024, spacing=1.62e3, constellation=Constellation.CONSTANT)
    rng = np.random.default_rng(0)
    beta = draw_ofdm_beta(spec, rng)
    assert beta == pytest.approx(flat_comb_beta(spec), rel=1e-9)
    assert flat_comb_beta(spec) == pytest.approx(478.9e3, rel=1e-3)


def test_single_subcarrier_mask_gives_zero():
    mask = np.zeros(64, dtype=bool)
    mask[10] = True
    spec = OfdmSpec(n_sub=64, spacing=1.62e3, active_mask=mask)
    assert draw_ofdm_beta(spec, np.random.default_rng(1)) == 0.0


def test_qam16_draw_mean_is_stable_between_batches():
    spec = OfdmSpec(n_sub=1024, spacing=1.62e3)
    n = 5000
    means = []
    for seed in (11, 12):
        rng = np.random.default_rng(seed)
        draws = np.fromiter((draw_ofdm_beta(spec, rng) for _ in range(n)), float, count=n)
        means.append(draws.mean())
    assert abs(means[0] - means[1]) / means[0] < 0.005


def test_sigma_from_snr_convention():
    assert sigma_from_snr(0.0) == pytest.approx(1.0)
    assert sigma_from_snr(20.0) == pytest.approx(0.01)
    assert sigma_from_snr(-10.0) == pytest.approx(10.0)
    assert sigma_from_snr(0.0, alpha=2.0, e_s=3.0) == pytest.approx(12.0)
