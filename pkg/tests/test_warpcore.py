"""Frequency-warping core: allpass responses, band geometry, overall transfer."""

import numpy as np
import pytest

from warpbank import reference as ref
from warpbank.aec_sim import analysis_bank, synthesis_bank
from warpbank.warpcore import (
    BankSpec,
    PrototypeFilter,
    allpass_response,
    band_allpass_response,
    band_center,
    band_edges,
    band_halfwidth,
    analysis_band_response,
    synthesis_band_response,
    overall_transfer,
    warp_frequency,
)


def test_bankspec_validation():
    with pytest.raises(ValueError):
        BankSpec(M=16, mu=1.2, D=(2,) * 16)
    with pytest.raises(ValueError):
        BankSpec(M=16, mu=0.5, D=(2,) * 15)
    with pytest.raises(ValueError):
        BankSpec(M=16, mu=0.5, D=(0,) + (2,) * 15)


def test_prototype_unit_sum():
    p = PrototypeFilter((2.0, 1.0, 1.0), "analysis")
    q = p.unit_sum()
    assert abs(sum(q.coeffs) - 1.0) < 1e-15
    assert q.kind == "analysis"


def test_allpass_has_unit_magnitude():
    w = np.linspace(-np.pi, np.pi, 4097)
    for mu in (-0.7, 0.0, 0.5, 0.9):
        assert np.max(np.abs(np.abs(allpass_response(mu, w)) - 1.0)) < 1e-12


def test_band_allpass_uses_negated_coefficient(spec1):
    w = np.linspace(-np.pi, np.pi, 257)
    np.testing.assert_allclose(band_allpass_response(spec1, w),
                               allpass_response(-spec1.mu, w), atol=1e-14)


def test_warp_is_monotone_and_fixes_endpoints():
    x = np.linspace(0.0, np.pi, 4096)
    for mu in (-0.5, 0.3, 0.5, 0.9):
        phi = warp_frequency(mu, x)
        assert np.all(np.diff(phi) > 0)
        assert abs(phi[0]) < 1e-12
        assert abs(phi[-1] - np.pi) < 1e-12


def test_warp_is_odd_and_unwraps():
    x = np.linspace(-3 * np.pi, 3 * np.pi, 999)
    phi = warp_frequency(0.5, x)
    np.testing.assert_allclose(phi, -warp_frequency(0.5, -x), atol=1e-12)
    # 2-pi shifts of the argument shift the unwrapped warp by 2 pi
    np.testing.assert_allclose(warp_frequency(0.5, x + 2 * np.pi), phi + 2 * np.pi,
                               atol=1e-10)


def test_band_edges_cover_the_requested_warped_width(spec2):
    for i in range(spec2.M):
        b = band_edges(spec2, i)
        width = (warp_frequency(spec2.mu, b.omega_c + b.x)
                 - warp_frequency(spec2.mu, b.omega_c - b.x))
        assert abs(width - 2 * np.pi / spec2.D[i]) < 1e-9
        # scaled edges always span one full period
        assert abs((b.Omega_h - b.Omega_l) - 2 * np.pi) < 1e-12
        assert abs(b.Omega_l
                   - spec2.D[i] * warp_frequency(spec2.mu, b.omega_c - b.x)) < 1e-12
        assert b.omega_c == band_center(spec2, i)


def test_band_halfwidth_full_band_when_not_decimated():
    spec = BankSpec(M=4, mu=0.5, D=(1, 1, 1, 1))
    for i in range(4):
        assert abs(band_halfwidth(spec, i) - np.pi) < 1e-12


@pytest.mark.parametrize("name", ["spec1", "spec2"])
def test_band_edges_match_reference_tables(name):
    spec = ref.spec_by_name(name)
    table = ref.reference_edges(name)
    for i in range(spec.M):
        b = band_edges(spec, i)
        assert abs(b.Omega_l - table[i, 0]) < 1e-3
        assert abs(b.Omega_h - table[i, 1]) < 1e-3


def test_analysis_response_is_dft_modulated_chain(spec1, rng):
    # band i response equals sum_n h(n) W^(in) A~(w)^n with the band allpass
    h = rng.standard_normal(spec1.M)
    w = np.linspace(-np.pi, np.pi, 101)
    A = band_allpass_response(spec1, w)
    for i in (0, 3, 11):
        expected = np.zeros_like(w, dtype=complex)
        for n in range(spec1.M):
            expected += h[n] * spec1.W ** (i * n) * A ** n
        np.testing.assert_allclose(analysis_band_response(spec1, h, i, w),
                                   expected, atol=1e-12)


def test_synthesis_response_uses_inverse_chain(spec1, rng):
    g = rng.standard_normal(spec1.M)
    w = np.linspace(-np.pi, np.pi, 101)
    A = band_allpass_response(spec1, w)
    for i in (0, 5):
        expected = np.zeros_like(w, dtype=complex)
        for n in range(spec1.M):
            expected += g[n] * np.conj(spec1.W) ** (i * n) * A ** (spec1.M - 1 - n)
        np.testing.assert_allclose(synthesis_band_response(spec1, g, i, w),
                                   expected, atol=1e-12)


def _chain_oracle_transfer(spec, h, g, omega, l, T=4096):
    """Overall response to a unit impulse entering at time offset l,
    measured through the full analyze/decimate/expand/synthesize chain."""
    x = np.zeros(T)
    x[l] = 1.0
    X = analysis_bank(spec, x, h)
    E = np.zeros_like(X)
    for i, Di in enumerate(spec.D):
        E[i, ::Di] = Di * X[i, ::Di]
    y = synthesis_bank(spec, E, g, real=False) / spec.M
    return np.fft.fft(y) * np.exp(1j * omega * l)


@pytest.mark.parametrize("D", [(2, 2, 2, 2), (4, 2, 2, 4)])
def test_overall_transfer_matches_time_domain_chain(D, rng):
    spec = BankSpec(M=4, mu=0.5, D=D)
    h = rng.standard_normal(4) * 0.2 + np.array([1.0, 0.5, 0.2, 0.1])
    g = rng.standard_normal(4) * 0.2 + np.array([1.0, 0.4, 0.1, 0.05])
    T = 4096
    omega = 2 * np.pi * np.arange(T) / T
    ot = overall_transfer(spec, h, g, omega)
    tl = ot.t_l()
    assert tl.shape == (spec.Dmax, T)
    for l in range(spec.Dmax):
        oracle = _chain_oracle_transfer(spec, h, g, omega, l, T)
        # ignore the tail where the impulse response is truncated
        assert np.max(np.abs(tl[l] - oracle)) < 1e-8


def test_overall_transfer_distortion_term_is_allpass_power(spec1):
    h = np.zeros(spec1.M)
    h[0] = 1.0
    g = np.zeros(spec1.M)
    g[0] = 1.0
    w = np.linspace(-np.pi, np.pi, 64)
    ot = overall_transfer(spec1, h, g, w)
    np.testing.assert_allclose(np.abs(ot.T_d), 1.0, atol=1e-12)
