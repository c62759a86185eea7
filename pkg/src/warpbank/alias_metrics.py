"""Signal-to-alias ratio metrics and supporting oracles.

The SAR of a decimated analysis bank is the ratio of desired subband
signal power to the power of the decimation images that fold into each
band's warped interval.  A Monte-Carlo time-domain estimator is provided
as an independent cross-check of the frequency-domain formulas, along
with the attainable-ERLE upper bound of a length-limited fullband model.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.signal import lfilter

from .warpcore import _coeff_array, analysis_band_response, band_edges


@dataclass
class SarReport:
    """Per-band and overall signal-to-alias power summary."""

    sigma2: np.ndarray        # per-band signal power
    alias2: np.ndarray        # per-band alias power (0 for undecimated bands)
    sar_db: np.ndarray        # per-band ratio in dB (+inf when alias2 == 0)
    overall_sar_db: float     # sum(sigma2)/sum(alias2) in dB

    @classmethod
    def from_powers(cls, sigma2, alias2):
        sigma2 = np.asarray(sigma2, dtype=float)
        alias2 = np.asarray(alias2, dtype=float)
        with np.errstate(divide="ignore"):
            sar_db = 10.0 * np.log10(np.where(alias2 > 0, sigma2 / np.where(alias2 > 0, alias2, 1.0), np.inf))
        total_alias = alias2.sum()
        overall = np.inf if total_alias == 0 else 10.0 * np.log10(sigma2.sum() / total_alias)
        return cls(sigma2=sigma2, alias2=alias2, sar_db=sar_db, overall_sar_db=float(overall))

    def as_dict(self):
        return {
            "sigma2": list(map(float, self.sigma2)),
            "alias2": list(map(float, self.alias2)),
            "sar_db": [None if not np.isfinite(v) else float(v) for v in self.sar_db],
            "overall_sar_db": float(self.overall_sar_db),
        }


def sar(spec, h, model=None, grid_n=2048):
    """Frequency-domain SAR of an analysis prototype under a source model.

    Per band i, signal power is D_i times the circle average of
    P_xx*|S|^2*|H_i|^2, and alias power is the average over the warped
    interval [Omega_l, Omega_h) of the summed decimation images
    sum_{d>=1} |L_i(e^{j(w - 2*pi*d)/D_i})|^2.  Bands with D_i = 1 carry
    zero alias power and report an infinite per-band SAR.
    """
    hc = _coeff_array(h, spec.M)
    M = spec.M
    sigma2 = np.zeros(M)
    alias2 = np.zeros(M)
    wg = -np.pi + (np.arange(grid_n) + 0.5) * 2.0 * np.pi / grid_n
    if model is None:
        Pg = np.ones(grid_n)
        weight = lambda nu: 1.0
    else:
        Pg = model.weight(wg)
        weight = model.weight
    for i in range(M):
        Di = spec.D[i]
        Hi = analysis_band_response(spec, hc, i, wg)
        sigma2[i] = Di * np.mean(Pg * np.abs(Hi) ** 2)
        if Di > 1:
            b = band_edges(spec, i)
            wp = b.Omega_l + (np.arange(grid_n) + 0.5) * (b.Omega_h - b.Omega_l) / grid_n
            acc = 0.0
            for d in range(1, Di):
                nu = (wp - 2.0 * np.pi * d) / Di
                Hin = analysis_band_response(spec, hc, i, nu)
                acc += np.mean(weight(nu) * np.abs(Hin) ** 2)
            alias2[i] = acc
    return SarReport.from_powers(sigma2, alias2)


@dataclass
class MonteCarloSar:
    """Measured subband powers from a seeded white-noise run."""

    sigma2: np.ndarray
    alias2: np.ndarray
    sar_db: np.ndarray
    overall_sar_db: float
    sigma2_stderr: np.ndarray
    alias2_stderr: np.ndarray


def _allpass_chain(x, mu, M):
    """States of the M-stage warped delay chain driven by x, shape (M, len(x))."""
    out = np.empty((M, x.size))
    s = np.asarray(x, dtype=float)
    out[0] = s
    for n in range(1, M):
        s = lfilter([-mu, 1.0], [1.0, -mu], s)
        out[n] = s
    return out


def sar_oracle_montecarlo(spec, h, seed=0, n_samples=1 << 20, n_blocks=16):
    """Time-domain SAR estimate from seeded white noise.

    Runs the analysis bank on white noise, then per band measures total
    subband power and the power inside the warped interval (via an FFT
    brick-wall mask); the out-of-interval remainder scaled by D_i is the
    alias power that decimation folds back.  Standard errors come from
    splitting the run into n_blocks segments.
    """
    hc = _coeff_array(h, spec.M)
    M = spec.M
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(n_samples)
    chain = _allpass_chain(x, spec.mu, M)
    sub = np.fft.fft(hc[:, None] * chain, axis=0, n=M)  # X_i = sum_n h(n) W^(ni) s_n
    freqs = 2.0 * np.pi * np.arange(n_samples) / n_samples
    sigma2 = np.zeros(M)
    alias2 = np.zeros(M)
    sig_se = np.zeros(M)
    ali_se = np.zeros(M)
    blk = n_samples // n_blocks
    bfreqs = 2.0 * np.pi * np.arange(blk) / blk
    F = np.fft.fft(sub, axis=1)
    for i in range(M):
        Di = spec.D[i]
        tot = np.mean(np.abs(sub[i]) ** 2)
        if Di == 1:
            sigma2[i] = tot
            continue
        b = band_edges(spec, i)
        lo, hi = b.Omega_l / Di, b.Omega_h / Di
        mask = np.mod(freqs - lo, 2.0 * np.pi) < (hi - lo)
        pin = np.sum(np.abs(F[i]) ** 2 * mask) / n_samples ** 2
        sigma2[i] = Di * tot
        alias2[i] = Di * (tot - pin)
        # blockwise spread for standard errors
        bmask = np.mod(bfreqs - lo, 2.0 * np.pi) < (hi - lo)
        seg = sub[i][: blk * n_blocks].reshape(n_blocks, blk)
        seg_tot = np.mean(np.abs(seg) ** 2, axis=1)
        Fb = np.fft.fft(seg, axis=1)
        seg_pin = np.sum(np.abs(Fb) ** 2 * bmask[None, :], axis=1) / blk ** 2
        sig_se[i] = Di * np.std(seg_tot, ddof=1) / np.sqrt(n_blocks)
        ali_se[i] = Di * np.std(seg_tot - seg_pin, ddof=1) / np.sqrt(n_blocks)
    rep = SarReport.from_powers(sigma2, alias2)
    return MonteCarloSar(sigma2=sigma2, alias2=alias2, sar_db=rep.sar_db,
                         overall_sar_db=rep.overall_sar_db,
                         sigma2_stderr=sig_se, alias2_stderr=ali_se)


def erle_upper_bound(s, N):
    """Attainable ERLE (dB) of an N-tap model of impulse response s.

    10*log10(total energy / tail energy beyond the first N taps); +inf when
    the tail is zero.
    """
    s = np.asarray(s, dtype=float)
    if N < 0:
        raise ValueError("model length must be nonnegative")
    total = float(np.sum(s ** 2))
    if total == 0.0:
        raise ValueError("impulse response is identically zero")
    tail = float(np.sum(s[N:] ** 2))
    if tail == 0.0:
        return np.inf
    return 10.0 * np.log10(total / tail)
