"""Geometry and frequency responses of allpass-warped DFT filter banks.

An M-band DFT filter bank is generalized by replacing every delay element
with a first-order allpass section, which warps the frequency axis while
keeping all subband filters unit-magnitude-preserving.  This module knows
how to evaluate the warping map, locate the warped band edges of each
decimated subband, and evaluate subband and overall transfer functions on
frequency grids.
"""

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq


def _check_mu(mu):
    if not np.isfinite(mu) or abs(mu) >= 1.0:
        raise ValueError("allpass coefficient must satisfy |mu| < 1, got %r" % (mu,))


@dataclass(frozen=True)
class BankSpec:
    """Configuration of a non-uniform warped DFT filter bank.

    M    -- number of bands
    mu   -- allpass warping coefficient, |mu| < 1
    D    -- per-band decimation factors (length M, each >= 1)
    """

    M: int
    mu: float
    D: tuple

    def __post_init__(self):
        if self.M < 1:
            raise ValueError("band count M must be positive")
        _check_mu(self.mu)
        D = tuple(int(d) for d in self.D)
        if len(D) != self.M:
            raise ValueError("need exactly M decimation factors")
        if any(d < 1 for d in D):
            raise ValueError("decimation factors must be >= 1")
        object.__setattr__(self, "D", D)

    @property
    def Dmax(self):
        return max(self.D)

    @property
    def W(self):
        """Complex modulation factor exp(-2*pi*j/M)."""
        return np.exp(-2j * np.pi / self.M)


@dataclass(frozen=True)
class PrototypeFilter:
    """Real M-tap prototype filter for the analysis or synthesis bank."""

    coeffs: tuple
    kind: str  # "analysis" | "synthesis"

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=float)
        if c.ndim != 1:
            raise ValueError("prototype coefficients must be a 1-D sequence")
        if not np.all(np.isfinite(c)):
            raise ValueError("prototype coefficients must be finite")
        if self.kind not in ("analysis", "synthesis"):
            raise ValueError("kind must be 'analysis' or 'synthesis'")
        object.__setattr__(self, "coeffs", tuple(float(v) for v in c))

    def asarray(self):
        return np.asarray(self.coeffs, dtype=float)

    def unit_sum(self):
        """Same filter rescaled so the coefficients sum to one."""
        c = self.asarray()
        s = c.sum()
        if s == 0.0:
            raise ValueError("cannot unit-sum normalize a zero-sum filter")
        return PrototypeFilter(tuple(c / s), self.kind)


def _coeff_array(proto, M=None, kind=None):
    """Accept a PrototypeFilter or a plain coefficient sequence."""
    if isinstance(proto, PrototypeFilter):
        if kind is not None and proto.kind != kind:
            raise ValueError("expected a %s prototype" % kind)
        c = proto.asarray()
    else:
        c = np.asarray(proto, dtype=float)
    if M is not None and len(c) != M:
        raise ValueError("prototype length %d does not match M=%d" % (len(c), M))
    return c


@dataclass(frozen=True)
class WarpedBand:
    """Warped edge frequencies of one decimated subband.

    omega_c is the band's modulation center on the unwarped axis, x the
    half-width such that the warped band spans exactly 2*pi/D[i] before
    scaling by D[i].  Omega_l/Omega_h are the warped-and-scaled edges used
    as integration limits for alias power.
    """

    index: int
    omega_c: float
    x: float
    Omega_l: float
    Omega_h: float


def allpass_response(mu, omega):
    """Frequency response A(e^jw) = (mu*e^jw + 1)/(e^jw + mu).

    Unit magnitude for every omega when |mu| < 1.
    """
    _check_mu(mu)
    e = np.exp(1j * np.asarray(omega, dtype=float))
    return (mu * e + 1.0) / (e + mu)


def band_allpass_response(spec, omega):
    """Allpass response used inside the subband filters of `spec`.

    The modulation convention of this bank evaluates the subband filters on
    the sign-flipped allpass coefficient; together with band centers at
    -2*pi*i/M this places band i's passband exactly on the warped interval
    reported by band_edges.
    """
    return allpass_response(-spec.mu, omega)


def warp_frequency(mu, omega):
    """Continuous, monotonically increasing frequency warp phi(omega).

    Equals the unwrapped negative phase of allpass_response(mu, .), with
    phi(0) = 0 and phi(pi) = pi, extended to all omega by odd symmetry and
    phi(omega + 2*pi) = phi(omega) + 2*pi.
    """
    _check_mu(mu)
    w = np.asarray(omega, dtype=float)
    k = np.round(w / (2.0 * np.pi))
    r = w - 2.0 * np.pi * k
    phi = (np.arctan2(np.sin(r), np.cos(r) + mu)
           - np.arctan2(mu * np.sin(r), 1.0 + mu * np.cos(r))
           + 2.0 * np.pi * k)
    return phi if phi.ndim else float(phi)


def band_center(spec, i):
    """Unwarped modulation center of band i in this bank's convention."""
    return -2.0 * np.pi * i / spec.M


def band_halfwidth(spec, i):
    """Half-width x such that the warped band i spans exactly 2*pi/D[i].

    Solves phi(omega_c + x) - phi(omega_c - x) = 2*pi/D[i] for x in (0, pi].
    The left side is continuous and strictly increasing in x, so the root is
    bracketed by (0, pi] whenever D[i] >= 1.
    """
    if not 0 <= i < spec.M:
        raise ValueError("band index out of range")
    Di = spec.D[i]
    if Di == 1:
        return np.pi
    wc = band_center(spec, i)
    mu = spec.mu
    target = 2.0 * np.pi / Di

    def f(x):
        return warp_frequency(mu, wc + x) - warp_frequency(mu, wc - x) - target

    try:
        return brentq(f, 1e-9, np.pi, xtol=1e-14)
    except ValueError as exc:  # pragma: no cover - cannot occur for valid spec
        raise RuntimeError("no bracket for band half-width of band %d" % i) from exc


def band_edges(spec, i):
    """Warped edge frequencies (Omega_l, Omega_h) of band i as a WarpedBand.

    Omega_l = D[i]*phi(omega_c - x) and Omega_h = Omega_l + 2*pi; the
    consistency of the upper edge with D[i]*phi(omega_c + x) is verified.
    """
    x = band_halfwidth(spec, i)
    wc = band_center(spec, i)
    Di = spec.D[i]
    lo = Di * warp_frequency(spec.mu, wc - x)
    hi = Di * warp_frequency(spec.mu, wc + x)
    if abs(hi - (lo + 2.0 * np.pi)) > 1e-6:
        raise RuntimeError("inconsistent warped edges for band %d" % i)
    return WarpedBand(index=i, omega_c=wc, x=x, Omega_l=lo, Omega_h=lo + 2.0 * np.pi)


def analysis_band_response(spec, h, i, omega):
    """Frequency response of analysis subband filter i on `omega`."""
    hc = _coeff_array(h, spec.M, kind="analysis" if isinstance(h, PrototypeFilter) else None)
    A = band_allpass_response(spec, omega)
    W = spec.W
    out = np.zeros_like(A)
    apow = np.ones_like(A)
    for n in range(spec.M):
        out = out + hc[n] * (W ** (n * i)) * apow
        apow = apow * A
    return out


def synthesis_band_response(spec, g, i, omega):
    """Frequency response of synthesis subband filter i on `omega`."""
    gc = _coeff_array(g, spec.M, kind="synthesis" if isinstance(g, PrototypeFilter) else None)
    A = band_allpass_response(spec, omega)
    W = spec.W
    M = spec.M
    out = np.zeros_like(A)
    apow = A ** (M - 1)
    Ainv = np.conj(A)  # unit-magnitude allpass: 1/A == conj(A)
    for n in range(M):
        out = out + gc[n] * (W ** (-n * i)) * apow
        apow = apow * Ainv
    return out


@dataclass
class OverallTransfer:
    """Per-phase transfer functions of the analysis-synthesis cascade.

    The cascade is linear but periodically time varying with period Dmax;
    T_a[l] is the alias component seen by an input impulse delayed by l,
    T_d the phase-independent distortion component, and T_l = T_d + T_a[l].
    """

    omega: np.ndarray
    T_d: np.ndarray
    T_a: np.ndarray  # shape (Dmax, len(omega)), complex

    def t_l(self):
        return self.T_d[None, :] + self.T_a


def overall_transfer(spec, h, g, omega):
    """Distortion/alias decomposition of the analysis-synthesis cascade.

    Returns an OverallTransfer with T_d = A^(M-1) * sum(h*g) and, for each
    input phase l in 0..Dmax-1, the alias residue
    T_a(w, l) = (1/M) * sum_i G_i(w) * sum_{d=1..D_i-1} W_{D_i}^{-d l} H_i(w - 2*pi*d/D_i).
    With all D[i] = 1 the alias part is identically zero.
    """
    hc = _coeff_array(h, spec.M)
    gc = _coeff_array(g, spec.M)
    w = np.asarray(omega, dtype=float)
    M = spec.M
    Dmax = spec.Dmax
    A = band_allpass_response(spec, w)
    Td = A ** (M - 1) * float(hc @ gc)
    Ta = np.zeros((Dmax, w.size), dtype=complex)
    for i in range(M):
        Di = spec.D[i]
        if Di == 1:
            continue
        Gi = synthesis_band_response(spec, gc, i, w)
        for d in range(1, Di):
            prod = Gi * analysis_band_response(spec, hc, i, w - 2.0 * np.pi * d / Di) / M
            for l in range(Dmax):
                Ta[l] += np.exp(2j * np.pi * d * l / Di) * prod
    return OverallTransfer(omega=w, T_d=Td, T_a=Ta)
