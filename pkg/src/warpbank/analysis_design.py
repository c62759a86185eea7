"""Analysis-prototype design by linear programming on magnitude-squared coefficients.

The squared magnitude of every subband filter is affine in the symmetric
coefficient vector c(k), so minimizing total alias power at fixed total
signal power is a linear program.  The minimum-phase prototype is then
recovered from the optimal magnitude, either through the real cepstrum or,
when the magnitude touches zero on the unit circle, through polynomial
spectral factorization.
"""

from dataclasses import dataclass

import numpy as np
from scipy.signal import firwin

from . import convexsolve
from .convexsolve import LinearProgram, SolverFailure
from .warpcore import PrototypeFilter, band_allpass_response, band_edges


@dataclass
class SourceModel:
    """Gridded input power spectrum and unknown-system power spectrum.

    pxx holds P_xx(e^jw) samples and s2 holds |S(e^jw)|^2 samples, both on
    a uniform grid over [-pi, pi).  The product pxx*s2 weights every power
    integral in the design and metric computations.
    """

    omega: np.ndarray
    pxx: np.ndarray
    s2: np.ndarray

    def __post_init__(self):
        self.omega = np.asarray(self.omega, dtype=float)
        self.pxx = np.asarray(self.pxx, dtype=float)
        self.s2 = np.asarray(self.s2, dtype=float)
        if not (self.omega.size == self.pxx.size == self.s2.size):
            raise ValueError("model grids must have equal length")
        if np.any(self.pxx < 0) or np.any(self.s2 < 0):
            raise ValueError("power spectra must be nonnegative")

    @classmethod
    def white(cls, n=1024):
        w = _midpoint_grid(n)
        return cls(w, np.ones(n), np.ones(n))

    @classmethod
    def from_fir(cls, taps, n=2048):
        """Model a source shaped by an FIR filter driven by unit white noise."""
        taps = np.asarray(taps, dtype=float)
        w = _midpoint_grid(n)
        resp = np.sum(taps[None, :] * np.exp(-1j * np.outer(w, np.arange(taps.size))), axis=1)
        return cls(w, np.abs(resp) ** 2, np.ones(n))

    @classmethod
    def colored_default(cls, n=2048):
        """Low-pass colored-noise source: order-5 windowed-sinc FIR, unit energy."""
        return cls.from_fir(default_coloring_filter(), n=n)

    @classmethod
    def speech_like(cls, corner_hz=500.0, sample_rate=16000, n=2048):
        """Synthetic speech-weighted source: flat to corner_hz, -6 dB/octave above."""
        w = _midpoint_grid(n)
        f = np.abs(w) / np.pi * (sample_rate / 2.0)
        amp = np.where(f <= corner_hz, 1.0, corner_hz / np.maximum(f, corner_hz))
        return cls(w, amp ** 2, np.ones(n))

    @property
    def is_white(self):
        return bool(np.all(self.pxx == self.pxx.flat[0]) and np.all(self.s2 == self.s2.flat[0])
                    and self.pxx.flat[0] == 1.0 and self.s2.flat[0] == 1.0)

    def weight(self, nu):
        """P_xx * |S|^2 at arbitrary frequencies, interpolated 2*pi-periodically."""
        nu = np.asarray(nu, dtype=float)
        if self.is_white:
            return np.ones_like(nu)
        vals = self.pxx * self.s2
        return np.interp(nu, self.omega, vals, period=2.0 * np.pi)


def default_coloring_filter():
    """Order-5 lowpass FIR (cutoff 0.25*pi, Hamming window), unit energy."""
    b = firwin(6, 0.25, window="hamming")
    return b / np.sqrt(np.sum(b ** 2))


def _midpoint_grid(n, lo=-np.pi, hi=np.pi):
    return lo + (np.arange(n) + 0.5) * (hi - lo) / n


@dataclass
class MagnitudeSpec:
    """Symmetric magnitude-squared coefficients c(k), c(-k) = c(k)."""

    c: np.ndarray

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float)

    def band_magnitude(self, spec, i, omega):
        """Reconstructed |H_i(e^jw)|^2 = c(0) + 2*sum_k c(k)*Re[W^(ik) A^k]."""
        A = band_allpass_response(spec, omega)
        W = spec.W
        out = np.full_like(np.asarray(omega, dtype=float), self.c[0])
        apow = A.copy()
        for k in range(1, self.c.size):
            out = out + 2.0 * self.c[k] * np.real(W ** (i * k) * apow)
            apow = apow * A
        return out


@dataclass
class AliasLP:
    """Assembled linear program for the magnitude-coefficient design.

    A_mat stacks the per-band alias-power rows, B_mat the per-band signal-
    power rows of the bands entering the objective/equality; pos_mat stacks
    unweighted magnitude rows of all bands for the positivity floor.
    """

    spec: object
    bands: tuple
    grid_n: int
    boundary_grid_n: int
    A_mat: np.ndarray
    B_mat: np.ndarray
    pos_mat: np.ndarray
    eq_constant: float
    epsilon: float = 1e-6

    @property
    def cost(self):
        return self.A_mat.sum(axis=0)

    @property
    def eq_row(self):
        return self.B_mat.sum(axis=0)

    def linear_program(self):
        rows = self.pos_mat.shape[0]
        rhs = np.full(rows, self.epsilon * self.eq_constant / rows)
        return LinearProgram(self.cost, self.eq_row, self.eq_constant, self.pos_mat, rhs)


def build_alias_lp(spec, model=None, grid_n=256, bands=None, boundary_grid_n=None,
                   epsilon=1e-6):
    """Discretize alias power (objective) and signal power (equality) in c.

    Per band the alias rows sample the warped interval [Omega_l, Omega_h)
    at grid_n midpoints with the decimation-image sum folded into each
    entry; the signal rows sample the full circle at boundary_grid_n
    midpoints.  The first column carries half weight because c(0) enters
    the magnitude reconstruction once while c(k), k >= 1 enter twice.
    """
    if model is None:
        model = SourceModel.white()
    if bands is None:
        bands = tuple(range(spec.M))
    bands = tuple(bands)
    if boundary_grid_n is None:
        boundary_grid_n = 2 * grid_n
    M = spec.M
    W = spec.W
    N = grid_n
    NB = boundary_grid_n

    a_rows = []
    for i in bands:
        Di = spec.D[i]
        Ai = np.zeros((N, M))
        if Di > 1:
            b = band_edges(spec, i)
            wp = b.Omega_l + (np.arange(N) + 0.5) * (b.Omega_h - b.Omega_l) / N
            for d in range(1, Di):
                nu = (wp - 2.0 * np.pi * d) / Di
                P = model.weight(nu)
                Ap = band_allpass_response(spec, nu)
                Ai[:, 0] += P
                apow = Ap.copy()
                for q in range(1, M):
                    Ai[:, q] += 2.0 * P * np.real(W ** (i * q) * apow)
                    apow = apow * Ap
        a_rows.append(Ai / N)
    A_mat = np.vstack(a_rows)

    wb = _midpoint_grid(NB)
    Pb = model.weight(wb)
    Apb = band_allpass_response(spec, wb)

    def signal_rows(i, P):
        Bi = np.empty((NB, M))
        Bi[:, 0] = 0.5 * P
        apow = Apb.copy()
        for q in range(1, M):
            Bi[:, q] = P * np.real(W ** (i * q) * apow)
            apow = apow * Apb
        return Bi * (2.0 * spec.D[i] / NB)

    B_mat = np.vstack([signal_rows(i, Pb) for i in bands])
    pos_mat = np.vstack([signal_rows(i, 1.0) for i in range(M)])
    eq_constant = float(B_mat.sum(axis=0)[0])  # total signal power of the flat magnitude
    return AliasLP(spec=spec, bands=bands, grid_n=N, boundary_grid_n=NB,
                   A_mat=A_mat, B_mat=B_mat, pos_mat=pos_mat,
                   eq_constant=eq_constant, epsilon=epsilon)


# ---------------------------------------------------------------------------
# minimum-phase recovery from magnitude-squared coefficients

def magnitude_samples(c, n):
    """|H(e^jw)|^2 = c(0) + 2*sum_k c(k)*cos(k*w) on an n-point circle grid."""
    c = np.asarray(c, dtype=float)
    w = 2.0 * np.pi * np.arange(n) / n
    out = np.full(n, c[0])
    for k in range(1, c.size):
        out += 2.0 * c[k] * np.cos(k * w)
    return out


def minimum_phase_cepstral(c, grid_n=8192):
    """Recover minimum-phase taps from c via the real cepstrum.

    Samples the magnitude on grid_n points, floors it at 1e-10 before the
    log, folds the cepstrum causally, exponentiates and truncates to M taps.
    """
    c = np.asarray(c, dtype=float)
    M = c.size
    mag2 = np.maximum(magnitude_samples(c, grid_n), 1e-10)
    log_mag = 0.5 * np.log(mag2)
    kappa = np.real(np.fft.ifft(log_mag))
    folded = np.zeros(grid_n)
    half = grid_n // 2
    folded[0] = kappa[0]
    folded[1:half] = 2.0 * kappa[1:half]
    if grid_n % 2 == 0:
        folded[half] = kappa[half]
    h_full = np.real(np.fft.ifft(np.exp(np.fft.fft(folded))))
    return h_full[:M]


def minimum_phase_rootfact(c):
    """Recover minimum-phase taps by factoring the magnitude polynomial.

    The symmetric sequence c(-(M-1))..c(M-1) factors as q(z)*q(1/z), so its
    roots come in reciprocal-conjugate pairs.  Each root is matched with the
    remaining root closest to its reciprocal conjugate and the member of
    smaller modulus is kept; this stays correct when double roots on the
    unit circle split tangentially, where plain modulus sorting misassigns
    them.
    """
    c = np.asarray(c, dtype=float)
    remaining = list(np.roots(np.concatenate([c[::-1], c[1:]])))
    kept = []
    while remaining:
        a = remaining.pop(0)
        if a == 0:  # the reciprocal partner of a zero root is at infinity
            j = int(np.argmax([abs(b) for b in remaining]))
        else:
            target = 1.0 / np.conj(a)
            j = int(np.argmin([abs(b - target) for b in remaining]))
        b = remaining.pop(j)
        kept.append(a if abs(a) <= abs(b) else b)
    return np.real(np.poly(kept))[::-1]


def magnitude_match_error(h, c, grid_n=4096):
    """Max deviation of |H|^2 from the c-reconstruction after scale fitting."""
    h = np.asarray(h, dtype=float)
    mag_h = np.abs(np.fft.fft(h, grid_n)) ** 2
    recon = magnitude_samples(c, grid_n)
    denom = float(mag_h @ mag_h)
    if denom == 0.0:
        return np.inf
    scale = float(mag_h @ recon) / denom
    return float(np.max(np.abs(scale * mag_h - recon)) / max(np.max(recon), 1e-300))


def recover_minimum_phase(c, tol=1e-4, score=None):
    """Minimum-phase prototype from magnitude coefficients, unit-sum normalized.

    Tries the cepstral route first (retrying once on a doubled grid).  The
    M-tap truncation loses accuracy when the optimal magnitude has zeros on
    the unit circle, so when the cepstral candidate misses the tolerance a
    root-based spectral factorization is computed as well.  The magnitude
    mismatch alone cannot rank the two candidates reliably (both routes
    degrade differently near the unit circle), so when a ``score`` callable
    is supplied the admissible candidate with the highest score wins;
    otherwise root factorization is preferred.
    """
    c = np.asarray(c, dtype=float)
    h = err = None
    for grid_n in (8192, 16384):
        h = minimum_phase_cepstral(c, grid_n)
        err = magnitude_match_error(h, c)
        if err <= tol:
            break
    if err > tol:
        candidates = [(_normalized(h), err)]
        h_r = minimum_phase_rootfact(c)
        candidates.append((_normalized(h_r), magnitude_match_error(h_r, c)))
        admissible = [(hc, e) for hc, e in candidates if e <= 100 * tol]
        if not admissible:
            raise SolverFailure(
                "minimum-phase recovery failed: magnitude mismatch %.3g"
                % min(e for _, e in candidates))
        if score is not None and len(admissible) > 1:
            return max(admissible, key=lambda pair: score(pair[0]))[0]
        # Without a score, keep the root factorization when it is admissible;
        # its factor is exact for well-separated roots.
        return admissible[-1][0]
    return _normalized(h)


def _normalized(h):
    s = h.sum()
    if s == 0.0:
        raise SolverFailure("recovered prototype has zero coefficient sum")
    return h / s


# ---------------------------------------------------------------------------
# design drivers

@dataclass
class AnalysisDesign:
    """Result of an analysis-prototype design run."""

    magnitude: MagnitudeSpec
    prototype: PrototypeFilter
    objective: float
    lp_result: object

    def __iter__(self):
        return iter((self.magnitude, self.prototype))


def _run_design(spec, model, grid_n, bands, method, epsilon, boundary_grid_n):
    lp = build_alias_lp(spec, model, grid_n=grid_n, bands=bands,
                        boundary_grid_n=boundary_grid_n, epsilon=epsilon)
    res = convexsolve.solve_lp(lp.linear_program(), method=method)
    if res.status != "optimal":
        raise SolverFailure("magnitude LP %s: %s" % (res.status, res.message))

    def sar_score(h_cand):
        from .alias_metrics import sar
        rep = sar(spec, PrototypeFilter(tuple(h_cand), "analysis"), model)
        return rep.overall_sar_db

    h = recover_minimum_phase(res.x, score=sar_score)
    return AnalysisDesign(
        magnitude=MagnitudeSpec(res.x),
        prototype=PrototypeFilter(tuple(h), "analysis"),
        objective=res.objective,
        lp_result=res,
    )


def solve_analysis(spec, model=None, grid_n=256, epsilon=1e-6, boundary_grid_n=None):
    """Design the alias-minimizing analysis prototype over all bands."""
    return _run_design(spec, model, grid_n, None, "highs", epsilon, boundary_grid_n)


def solve_analysis_method_b(spec, model=None, grid_n=256, epsilon=1e-6,
                            boundary_grid_n=None):
    """Baseline design that optimizes only the widest band (index M/2).

    Requires mu > 0, which makes band M/2 the widest one.  The restricted
    objective leaves the optimum massively degenerate, so the interior-point
    backend is used to obtain the central solution rather than an arbitrary
    vertex.
    """
    if spec.mu <= 0:
        raise ValueError("the widest-band baseline requires mu > 0")
    return _run_design(spec, model, grid_n, [spec.M // 2], "highs-ipm",
                       epsilon, boundary_grid_n)
