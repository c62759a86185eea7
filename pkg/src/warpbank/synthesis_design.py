"""Synthesis-prototype design: minimize alias power of the full cascade.

The alias component of the analysis-synthesis cascade is linear in the
synthesis taps g, so its total power over all input phases is a quadratic
form g' S g.  The design solves that quadratic form under the distortion
constraint h' g = 1, with a small ridge for conditioning.
"""

from dataclasses import dataclass

import numpy as np

from . import convexsolve
from .convexsolve import EqualityQP
from .warpcore import PrototypeFilter, _coeff_array, analysis_band_response, \
    band_allpass_response


@dataclass
class SynthesisQP:
    """Accumulated alias quadratic form with its distortion constraint."""

    S_mat: np.ndarray
    h_vec: np.ndarray
    delta: float

    def __post_init__(self):
        self.S_mat = np.asarray(self.S_mat, dtype=float)
        self.h_vec = np.asarray(self.h_vec, dtype=float)
        if self.S_mat.shape != (self.h_vec.size, self.h_vec.size):
            raise ValueError("quadratic form does not match prototype length")

    def qp(self):
        return EqualityQP(self.S_mat, self.h_vec, rhs=1.0, ridge=self.delta)


def default_delta(S):
    """Relative ridge: 1e-8 * trace(S)/M."""
    return 1e-8 * np.trace(S) / S.shape[0]


def _shifted_analysis_responses(spec, h, omega):
    """H_i evaluated at omega - 2*pi*d/D_i for every band i and image d >= 1."""
    out = {}
    for i in range(spec.M):
        for d in range(1, spec.D[i]):
            out[(i, d)] = analysis_band_response(spec, h, i, omega - 2.0 * np.pi * d / spec.D[i])
    return out


def build_synthesis_qp(spec, h, grid_n=1024, delta=None):
    """Assemble the alias quadratic form on a uniform frequency grid.

    For each input phase l the alias residue is g' q_l(w) with
    q_l(w)[k] = sum_i sum_{d>=1} W_Di^(-dl) W_M^(-ki) H_i(w - 2*pi*d/D_i) A(w)^(M-k-1);
    S accumulates Re[q q^H] over the grid and all phases l = 0..Dmax-1.
    """
    hc = _coeff_array(h, spec.M, kind="analysis" if isinstance(h, PrototypeFilter) else None)
    M = spec.M
    W = spec.W
    wn = -np.pi + (np.arange(grid_n) + 0.5) * 2.0 * np.pi / grid_n
    A = band_allpass_response(spec, wn)
    Hsh = _shifted_analysis_responses(spec, hc, wn)
    ks = np.arange(M)
    Aback = A[None, :] ** (M - 1 - ks[:, None])  # (k, n)
    S = np.zeros((M, M))
    for l in range(spec.Dmax):
        tot = np.zeros((M, grid_n), dtype=complex)  # indexed by k
        for i in range(M):
            if spec.D[i] == 1:
                continue
            f = np.zeros(grid_n, dtype=complex)
            for d in range(1, spec.D[i]):
                f += np.exp(2j * np.pi * d * l / spec.D[i]) * Hsh[(i, d)]
            tot += (W ** (-ks * i))[:, None] * f[None, :]
        Q = tot * Aback  # q_l(w)[k] on the grid
        S += np.real(Q @ Q.conj().T)
    if delta is None:
        delta = default_delta(S)
    return SynthesisQP(S_mat=S, h_vec=hc, delta=delta)


def build_synthesis_qp_method_a(spec, h, grid_n=1024, delta=None):
    """Alternative alias cost that sums per-image magnitudes incoherently.

    Instead of the phase-coherent residue, each |G_i(w) H_i(w - 2*pi*d/D_i)|^2
    term is accumulated separately, again yielding a PSD quadratic form in g.
    """
    hc = _coeff_array(h, spec.M, kind="analysis" if isinstance(h, PrototypeFilter) else None)
    M = spec.M
    W = spec.W
    wn = -np.pi + (np.arange(grid_n) + 0.5) * 2.0 * np.pi / grid_n
    A = band_allpass_response(spec, wn)
    Hsh = _shifted_analysis_responses(spec, hc, wn)
    ks = np.arange(M)
    Aback = A[None, :] ** (M - 1 - ks[:, None])  # (k, n)
    S = np.zeros((M, M))
    for i in range(M):
        if spec.D[i] == 1:
            continue
        # G_i(w) = g' u_i(w) with u_i(w)[k] = W^(-ki) A(w)^(M-k-1)
        U = (W ** (-ks * i))[:, None] * Aback
        wgt = np.zeros(grid_n)
        for d in range(1, spec.D[i]):
            wgt += np.abs(Hsh[(i, d)]) ** 2
        S += np.real((U * wgt[None, :]) @ U.conj().T)
    if delta is None:
        delta = default_delta(S)
    return SynthesisQP(S_mat=S, h_vec=hc, delta=delta)


def solve_synthesis(qp):
    """Solve the ridge-regularized alias QP; returns g with h' g = 1."""
    g = convexsolve.solve_eq_qp(qp.qp())
    return PrototypeFilter(tuple(g), "synthesis")


def synthesis_kkt_residual(qp, proto):
    """Relative KKT residual of a synthesis solution."""
    return convexsolve.eq_qp_kkt_residual(qp.qp(), np.asarray(proto.coeffs))
