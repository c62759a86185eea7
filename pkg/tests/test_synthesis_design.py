"""Alias-minimizing synthesis design and its quadratic-form assembly."""

import numpy as np
import pytest

from warpbank import reference as ref
from warpbank.synthesis_design import (
    SynthesisQP,
    build_synthesis_qp,
    build_synthesis_qp_method_a,
    default_delta,
    solve_synthesis,
    synthesis_kkt_residual,
)
from warpbank.warpcore import (
    BankSpec,
    analysis_band_response,
    band_allpass_response,
    overall_transfer,
    synthesis_band_response,
)


def test_quadratic_form_is_symmetric_psd(spec1):
    ha, _ = ref.reference_prototypes("spec1")
    qp = build_synthesis_qp(spec1, ha)
    S = qp.S_mat
    np.testing.assert_allclose(S, S.T, atol=1e-12 * np.max(np.abs(S)))
    eig = np.linalg.eigvalsh(S)
    assert eig.min() > -1e-10 * eig.max()


def test_quadratic_form_measures_alias_power(rng):
    # g' S g equals the grid-summed alias power of the cascade, which is
    # the squared alias transfer summed over input phases
    spec = BankSpec(M=4, mu=0.5, D=(2, 4, 4, 2))
    h = rng.standard_normal(4) * 0.1 + np.array([1.0, 0.5, 0.2, 0.1])
    qp = build_synthesis_qp(spec, h, grid_n=256)
    for _ in range(5):
        g = rng.standard_normal(4)
        wn = -np.pi + (np.arange(256) + 0.5) * 2.0 * np.pi / 256
        ot = overall_transfer(spec, h, g, wn)
        # alias residue per phase, undoing the 1/M normalization of T_a
        direct = float(np.sum(np.abs(spec.M * ot.T_a) ** 2))
        quad = float(g @ qp.S_mat @ g)
        assert abs(direct - quad) < 1e-8 * max(1.0, quad)


def test_incoherent_form_matches_direct_evaluation(rng):
    # the per-image cost sums |G_i(w)|^2 |H_i(w - 2 pi d / D_i)|^2 terms
    spec = BankSpec(M=4, mu=0.5, D=(2, 4, 4, 2))
    h = rng.standard_normal(4) * 0.1 + np.array([1.0, 0.5, 0.2, 0.1])
    qp = build_synthesis_qp_method_a(spec, h, grid_n=128)
    wn = -np.pi + (np.arange(128) + 0.5) * 2.0 * np.pi / 128
    for _ in range(5):
        g = rng.standard_normal(4)
        direct = 0.0
        for i in range(spec.M):
            Gi = synthesis_band_response(spec, g, i, wn)
            for d in range(1, spec.D[i]):
                Hi = analysis_band_response(spec, h, i, wn - 2 * np.pi * d / spec.D[i])
                direct += float(np.sum(np.abs(Gi) ** 2 * np.abs(Hi) ** 2))
        quad = float(g @ qp.S_mat @ g)
        assert abs(direct - quad) < 1e-8 * max(1.0, quad)


def test_solution_satisfies_distortion_constraint(spec1):
    ha, _ = ref.reference_prototypes("spec1")
    qp = build_synthesis_qp(spec1, ha)
    g = solve_synthesis(qp)
    assert abs(np.asarray(ha.coeffs) @ np.asarray(g.coeffs) - 1.0) < 1e-12
    assert synthesis_kkt_residual(qp, g) < 1e-9


def test_solution_is_a_minimum(spec1, rng):
    ha, _ = ref.reference_prototypes("spec1")
    qp = build_synthesis_qp(spec1, ha)
    g0 = np.asarray(solve_synthesis(qp).coeffs)
    obj0 = g0 @ qp.S_mat @ g0 + qp.delta * g0 @ g0
    h = qp.h_vec
    for _ in range(20):
        p = rng.standard_normal(h.size)
        p -= (h @ p) / (h @ h) * h          # stay on the constraint plane
        g = g0 + 1e-3 * p
        obj = g @ qp.S_mat @ g + qp.delta * g @ g
        assert obj >= obj0 - 1e-14


@pytest.mark.parametrize("name", ["spec1", "spec2"])
def test_reproduces_reference_synthesis_taps(name):
    spec = ref.spec_by_name(name)
    ha, gs = ref.reference_prototypes(name)
    g = solve_synthesis(build_synthesis_qp(spec, ha))
    assert np.max(np.abs(g.unit_sum().asarray() - gs.asarray())) < 1e-2


def test_default_delta_scales_with_trace():
    S = np.diag([1.0, 3.0])
    assert abs(default_delta(S) - 1e-8 * 2.0) < 1e-20


def test_shape_validation():
    with pytest.raises(ValueError):
        SynthesisQP(S_mat=np.eye(3), h_vec=np.ones(4), delta=0.0)
