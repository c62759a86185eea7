"""Reproduction suite: checks the package against the reference benchmarks.

Each criterion returns a CriterionResult with a measured-value summary;
`run_all` executes them in order and is shared by the command-line
`reproduce` command and the acceptance test suite.
"""

import time
from dataclasses import dataclass, field

import numpy as np

from . import reference as ref
from .aec_sim import DesignBundle, SimConfig, compare_designs, run_simulation
from .alias_metrics import sar, sar_oracle_montecarlo
from .analysis_design import (SourceModel, build_alias_lp, recover_minimum_phase,
                              solve_analysis, solve_analysis_method_b)
from .synthesis_design import build_synthesis_qp, solve_synthesis, synthesis_kkt_residual
from .warpcore import (BankSpec, allpass_response, band_edges, overall_transfer,
                       warp_frequency)

GROUPS = {
    "tables": (1, 2, 3, 4, 5),
    "properties": (6, 7, 10),
    "simulation": (8, 9),
}

DEFAULT_SIM_SEED = 3


def random_minimum_phase(rng, M):
    """Random real M-tap filter with all zeros strictly inside the unit circle."""
    roots = []
    n_pairs = (M - 1) // 2
    radii = rng.uniform(0.1, 0.85, n_pairs)
    angles = rng.uniform(0.05, np.pi - 0.05, n_pairs)
    for r, a in zip(radii, angles):
        z = r * np.exp(1j * a)
        roots.extend([z, np.conj(z)])
    if (M - 1) % 2:
        roots.append(complex(rng.uniform(-0.85, 0.85)))
    h = np.real(np.poly(roots))  # descending coefficients h(0)..h(M-1), h(0) = 1
    return h / h.sum()


@dataclass
class CriterionResult:
    index: int
    name: str
    passed: bool
    measured: str
    runtime_s: float = 0.0

    def line(self):
        return "%s  criterion %2d: %s  [%s]  (%.1fs)" % (
            "PASS" if self.passed else "FAIL", self.index, self.name,
            self.measured, self.runtime_s)


def _designed_prototypes(name, model=None, method="proposed"):
    """Full design pipeline: analysis LP + synthesis QP for a named bank."""
    spec = ref.spec_by_name(name)
    design = (solve_analysis if method == "proposed" else solve_analysis_method_b)(
        spec, model)
    h = design.prototype
    g = solve_synthesis(build_synthesis_qp(spec, h))
    return spec, h, g


def criterion_1():
    """Warped band edges match the reference table to 1e-3."""
    worst = 0.0
    for name in ("spec1", "spec2"):
        spec = ref.spec_by_name(name)
        table = ref.reference_edges(name)
        for i in range(spec.M):
            b = band_edges(spec, i)
            worst = max(worst,
                        abs(b.Omega_l - table[i, 0]),
                        abs(b.Omega_h - table[i, 1]))
    return CriterionResult(1, "band edges", worst <= 1e-3,
                           "max |edge error| = %.2e (tol 1e-3)" % worst)


def criterion_2():
    """Overall SAR of the reference prototypes: 39.00 / 38.89 dB +- 0.5."""
    vals = {}
    for name in ("spec1", "spec2"):
        spec = ref.spec_by_name(name)
        ha, _ = ref.reference_prototypes(name)
        vals[name] = sar(spec, ha, grid_n=4096).overall_sar_db
    ok = all(abs(vals[n] - ref.OVERALL_SAR[(n, "proposed")]) <= 0.5
             for n in ("spec1", "spec2"))
    return CriterionResult(
        2, "overall SAR of reference prototypes", ok,
        "spec1 %.2f dB (target 39.00+-0.5), spec2 %.2f dB (target 38.89+-0.5)"
        % (vals["spec1"], vals["spec2"]))


def criterion_3():
    """Analysis design reproduces the spec1 reference taps and SAR."""
    spec = ref.spec_by_name("spec1")
    des = solve_analysis(spec)
    h = des.prototype.unit_sum().asarray()
    tap_err = float(np.max(np.abs(h - np.asarray(ref.ANALYSIS_SPEC1))))
    sar_db = sar(spec, h, grid_n=4096).overall_sar_db
    ok = tap_err <= 1e-2 and sar_db >= ref.OVERALL_SAR[("spec1", "proposed")] - 0.3
    return CriterionResult(3, "analysis design reproduction", ok,
                           "max tap error %.2e (tol 1e-2), SAR %.2f dB (floor 38.70)"
                           % (tap_err, sar_db))


def criterion_4():
    """Synthesis design reproduces the spec1 reference taps; KKT <= 1e-9."""
    spec = ref.spec_by_name("spec1")
    ha, gs = ref.reference_prototypes("spec1")
    qp = build_synthesis_qp(spec, ha)
    g = solve_synthesis(qp)
    tap_err = float(np.max(np.abs(g.unit_sum().asarray() - gs.asarray())))
    kkt = synthesis_kkt_residual(qp, g)
    ok = tap_err <= 1e-2 and kkt <= 1e-9
    return CriterionResult(4, "synthesis design reproduction", ok,
                           "max tap error %.2e (tol 1e-2), KKT residual %.1e (tol 1e-9)"
                           % (tap_err, kkt))


def criterion_5():
    """Widest-band baseline SAR: 36.23 / 32.72 dB +- 0.7."""
    vals = {}
    for name in ("spec1", "spec2"):
        spec = ref.spec_by_name(name)
        des = solve_analysis_method_b(spec)
        vals[name] = sar(spec, des.prototype, grid_n=4096).overall_sar_db
    ok = all(abs(vals[n] - ref.OVERALL_SAR[(n, "method_b")]) <= 0.7
             for n in ("spec1", "spec2"))
    return CriterionResult(
        5, "widest-band baseline SAR", ok,
        "spec1 %.2f dB (target 36.23+-0.7), spec2 %.2f dB (target 32.72+-0.7)"
        % (vals["spec1"], vals["spec2"]))


def criterion_6():
    """With uniform decimation the optimized products g*h are prototype-independent."""
    spec = BankSpec(M=16, mu=0.5, D=(2,) * 16)
    rng = np.random.default_rng(42)
    protos = []
    for _ in range(2):
        h = rng.uniform(0.2, 1.0, spec.M)  # all nonzero
        protos.append(h / h.sum())
    # a tiny ridge keeps the comparison at the invariance level of the
    # unregularized optimum
    results = []
    for h in protos:
        qp = build_synthesis_qp(spec, h, delta=0.0)
        g = solve_synthesis(qp).asarray()
        results.append((h, g))
    m1 = results[0][0] * results[0][1]
    m2 = results[1][0] * results[1][1]
    m_err = float(np.max(np.abs(m1 - m2)))
    w = np.linspace(-np.pi, np.pi, 512, endpoint=False)
    t1 = np.abs(overall_transfer(spec, results[0][0], results[0][1], w).t_l())
    t2 = np.abs(overall_transfer(spec, results[1][0], results[1][1], w).t_l())
    t_err = float(np.max(np.abs(t1 - t2)))
    ok = m_err <= 1e-8 and t_err <= 1e-8
    return CriterionResult(6, "uniform-decimation synthesis invariance", ok,
                           "max |m1-m2| %.1e, max ||T_l| diff| %.1e (tol 1e-8)"
                           % (m_err, t_err))


def criterion_7():
    """Frequency-domain SAR agrees with the Monte-Carlo oracle within 0.3 dB."""
    spec = BankSpec(M=8, mu=0.5, D=(2,) * 8)
    des = solve_analysis(spec)
    rep = sar(spec, des.prototype, grid_n=4096)
    mc = sar_oracle_montecarlo(spec, des.prototype, seed=0, n_samples=1 << 20)
    diff = float(np.max(np.abs(rep.sar_db - mc.sar_db)))
    return CriterionResult(7, "SAR formula vs Monte-Carlo oracle", diff <= 0.3,
                           "max per-band |difference| %.3f dB (tol 0.3)" % diff)


def _erle_white(name, seed=DEFAULT_SIM_SEED):
    out = {}
    for method in ("proposed", "method_b"):
        spec, h, g = _designed_prototypes(name, method=method)
        cfg = SimConfig(spec=spec, h=h, g=g, seed=seed, signal_kind="white")
        out[method] = run_simulation(cfg).steady_state_db
    return out


def criterion_8():
    """Steady-state ERLE under white noise matches the reference +-3 dB."""
    parts = []
    ok = True
    for name in ("spec1", "spec2"):
        vals = _erle_white(name)
        for method in ("proposed", "method_b"):
            target = ref.STEADY_STATE_ERLE[(name, method)]
            ok &= abs(vals[method] - target) <= 3.0
            parts.append("%s %s %.2f (target %.2f+-3)" % (name, method, vals[method], target))
        ok &= vals["proposed"] - vals["method_b"] >= 2.0
    return CriterionResult(8, "white-noise ERLE experiment", bool(ok), "; ".join(parts))


def criterion_9():
    """Colored-input qualitative ordering of the design variants."""
    model = SourceModel.colored_default()
    improvements = {}
    parts = []
    ok = True
    for name in ("spec1", "spec2"):
        spec, h_w, g_w = _designed_prototypes(name, method="proposed")
        _, h_c, g_c = _designed_prototypes(name, model=model, method="proposed")
        _, h_b, g_b = _designed_prototypes(name, method="method_b")
        cfg = SimConfig(spec=spec, h=h_w, g=g_w, seed=DEFAULT_SIM_SEED,
                        signal_kind="colored")
        report = compare_designs(cfg, [
            DesignBundle("proposed_colored", spec, h_c, g_c),
            DesignBundle("proposed_white", spec, h_w, g_w),
            DesignBundle("baseline", spec, h_b, g_b),
        ])
        ss = report["steady_state_db"]
        improvements[name] = ss["proposed_colored"] - ss["proposed_white"]
        ok &= ss["proposed_colored"] >= ss["proposed_white"]
        ok &= ss["proposed_colored"] - ss["baseline"] >= 2.0
        ok &= ss["proposed_white"] - ss["baseline"] >= 2.0
        parts.append("%s colored %.2f / white %.2f / baseline %.2f"
                     % (name, ss["proposed_colored"], ss["proposed_white"], ss["baseline"]))
    ok &= improvements["spec1"] > improvements["spec2"]
    parts.append("improvement spec1 %.2f > spec2 %.2f"
                 % (improvements["spec1"], improvements["spec2"]))
    return CriterionResult(9, "colored-input design ordering", bool(ok), "; ".join(parts))


def criterion_10():
    """Bundled numeric property checks with no benchmark numbers."""
    failures = []

    # minimum-phase roundtrip on strictly minimum-phase filters
    rng = np.random.default_rng(7)
    M = 16
    for _ in range(100):
        h = random_minimum_phase(rng, M)
        c = np.array([np.dot(h[:M - k], h[k:]) for k in range(M)])
        h_rec = recover_minimum_phase(c)
        if np.max(np.abs(h_rec - h)) > 1e-6:
            failures.append("minimum-phase roundtrip")
            break

    # allpass unit magnitude
    w = np.linspace(-np.pi, np.pi, 4097)
    for mu in (-0.7, 0.0, 0.5, 0.9):
        if np.max(np.abs(np.abs(allpass_response(mu, w)) - 1.0)) > 1e-12:
            failures.append("allpass magnitude")
            break

    # warp monotonicity and endpoints
    x = np.linspace(0, np.pi, 4096)
    for mu in (-0.5, 0.3, 0.5, 0.9):
        phi = warp_frequency(mu, x)
        if not (np.all(np.diff(phi) > 0) and abs(phi[0]) < 1e-12
                and abs(phi[-1] - np.pi) < 1e-12):
            failures.append("warp monotonicity/endpoints")
            break

    # LP vs vertex enumeration / QP closed form on small instances
    from itertools import combinations
    from .convexsolve import EqualityQP, LinearProgram, solve_eq_qp, solve_lp
    rng = np.random.default_rng(3)
    for _ in range(5):
        n = 6
        G = rng.standard_normal((12, n))
        x0 = rng.uniform(0.5, 1.0, n)
        rhs = G @ x0 - rng.uniform(0.1, 1.0, 12)
        eq = rng.uniform(0.5, 1.5, n)
        cost = rng.standard_normal(n)
        lp = LinearProgram(cost, eq, float(eq @ x0), G, rhs)
        res = solve_lp(lp)
        best = np.inf
        for rows in combinations(range(12), n - 1):
            Asq = np.vstack([eq, G[list(rows)]])
            bsq = np.concatenate([[lp.eq_rhs], rhs[list(rows)]])
            try:
                v = np.linalg.solve(Asq, bsq)
            except np.linalg.LinAlgError:
                continue
            if np.all(G @ v >= rhs - 1e-9):
                best = min(best, cost @ v)
        if res.status == "optimal" and np.isfinite(best):
            if abs(res.objective - best) > 1e-6 * max(1.0, abs(best)):
                failures.append("LP vertex oracle")
                break
        S = rng.standard_normal((4, 4))
        S = S @ S.T
        hq = rng.standard_normal(4)
        g = solve_eq_qp(EqualityQP(S, hq, 1.0, 1e-6))
        grad = (S + 1e-6 * np.eye(4)) @ g
        lam = (hq @ grad) / (hq @ hq)
        if np.linalg.norm(grad - lam * hq) > 1e-9 * np.linalg.norm(hq):
            failures.append("QP KKT")
            break

    # mu = 0 degenerates to the classical DFT bank
    from .warpcore import BankSpec as BS, analysis_band_response
    spec0 = BS(M=8, mu=0.0, D=(2,) * 8)
    h = rng.standard_normal(8)
    wg = np.linspace(-np.pi, np.pi, 257)
    for i in (0, 3, 5):
        direct = sum(h[n] * np.exp(-2j * np.pi * n * i / 8) * np.exp(-1j * wg * n)
                     for n in range(8))
        if np.max(np.abs(analysis_band_response(spec0, h, i, wg) - direct)) > 1e-10:
            failures.append("mu=0 degeneracy")
            break

    # Parseval: frequency-integral signal power vs time-domain energy
    from .aec_sim import analysis_bank
    spec = BankSpec(M=8, mu=0.5, D=(2,) * 8)
    h = rng.standard_normal(8)
    x = np.zeros(4096)
    x[0] = 1.0
    X = analysis_bank(spec, x, h)
    rep = sar(spec, h, grid_n=8192)
    for i in range(8):
        energy = 2 * np.sum(np.abs(X[i]) ** 2)
        if abs(rep.sigma2[i] - energy) > 1e-6 * energy:
            failures.append("Parseval signal power")
            break

    ok = not failures
    return CriterionResult(10, "property suites", ok,
                           "all properties hold" if ok else "failed: " + ", ".join(failures))


CRITERIA = {
    1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4,
    5: criterion_5, 6: criterion_6, 7: criterion_7, 8: criterion_8,
    9: criterion_9, 10: criterion_10,
}


def run_all(only=None):
    """Run the reproduction criteria; `only` may name a GROUPS key."""
    if only is None:
        indices = sorted(CRITERIA)
    else:
        if only not in GROUPS:
            raise ValueError("unknown criteria group %r (choose from %s)"
                             % (only, ", ".join(sorted(GROUPS))))
        indices = list(GROUPS[only])
    results = []
    for idx in indices:
        t0 = time.time()
        res = CRITERIA[idx]()
        res.runtime_s = time.time() - t0
        results.append(res)
    return results
