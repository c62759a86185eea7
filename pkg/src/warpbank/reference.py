"""Reference data for the two standard 16-band design specifications.

These are the published benchmark values the reproduction suite checks
against: the warped band edges, the analysis/synthesis prototype
coefficients of the proposed design, and the target SAR/ERLE figures for
the proposed and widest-band-baseline designs.
"""

import numpy as np

from .warpcore import BankSpec, PrototypeFilter

SPEC1 = BankSpec(M=16, mu=0.5, D=(2,) * 16)
SPEC2 = BankSpec(M=16, mu=0.5, D=(8, 8, 8, 4, 4, 4, 2, 2, 2, 2, 2, 4, 4, 4, 8, 8))

# (Omega_l, Omega_h) per band, 4-decimal reference values
EDGES_SPEC1 = (
    (-3.1416, 3.1416), (-4.3500, 1.9331), (-5.2023, 1.0808), (-5.7960, 0.4872),
    (-6.2832, 0.0000), (-6.7703, -0.4872), (-7.3639, -1.0809), (-8.2163, -1.9332),
    (-9.4248, -3.1416), (-10.6332, -4.3501), (-11.4855, -5.2025), (-12.0792, -5.7960),
    (-12.5664, -6.2832), (-13.0536, -6.7704), (-13.6472, -7.3641), (-14.4995, -8.2163),
)
EDGES_SPEC2 = (
    (-3.1416, 3.1416), (-4.5087, 1.7745), (-5.8933, 0.3900), (-6.1259, 0.1574),
    (-7.0197, -0.7365), (-8.0746, -1.7914), (-7.3639, -1.0809), (-8.2163, -1.9332),
    (-9.4248, -3.1416), (-10.6332, -4.3501), (-11.4855, -5.2025), (-23.3414, -17.0582),
    (-24.3962, -18.1131), (-25.2901, -19.0069), (-50.6555, -44.3722), (-52.0400, -45.7567),
)

ANALYSIS_SPEC1 = (
    0.006784387784996, 0.017946339940064, 0.033423742747281, 0.052593030750424,
    0.073281609489174, 0.092560997189968, 0.107586665017076, 0.115769055764595,
    0.115773770718600, 0.107604509223835, 0.092582338907088, 0.073306631225949,
    0.052609833237766, 0.033437308233337, 0.017951793881796, 0.006787985888052,
)
SYNTHESIS_SPEC1 = (
    0.010741021222032, 0.021926742080588, 0.037203345945288, 0.054888469644485,
    0.073198870790831, 0.089930206035430, 0.102631178713128, 0.109536252754658,
    0.109531791827139, 0.102614159240595, 0.089909475677339, 0.073173885835641,
    0.054870939407773, 0.037188252580875, 0.021920080508076, 0.010735327736125,
)
ANALYSIS_SPEC2 = (
    0.005575845754339, 0.015692207827265, 0.031111735472651, 0.050989625731218,
    0.073001594213692, 0.093920111506342, 0.110318424188072, 0.119330344129408,
    0.119335069580386, 0.110340087229245, 0.093941237149871, 0.073026217924965,
    0.051009071444013, 0.031126188682438, 0.015699544319015, 0.005582694847079,
)
SYNTHESIS_SPEC2 = (
    0.005485648407843, 0.014752288378833, 0.028969305498630, 0.048587305437593,
    0.071841335493898, 0.094628233023347, 0.112800041474789, 0.122930412131727,
    0.122932039416339, 0.112799214437691, 0.094632898386205, 0.071844987310398,
    0.048590076561173, 0.028968967987558, 0.014751755969681, 0.005485490084296,
)

# overall SAR targets (dB)
OVERALL_SAR = {
    ("spec1", "proposed"): 39.00,
    ("spec1", "method_b"): 36.23,
    ("spec2", "proposed"): 38.89,
    ("spec2", "method_b"): 32.72,
}

# steady-state ERLE targets (dB), white reference signal
STEADY_STATE_ERLE = {
    ("spec1", "proposed"): 50.34,
    ("spec1", "method_b"): 46.16,
    ("spec2", "proposed"): 46.91,
    ("spec2", "method_b"): 42.01,
}


def spec_by_name(name):
    return {"spec1": SPEC1, "spec2": SPEC2}[name]


def reference_prototypes(name):
    """(analysis, synthesis) PrototypeFilter pair of the proposed design."""
    a, s = {
        "spec1": (ANALYSIS_SPEC1, SYNTHESIS_SPEC1),
        "spec2": (ANALYSIS_SPEC2, SYNTHESIS_SPEC2),
    }[name]
    return PrototypeFilter(a, "analysis"), PrototypeFilter(s, "synthesis")


def reference_edges(name):
    return np.asarray({"spec1": EDGES_SPEC1, "spec2": EDGES_SPEC2}[name], dtype=float)
