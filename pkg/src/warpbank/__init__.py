"""Non-uniform allpass-warped DFT filter banks for subband echo cancellation.

Design analysis prototypes by linear programming on magnitude-squared
coefficients, recover minimum-phase taps, design alias-minimizing
synthesis prototypes, compute signal-to-alias metrics, and verify designs
in a subband adaptive echo-cancellation simulator.
"""

from .warpcore import (
    BankSpec,
    PrototypeFilter,
    WarpedBand,
    OverallTransfer,
    allpass_response,
    warp_frequency,
    band_halfwidth,
    band_edges,
    analysis_band_response,
    synthesis_band_response,
    overall_transfer,
)
from .convexsolve import LinearProgram, EqualityQP, SolverFailure, solve_lp, solve_eq_qp
from .analysis_design import (
    SourceModel,
    MagnitudeSpec,
    AliasLP,
    build_alias_lp,
    solve_analysis,
    solve_analysis_method_b,
)
from .synthesis_design import (
    SynthesisQP,
    build_synthesis_qp,
    build_synthesis_qp_method_a,
    solve_synthesis,
)
from .alias_metrics import SarReport, sar, sar_oracle_montecarlo, erle_upper_bound
from .aec_sim import (
    SimConfig,
    ErleTrace,
    DesignBundle,
    generate_signal,
    generate_unknown_system,
    run_simulation,
    compare_designs,
)

__version__ = "0.1.0"
