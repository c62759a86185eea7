"""Shared fixtures: bank specifications and cached design runs."""

import numpy as np
import pytest

from warpbank import reference as ref
from warpbank.analysis_design import solve_analysis
from warpbank.synthesis_design import build_synthesis_qp, solve_synthesis


@pytest.fixture(scope="session")
def spec1():
    return ref.spec_by_name("spec1")


@pytest.fixture(scope="session")
def spec2():
    return ref.spec_by_name("spec2")


@pytest.fixture(scope="session")
def small_spec():
    """A cheap 8-band bank for tests that exercise the full pipeline."""
    from warpbank.warpcore import BankSpec
    return BankSpec(M=8, mu=0.5, D=(2,) * 8)


@pytest.fixture(scope="session")
def spec1_design():
    """Cached analysis + synthesis design for the uniform 16-band bank."""
    spec = ref.spec_by_name("spec1")
    design = solve_analysis(spec)
    g = solve_synthesis(build_synthesis_qp(spec, design.prototype))
    return spec, design, g


@pytest.fixture(scope="session")
def small_design(small_spec):
    design = solve_analysis(small_spec)
    g = solve_synthesis(build_synthesis_qp(small_spec, design.prototype))
    return small_spec, design, g


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
