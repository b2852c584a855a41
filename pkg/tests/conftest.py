import numpy as np
import pytest

from avgschwarz.assembly import SpaceType, assemble_stiffness, build_dofmap
from avgschwarz.coarse import build_coarse_space
from avgschwarz.coefficient import CoefficientGeometry, build_coefficient, coefficient_extrema
from avgschwarz.mesh import build_mesh, build_partition
from avgschwarz.precond import Variant, build_preconditioner
from avgschwarz.spectral import ThresholdPolicy, all_spectra

ACCEPTANCE_LINES = []
SMALL_GEOMETRY = CoefficientGeometry(1.0, 1e4, 1e6, 0.25, 1.0 / 3.0)


def make_problem(n, N_side, geometry=None, space_type=SpaceType.LAYER, policy=ThresholdPolicy(100.0),
                 variant=Variant.ADD):
    """Assemble every stage of one configuration as a plain dict."""
    mesh = build_mesh(n)
    part = build_partition(mesh, N_side)
    # default channel width H/6 needs H/h >= 6; coarser fixtures use H/4
    geom = geometry or (CoefficientGeometry() if n // N_side >= 6 else SMALL_GEOMETRY)
    fld = build_coefficient(mesh, part, geom)
    ext = coefficient_extrema(part, fld)
    A = assemble_stiffness(mesh, fld)
    dm = build_dofmap(part)
    spectra = all_spectra(part, fld, ext, space_type, policy)
    cs = build_coarse_space(part, A, spectra, dm)
    M = build_preconditioner(A, dm, cs, variant)
    return dict(mesh=mesh, part=part, field=fld, extrema=ext, A=A, dofmap=dm, spectra=spectra,
                coarse=cs, M=M)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def acceptance_log():
    return ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
