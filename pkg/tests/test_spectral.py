import numpy as np
import pytest
import scipy.linalg as sla
from hypothesis import given, settings, strategies as st

from avgschwarz.assembly import SpaceType
from avgschwarz.coefficient import CoefficientGeometry, build_coefficient, coefficient_extrema
from avgschwarz.mesh import build_mesh, build_partition
from avgschwarz.spectral import (
    FactorizationError,
    FixedPolicy,
    ThresholdPolicy,
    local_spectrum,
    select_enrichment,
    solve_gevp,
    spectral_projection,
    write_spectra_csv,
)


@pytest.fixture(scope="module")
def setup():
    mesh = build_mesh(18)
    part = build_partition(mesh, 3)
    fld = build_coefficient(mesh, part, CoefficientGeometry())
    return part, fld, coefficient_extrema(part, fld)


def test_diagonal_pair():
    lam, psi = solve_gevp(np.diag([2.0, 6.0]), np.diag([1.0, 2.0]))
    assert np.allclose(lam, [3.0, 2.0])
    assert np.allclose(np.abs(psi), [[0, 1], [1 / np.sqrt(2), 0]])


def test_not_positive_definite():
    with pytest.raises(FactorizationError):
        solve_gevp(np.eye(2), np.diag([1.0, -1.0]))
    with pytest.raises(ValueError):
        solve_gevp(np.eye(2), np.eye(3))


def test_against_scipy_generalized(rng):
    X = rng.standard_normal((12, 12))
    A = X @ X.T + 12 * np.eye(12)
    Y = rng.standard_normal((12, 12))
    B = Y @ Y.T + np.eye(12)
    lam, psi = solve_gevp(A, B)
    ref = sla.eigh(A, B, eigvals_only=True)[::-1]
    assert np.allclose(lam, ref, rtol=1e-10)
    assert np.allclose(psi.T @ B @ psi, np.eye(12), atol=1e-10)
    assert np.allclose(A @ psi, B @ psi * lam, atol=1e-8 * np.abs(A).max())


def test_repeated_eigenvalues_b_orthonormal():
    lam, psi = solve_gevp(np.diag([5.0, 5.0, 5.0, 1.0]), np.diag([1.0, 1.0, 1.0, 1.0]))
    assert np.allclose(lam, [5, 5, 5, 1])
    assert np.allclose(psi.T @ psi, np.eye(4), atol=1e-12)


@pytest.mark.parametrize(
    "lam,policy,expected",
    [
        ([150, 120, 80, 1], ThresholdPolicy(100), 2),
        ([150, 120, 120, 80], FixedPolicy(2), 3),
        ([150, 120, 120, 80], ThresholdPolicy(130), 1),
        ([5, 4, 3], FixedPolicy(10), 2),
        ([5, 5, 5], ThresholdPolicy(1), 2),
        ([100, 99], ThresholdPolicy(100), 0),
        ([1.0], ThresholdPolicy(0.5), 0),
        ([], FixedPolicy(3), 0),
    ],
)
def test_selection_rule(lam, policy, expected):
    assert select_enrichment(lam, policy) == expected


def test_selection_errors():
    with pytest.raises(ValueError):
        select_enrichment([3, 2], FixedPolicy(-1))
    with pytest.raises(TypeError):
        select_enrichment([3, 2], object())


@settings(max_examples=200, deadline=None)
@given(
    lam=st.lists(st.sampled_from([1.0, 2.0, 50.0, 100.0, 150.0, 1e4]), min_size=1, max_size=12),
    mu=st.floats(0.5, 2e4),
    m=st.integers(0, 15),
)
def test_selection_invariants(lam, mu, m):
    lam = np.sort(np.array(lam))[::-1]
    for policy in (ThresholdPolicy(mu), FixedPolicy(m)):
        M = select_enrichment(lam, policy)
        assert 0 <= M <= max(lam.size - 1, 0)
        if 0 < M < lam.size - 1:
            assert lam[M] < lam[M - 1]
        if isinstance(policy, ThresholdPolicy):
            assert M >= min(np.count_nonzero(lam > mu), lam.size - 1)
        else:
            assert M >= min(m, lam.size - 1)


@pytest.mark.parametrize("space_type", list(SpaceType))
def test_constant_coefficient_all_one(space_type):
    mesh = build_mesh(12)
    part = build_partition(mesh, 2)
    fld = build_coefficient(mesh, part, CoefficientGeometry(1, 1, 1))
    ext = coefficient_extrema(part, fld)
    for k in range(4):
        s = local_spectrum(part, fld, ext, k, space_type, ThresholdPolicy(100))
        assert np.allclose(s.eigenvalues, 1.0, atol=1e-10)
        assert s.selected == 0


@pytest.mark.parametrize("space_type", list(SpaceType))
def test_eigenvalue_bounds(setup, space_type):
    part, fld, ext = setup
    bound = ext.contrast() if space_type is SpaceType.SUBD else ext.layer_contrast()
    for k in range(part.num_subdomains):
        s = local_spectrum(part, fld, ext, k, space_type, ThresholdPolicy(100))
        assert s.eigenvalues.min() >= 1 - 1e-8
        assert s.eigenvalues.max() <= bound[k] * (1 + 1e-8)
        assert np.all(np.diff(s.eigenvalues) <= 0)


def test_layer_dominated_by_subd(setup):
    part, fld, ext = setup
    for k in range(part.num_subdomains):
        sub = local_spectrum(part, fld, ext, k, SpaceType.SUBD)
        lay = local_spectrum(part, fld, ext, k, SpaceType.LAYER)
        # b^LAYER >= b^SUBD pointwise, so every LAYER eigenvalue is the smaller one
        assert np.all(lay.eigenvalues <= sub.eigenvalues * (1 + 1e-8))


def test_scale_invariance(setup):
    part, fld, ext = setup
    a = local_spectrum(part, fld, ext, 4, SpaceType.LAYER)
    f2 = fld.scaled(1e3)
    b = local_spectrum(part, f2, coefficient_extrema(part, f2), 4, SpaceType.LAYER)
    assert np.allclose(a.eigenvalues, b.eigenvalues, rtol=1e-8)


def test_projection(setup, rng):
    part, fld, ext = setup
    s = local_spectrum(part, fld, ext, 4, SpaceType.LAYER, ThresholdPolicy(100))
    assert s.selected > 0
    for _ in range(20):
        v = rng.standard_normal(s.size)
        p = spectral_projection(s, v)
        assert np.allclose(spectral_projection(s, p), p, atol=1e-10 * np.abs(p).max())
        w = v - p
        # b-orthogonal and a-orthogonal to the selected modes
        assert np.abs(s.selected_vectors.T @ s.B @ w).max() < 1e-9 * np.abs(v).max() * np.abs(s.B).max()
        assert np.abs(s.selected_vectors.T @ s.A @ w).max() < 1e-7 * np.abs(v).max() * np.abs(s.A).max()
        assert w @ s.A @ w <= s.lambda_next * (v @ s.B @ v) * (1 + 1e-8)


def test_projection_of_unselected_and_selection_change(setup):
    part, fld, ext = setup
    s = local_spectrum(part, fld, ext, 0, SpaceType.LAYER, FixedPolicy(0))
    v = np.ones(s.size)
    assert np.all(spectral_projection(s, v) == 0)
    t = s.with_selection(3)
    assert t.selected == 3 and t.lambda_next == t.eigenvalues[3]


def test_spectra_csv(setup, tmp_path):
    part, fld, ext = setup
    s = [local_spectrum(part, fld, ext, k, SpaceType.LAYER, ThresholdPolicy(100)) for k in range(2)]
    write_spectra_csv(s, tmp_path / "s.csv")
    lines = (tmp_path / "s.csv").read_text().splitlines()
    assert lines[0] == "k,j,lambda,selected,type"
    assert len(lines) == 1 + sum(x.size for x in s)
