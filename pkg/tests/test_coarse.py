import numpy as np
import pytest
import scipy.sparse as sp

from avgschwarz.assembly import SpaceType, assemble_stiffness, build_dofmap
from avgschwarz.coarse import (
    average_interpolate,
    average_operator,
    build_coarse_space,
    coarse_from_basis,
    enriched_interpolate,
    factorize_coarse,
)
from avgschwarz.coefficient import CoefficientGeometry, build_coefficient, coefficient_extrema
from avgschwarz.mesh import build_mesh, build_partition
from avgschwarz.spectral import FactorizationError, FixedPolicy, ThresholdPolicy, all_spectra


@pytest.fixture(scope="module")
def setup():
    mesh = build_mesh(18)
    part = build_partition(mesh, 3)
    fld = build_coefficient(mesh, part, CoefficientGeometry())
    ext = coefficient_extrema(part, fld)
    A = assemble_stiffness(mesh, fld)
    return mesh, part, fld, ext, A, build_dofmap(part)


def brute_average(mesh, part, u_free):
    """Average interpolant computed node by node on the full nodal vector."""
    free = np.flatnonzero(~mesh.node_on_physical_boundary)
    u = np.zeros(mesh.num_nodes)
    u[free] = u_free
    out = u.copy()
    for k in range(part.num_subdomains):
        mean = np.mean([u[v] for v in part.subdomain_boundary_nodes[k]])
        for v in part.subdomain_interior_nodes[k]:
            out[v] = mean
    return out[free]


def test_average_matches_brute_force(setup, rng):
    mesh, part, *_ , dm = setup
    for _ in range(5):
        u = rng.standard_normal(dm.num_dofs)
        assert np.allclose(average_interpolate(part, u, dm), brute_average(mesh, part, u), atol=1e-14)


def test_average_is_projection_and_keeps_interface(setup, rng):
    *_, dm = setup
    Q = average_operator(setup[1], dm)
    assert abs(Q @ Q - Q).max() < 1e-14
    u = rng.standard_normal(dm.num_dofs)
    assert np.array_equal((Q @ u)[dm.interface_dofs], u[dm.interface_dofs])


def test_average_reproduces_constants_away_from_boundary():
    mesh = build_mesh(12)
    part = build_partition(mesh, 3)
    dm = build_dofmap(part)
    Q = average_operator(part, dm)
    u = np.ones(dm.num_dofs)
    # the center subdomain does not touch the physical boundary
    assert np.allclose((Q @ u)[dm.local_dofs[4]], 1.0)
    # a corner subdomain has 2m + 1 of its 4m boundary nodes on the physical boundary
    m = part.ratio
    assert np.allclose((Q @ u)[dm.local_dofs[0]], (2 * m - 1) / (4 * m))


def test_unenriched_dimension(setup):
    _, part, _, _, A, dm = setup
    cs = build_coarse_space(part, A, None, dm)
    assert cs.dimension == dm.interface_dofs.size == part.interface_nodes().size
    assert cs.summary()["enrichment_total"] == 0


def test_enriched_basis_and_interpolant_span(setup, rng):
    _, part, fld, ext, A, dm = setup
    spectra = all_spectra(part, fld, ext, SpaceType.LAYER, ThresholdPolicy(100))
    cs = build_coarse_space(part, A, spectra, dm)
    assert cs.dimension == dm.interface_dofs.size + sum(s.selected for s in spectra)
    assert np.array_equal(cs.enrichment_counts, [s.selected for s in spectra])
    R = cs.R0.toarray()
    for _ in range(5):
        u0 = enriched_interpolate(cs, spectra, rng.standard_normal(dm.num_dofs))
        c, *_ = np.linalg.lstsq(R, u0, rcond=None)
        assert np.linalg.norm(R @ c - u0) <= 1e-10 * np.linalg.norm(u0)
    # the coarse interpolant reproduces coarse functions
    v = R @ rng.standard_normal(R.shape[1])
    assert np.allclose(enriched_interpolate(cs, spectra, v), v, atol=1e-10 * np.abs(v).max())


def test_coarse_solve_is_a_projection(setup, rng):
    _, part, fld, ext, A, dm = setup
    spectra = all_spectra(part, fld, ext, SpaceType.LAYER, FixedPolicy(2))
    cs = build_coarse_space(part, A, spectra, dm)
    u = rng.standard_normal(dm.num_dofs)
    P0u = cs.solve(A @ u)
    assert np.allclose(cs.solve(A @ P0u), P0u, rtol=1e-8, atol=1e-10)
    w = u - P0u
    assert np.abs(cs.R0.T @ (A @ w)).max() < 1e-8 * np.abs(A @ u).max()


def test_rank_deficiency_guard(setup):
    _, part, _, _, A, dm = setup
    R = sp.hstack([sp.identity(dm.num_dofs, format="csr")[:, :3]] * 2)
    with pytest.raises(FactorizationError, match="interface"):
        coarse_from_basis(part, A, R)
    with pytest.raises(FactorizationError, match="subdomain 2"):
        factorize_coarse(np.diag([1.0, -1.0]), np.array([-1, 2]))


def test_summary_json(setup, tmp_path):
    import json

    _, part, fld, ext, A, dm = setup
    cs = build_coarse_space(part, A, all_spectra(part, fld, ext, SpaceType.LAYER, ThresholdPolicy(100)), dm)
    cs.write_summary(tmp_path / "c.json")
    d = json.loads((tmp_path / "c.json").read_text())
    assert d["dimension"] == cs.dimension and len(d["enrichment_per_subdomain"]) == 9
