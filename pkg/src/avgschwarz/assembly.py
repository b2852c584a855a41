"""P1 finite element assembly on the structured mesh.

Global matrices live on the free degrees of freedom (nodes off the physical
boundary, in ascending node order); Dirichlet conditions are imposed by
elimination.  Local matrices live on the nodes strictly inside a subdomain.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
import scipy.io
import scipy.sparse as sp

from . import kernels
from .coefficient import CoefficientExtrema, CoefficientField
from .mesh import NodeClass, Partition, StructuredMesh


class SpaceType(str, Enum):
    """Right-hand form of the local eigenproblem."""

    SUBD = "subd"
    LAYER = "layer"


@dataclass(frozen=True)
class DofMap:
    """Node/dof bookkeeping.

    Attributes
    ----------
    free_nodes : ndarray
        Mesh node of each global dof.
    node_to_dof : ndarray
        Global dof of each mesh node, ``-1`` on the physical boundary.
    local_dofs : list of ndarray
        Global dofs strictly inside each subdomain.
    interface_dofs : ndarray
        Global dofs on the interface, ascending.
    """

    free_nodes: np.ndarray
    node_to_dof: np.ndarray
    local_dofs: list
    interface_dofs: np.ndarray

    @property
    def num_dofs(self) -> int:
        return self.free_nodes.shape[0]


def free_node_map(mesh: StructuredMesh) -> tuple[np.ndarray, np.ndarray]:
    free = np.flatnonzero(~mesh.node_on_physical_boundary)
    node_to_dof = np.full(mesh.num_nodes, -1, dtype=np.int64)
    node_to_dof[free] = np.arange(free.size)
    return free, node_to_dof


def build_dofmap(partition: Partition) -> DofMap:
    free, node_to_dof = free_node_map(partition.mesh)
    local = [node_to_dof[nodes] for nodes in partition.subdomain_interior_nodes]
    iface = node_to_dof[np.flatnonzero(partition.node_class == NodeClass.INTERFACE)]
    return DofMap(free_nodes=free, node_to_dof=node_to_dof, local_dofs=local, interface_dofs=iface)


def assemble_neumann(mesh: StructuredMesh, coef: np.ndarray, triangles: np.ndarray | None = None) -> sp.csr_matrix:
    """Stiffness matrix over all mesh nodes (no boundary conditions).

    ``coef`` holds one value per mesh triangle; only ``triangles`` (default:
    all) contribute.
    """
    if triangles is None:
        tris, c = mesh.triangles, coef
    else:
        tris, c = mesh.triangles[triangles], coef[triangles]
    rows, cols, vals = kernels.p1_stiffness_triplets(
        np.ascontiguousarray(mesh.nodes, dtype=np.float64),
        np.ascontiguousarray(tris, dtype=np.int64),
        np.ascontiguousarray(c, dtype=np.float64),
    )
    N = mesh.num_nodes
    return sp.coo_matrix((vals, (rows, cols)), shape=(N, N)).tocsr()


def _restrict(K: sp.csr_matrix, nodes: np.ndarray) -> sp.csr_matrix:
    R = K[nodes][:, nodes]
    R.sort_indices()
    return R.tocsr()


def assemble_stiffness(mesh: StructuredMesh, field: CoefficientField) -> sp.csr_matrix:
    """Global stiffness matrix of a(u, v) on the free dofs."""
    if field.alpha_per_triangle.shape[0] != mesh.num_triangles:
        raise ValueError("coefficient field does not match mesh")
    free, _ = free_node_map(mesh)
    return _restrict(assemble_neumann(mesh, field.alpha_per_triangle), free)


def edge_midpoints(mesh: StructuredMesh) -> np.ndarray:
    """Midpoint of edge ``e`` (vertex e to vertex e+1) of every triangle, shape (T, 3, 2)."""
    p = mesh.nodes[mesh.triangles]
    return 0.5 * (p + np.roll(p, -1, axis=1))


def assemble_load(mesh: StructuredMesh, f) -> np.ndarray:
    """Load vector of ``f(x, y)`` against the hat functions, on free dofs.

    Uses the edge-midpoint rule, exact for quadratic integrands.  ``f`` must
    accept numpy arrays.
    """
    mid = edge_midpoints(mesh)
    fm = np.broadcast_to(np.asarray(f(mid[..., 0], mid[..., 1]), dtype=np.float64), mid.shape[:2])
    full = kernels.p1_load(
        np.ascontiguousarray(mesh.nodes, dtype=np.float64),
        np.ascontiguousarray(mesh.triangles, dtype=np.int64),
        np.ascontiguousarray(fm),
        mesh.num_nodes,
    )
    free, _ = free_node_map(mesh)
    return full[free]


def sine_rhs(x, y):
    """Right-hand side whose continuous solution is sin(pi x) sin(pi y) for alpha = 1."""
    return 2.0 * np.pi**2 * np.sin(np.pi * x) * np.sin(np.pi * y)


def local_coefficients(
    partition: Partition,
    field: CoefficientField,
    extrema: CoefficientExtrema,
    k: int,
    space_type: SpaceType,
) -> np.ndarray:
    """Per-triangle coefficient of b_k for the given type (zero outside Omega_k)."""
    space_type = SpaceType(space_type)
    coef = np.zeros(partition.mesh.num_triangles)
    tris = partition.subdomain_triangles[k]
    if space_type is SpaceType.SUBD:
        coef[tris] = extrema.under[k]
    else:
        coef[tris] = field.alpha_per_triangle[tris]
        coef[partition.layer_triangles[k]] = extrema.under_delta[k]
    return coef


def assemble_local(
    partition: Partition,
    field: CoefficientField,
    extrema: CoefficientExtrema,
    k: int,
    space_type: SpaceType,
) -> tuple[sp.csr_matrix, sp.csr_matrix]:
    """Matrices of a_k and b_k on the zero-trace space of subdomain ``k``.

    Rows/columns follow ``partition.subdomain_interior_nodes[k]``.

    Raises
    ------
    ValueError
        If the subdomain has no interior node (H/h = 1).
    """
    if not 0 <= k < partition.num_subdomains:
        raise ValueError(f"subdomain index {k} out of range")
    inner = partition.subdomain_interior_nodes[k]
    if inner.size == 0:
        raise ValueError(f"subdomain {k} has no interior degrees of freedom (H/h = {partition.ratio})")
    mesh = partition.mesh
    tris = partition.subdomain_triangles[k]
    A = _restrict(assemble_neumann(mesh, field.alpha_per_triangle, tris), inner)
    bcoef = local_coefficients(partition, field, extrema, k, space_type)
    B = _restrict(assemble_neumann(mesh, bcoef, tris), inner)
    return A, B


def assemble_subdomain_energy(partition: Partition, field: CoefficientField, k: int) -> sp.csr_matrix:
    """Matrix of a_k on the global free dofs (full trace, zero elsewhere)."""
    mesh = partition.mesh
    free, _ = free_node_map(mesh)
    K = assemble_neumann(mesh, field.alpha_per_triangle, partition.subdomain_triangles[k])
    return _restrict(K, free)


def export_matrix_market(matrix, path, comment: str = "") -> None:
    """Write ``matrix`` in MatrixMarket coordinate format (1-based indices)."""
    scipy.io.mmwrite(str(path), sp.coo_matrix(matrix), comment=comment, field="real", symmetry="general")
