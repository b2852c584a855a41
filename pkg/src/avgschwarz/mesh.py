"""Structured triangulation of the unit square and its coarse partition.

Nodes are numbered row-major, ``node = j * (n + 1) + i`` for grid position
``(i, j)``.  Each grid square ``(i, j)`` is split along its bottom-left to
top-right diagonal into two counterclockwise triangles with indices
``2 * (j * n + i)`` (lower) and ``2 * (j * n + i) + 1`` (upper).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np


class NodeClass(IntEnum):
    PHYSICAL_BOUNDARY = 0
    INTERFACE = 1
    SUBDOMAIN_INTERIOR = 2


@dataclass(frozen=True)
class StructuredMesh:
    """Friedrichs-Keller triangulation of the unit square with mesh size 1/n."""

    n: int
    nodes: np.ndarray
    triangles: np.ndarray
    node_on_physical_boundary: np.ndarray

    @property
    def h(self) -> float:
        return 1.0 / self.n

    @property
    def num_nodes(self) -> int:
        return self.nodes.shape[0]

    @property
    def num_triangles(self) -> int:
        return self.triangles.shape[0]

    def node_index(self, i: int, j: int) -> int:
        return j * (self.n + 1) + i

    def grid_coords(self) -> tuple[np.ndarray, np.ndarray]:
        """Integer grid position ``(i, j)`` of every node."""
        idx = np.arange(self.num_nodes)
        return idx % (self.n + 1), idx // (self.n + 1)

    def centroids(self) -> np.ndarray:
        return self.nodes[self.triangles].mean(axis=1)

    def signed_areas(self) -> np.ndarray:
        p = self.nodes[self.triangles]
        d1 = p[:, 1] - p[:, 0]
        d2 = p[:, 2] - p[:, 0]
        return 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])


def build_mesh(n: int) -> StructuredMesh:
    """Triangulate the unit square with ``n`` subdivisions per side.

    Raises
    ------
    ValueError
        If ``n < 2`` (there would be no free node).
    """
    if int(n) != n or n < 2:
        raise ValueError(f"mesh needs n >= 2 subdivisions per side, got {n!r}")
    n = int(n)
    ii, jj = np.meshgrid(np.arange(n + 1), np.arange(n + 1), indexing="xy")
    nodes = np.column_stack([ii.ravel() / n, jj.ravel() / n])

    ci, cj = np.meshgrid(np.arange(n), np.arange(n), indexing="xy")
    ci, cj = ci.ravel(), cj.ravel()
    v00 = cj * (n + 1) + ci
    v10 = v00 + 1
    v01 = v00 + (n + 1)
    v11 = v01 + 1
    tris = np.empty((2 * n * n, 3), dtype=np.int64)
    tris[0::2] = np.column_stack([v00, v10, v11])
    tris[1::2] = np.column_stack([v00, v11, v01])

    gi, gj = ii.ravel(), jj.ravel()
    on_bnd = (gi == 0) | (gi == n) | (gj == 0) | (gj == n)
    for arr in (nodes, tris, on_bnd):
        arr.setflags(write=False)
    return StructuredMesh(n=n, nodes=nodes, triangles=tris, node_on_physical_boundary=on_bnd)


@dataclass(frozen=True)
class Partition:
    """Square subdomains aligned with the fine grid.

    Attributes
    ----------
    node_class : ndarray of NodeClass values
    node_subdomain : ndarray
        Owning subdomain for SUBDOMAIN_INTERIOR nodes, ``-1`` otherwise.
    subdomain_boundary_nodes : list of ndarray
        Nodes of each closed subdomain square's boundary, counterclockwise
        from the lower-left corner.  Nodes on the physical boundary are kept.
    subdomain_interior_nodes : list of ndarray
        Nodes strictly inside each subdomain, ascending.
    layer_triangles : list of ndarray
        Triangles of the subdomain with at least one vertex on its boundary.
    """

    mesh: StructuredMesh
    N_side: int
    triangle_subdomain: np.ndarray
    node_class: np.ndarray
    node_subdomain: np.ndarray
    subdomain_triangles: list = field(repr=False)
    subdomain_boundary_nodes: list = field(repr=False)
    subdomain_interior_nodes: list = field(repr=False)
    layer_triangles: list = field(repr=False)

    @property
    def H(self) -> float:
        return 1.0 / self.N_side

    @property
    def num_subdomains(self) -> int:
        return self.N_side * self.N_side

    @property
    def ratio(self) -> int:
        """H/h, the number of fine cells along a subdomain side."""
        return self.mesh.n // self.N_side

    def interface_nodes(self) -> np.ndarray:
        return np.flatnonzero(self.node_class == NodeClass.INTERFACE)

    def interior_triangles(self, k: int) -> np.ndarray:
        return np.setdiff1d(self.subdomain_triangles[k], self.layer_triangles[k])

    def subdomain_origin(self, k: int) -> tuple[int, int]:
        """Grid index of the lower-left corner of subdomain ``k``."""
        m = self.ratio
        return (k % self.N_side) * m, (k // self.N_side) * m


def _square_boundary(n: int, i0: int, j0: int, m: int) -> np.ndarray:
    path = (
        [(i0 + t, j0) for t in range(m)]
        + [(i0 + m, j0 + t) for t in range(m)]
        + [(i0 + m - t, j0 + m) for t in range(m)]
        + [(i0, j0 + m - t) for t in range(m)]
    )
    return np.array([j * (n + 1) + i for i, j in path], dtype=np.int64)


def build_partition(mesh: StructuredMesh, N_side: int) -> Partition:
    """Split the unit square into ``N_side**2`` congruent square subdomains.

    Subdomain ``k`` sits at grid position ``(k % N_side, k // N_side)``.
    """
    if int(N_side) != N_side or N_side < 1:
        raise ValueError(f"N_side must be a positive integer, got {N_side!r}")
    N_side = int(N_side)
    n = mesh.n
    if n % N_side:
        raise ValueError(
            f"fine mesh n={n} is not divisible by N_side={N_side}; "
            "subdomain boundaries must align with fine edges"
        )
    m = n // N_side

    # the lower-left corner of a triangle's square identifies its subdomain
    t = np.arange(mesh.num_triangles)
    sq = t // 2
    si, sj = sq % n, sq // n
    tri_sub = (sj // m) * N_side + (si // m)

    gi, gj = mesh.grid_coords()
    on_lines = (gi % m == 0) | (gj % m == 0)
    node_class = np.full(mesh.num_nodes, NodeClass.SUBDOMAIN_INTERIOR, dtype=np.int8)
    node_class[on_lines] = NodeClass.INTERFACE
    node_class[mesh.node_on_physical_boundary] = NodeClass.PHYSICAL_BOUNDARY
    node_sub = np.where(
        node_class == NodeClass.SUBDOMAIN_INTERIOR,
        (gj // m) * N_side + (gi // m),
        -1,
    )

    sub_tris, bnd_nodes, int_nodes, layers = [], [], [], []
    for k in range(N_side * N_side):
        i0, j0 = (k % N_side) * m, (k // N_side) * m
        tris_k = np.flatnonzero(tri_sub == k)
        bnd = _square_boundary(n, i0, j0, m)
        vi, vj = gi[mesh.triangles[tris_k]], gj[mesh.triangles[tris_k]]
        touches = ((vi == i0) | (vi == i0 + m) | (vj == j0) | (vj == j0 + m)).any(axis=1)
        sub_tris.append(tris_k)
        bnd_nodes.append(bnd)
        int_nodes.append(np.flatnonzero(node_sub == k))
        layers.append(tris_k[touches])

    for arr in (tri_sub, node_class, node_sub, *sub_tris, *bnd_nodes, *int_nodes, *layers):
        arr.setflags(write=False)
    return Partition(
        mesh=mesh,
        N_side=N_side,
        triangle_subdomain=tri_sub,
        node_class=node_class,
        node_subdomain=node_sub,
        subdomain_triangles=sub_tris,
        subdomain_boundary_nodes=bnd_nodes,
        subdomain_interior_nodes=int_nodes,
        layer_triangles=layers,
    )
