"""Average interpolation and the enriched coarse space."""
from __future__ import annotations

import json
import re
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from .assembly import DofMap, build_dofmap
from .mesh import Partition
from .spectral import FactorizationError, LocalSpectrum, spectral_projection

PIVOT_RTOL = 1e-12


def average_operator(partition: Partition, dofmap: DofMap | None = None) -> sp.csr_matrix:
    """Matrix of the average interpolation on the free dofs.

    Interface values are kept; every node inside subdomain k receives the
    mean of u over the nodes of the subdomain boundary, physical boundary
    nodes (where u = 0) included in the count.
    """
    dm = dofmap or build_dofmap(partition)
    rows, cols, vals = [dm.interface_dofs], [dm.interface_dofs], [np.ones(dm.interface_dofs.size)]
    for k, inner in enumerate(dm.local_dofs):
        bnd = dm.node_to_dof[partition.subdomain_boundary_nodes[k]]
        n_k = bnd.size
        bnd = bnd[bnd >= 0]
        r, c = np.meshgrid(inner, bnd, indexing="ij")
        rows.append(r.ravel())
        cols.append(c.ravel())
        vals.append(np.full(r.size, 1.0 / n_k))
    n = dm.num_dofs
    Q = sp.coo_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n))
    return Q.tocsr()


def average_interpolate(partition: Partition, u: np.ndarray, dofmap: DofMap | None = None) -> np.ndarray:
    return average_operator(partition, dofmap) @ u


@dataclass
class CoarseSpace:
    """Coarse basis stored as the columns of ``R0`` (free dofs x coarse dofs).

    The first ``num_interface`` columns are the averaged hat functions of
    the interface nodes; the remaining ones are zero-extended eigenvectors,
    with ``column_owner`` giving their subdomain (``-1`` for interface
    columns).
    """

    partition: Partition
    dofmap: DofMap
    averaging: sp.csr_matrix
    R0: sp.csr_matrix
    A0: np.ndarray
    column_owner: np.ndarray
    enrichment_counts: np.ndarray
    _factor: tuple = field(repr=False, default=None)

    @property
    def dimension(self) -> int:
        return self.R0.shape[1]

    @property
    def num_interface(self) -> int:
        return self.dofmap.interface_dofs.size

    def solve(self, r: np.ndarray) -> np.ndarray:
        """Galerkin coarse correction ``R0 A0^{-1} R0^T r``."""
        if self.dimension == 0:
            return np.zeros_like(r)
        return self.R0 @ sla.cho_solve(self._factor, self.R0.T @ r)

    def summary(self) -> dict:
        return {
            "dimension": int(self.dimension),
            "interface_dimension": int(self.num_interface),
            "enrichment_total": int(self.enrichment_counts.sum()),
            "enrichment_per_subdomain": [int(m) for m in self.enrichment_counts],
        }

    def write_summary(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.summary(), fh, indent=2)


def factorize_coarse(A0: np.ndarray, column_owner: np.ndarray) -> tuple:
    """Cholesky factor of the coarse matrix with a near-rank-deficiency guard."""
    if A0.shape[0] == 0:
        return None
    scale = float(np.max(np.diag(A0)))

    def describe(cols):
        return ", ".join(
            f"{c} ({'interface' if column_owner[c] < 0 else f'subdomain {column_owner[c]}'})" for c in cols
        )

    try:
        factor = sla.cho_factor(A0, lower=True)
    except np.linalg.LinAlgError as exc:
        m = re.search(r"(\d+)", str(exc))
        col = int(m.group(1)) - 1 if m else -1
        where = describe([col]) if 0 <= col < A0.shape[0] else "unknown"
        raise FactorizationError(f"coarse matrix is not positive definite; failing column {where}") from exc
    pivots = np.diag(factor[0]) ** 2
    bad = np.flatnonzero(pivots < PIVOT_RTOL * scale)
    if bad.size:
        raise FactorizationError(
            f"coarse basis is numerically rank deficient; tiny pivots at columns {describe(bad[:10])}"
        )
    return factor


def build_coarse_space(
    partition: Partition,
    A: sp.spmatrix,
    spectra: list[LocalSpectrum] | None = None,
    dofmap: DofMap | None = None,
) -> CoarseSpace:
    """Average coarse space enriched with the selected local eigenvectors."""
    dm = dofmap or build_dofmap(partition)
    Q = average_operator(partition, dm)
    n = dm.num_dofs
    Qi = Q[:, dm.interface_dofs].tocoo()
    rows, cols, vals = [Qi.row], [Qi.col], [Qi.data]
    owner = [np.full(dm.interface_dofs.size, -1)]
    counts = np.zeros(partition.num_subdomains, dtype=int)
    offset = dm.interface_dofs.size
    for s in spectra or []:
        V = s.selected_vectors
        M = V.shape[1]
        counts[s.k] = M
        if M == 0:
            continue
        rows.append(np.repeat(dm.local_dofs[s.k], M))
        cols.append(np.tile(np.arange(M), V.shape[0]) + offset)
        vals.append(V.ravel())
        owner.append(np.full(M, s.k))
        offset += M
    R0 = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, offset)
    ).tocsr()
    return coarse_from_basis(partition, A, R0, np.concatenate(owner), counts, dm, Q)


def coarse_from_basis(partition, A, R0, column_owner=None, enrichment_counts=None, dofmap=None, averaging=None):
    """Galerkin coarse space spanned by the columns of an arbitrary ``R0``."""
    dm = dofmap or build_dofmap(partition)
    R0 = sp.csr_matrix(R0)
    owner = np.full(R0.shape[1], -1) if column_owner is None else np.asarray(column_owner)
    counts = np.zeros(partition.num_subdomains, dtype=int) if enrichment_counts is None else enrichment_counts
    A0 = np.asarray((R0.T @ (A @ R0)).todense())
    A0 = 0.5 * (A0 + A0.T)
    return CoarseSpace(
        partition=partition,
        dofmap=dm,
        averaging=average_operator(partition, dm) if averaging is None else averaging,
        R0=R0,
        A0=A0,
        column_owner=owner,
        enrichment_counts=counts,
        _factor=factorize_coarse(A0, owner),
    )


def enriched_interpolate(coarse: CoarseSpace, spectra: list[LocalSpectrum], u: np.ndarray) -> np.ndarray:
    """Average interpolant plus the spectral projections of the local remainders."""
    Iu = coarse.averaging @ u
    w = u - Iu
    out = Iu.copy()
    for s in spectra:
        idx = coarse.dofmap.local_dofs[s.k]
        out[idx] += spectral_projection(s, w[idx])
    return out
