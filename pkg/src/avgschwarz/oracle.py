"""Dense brute-force references for checking the solver pipeline.

Everything here materializes operators densely and is only meant for
desk-scale problems.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from .coarse import CoarseSpace, enriched_interpolate
from .mesh import Partition, StructuredMesh
from .spectral import LocalSpectrum

MAX_DENSE_DOFS = 5000


@dataclass(frozen=True)
class SpectrumReport:
    eigenvalues: np.ndarray
    lambda_min: float
    lambda_max: float
    kappa: float

    def to_dict(self) -> dict:
        return {"lambda_min": self.lambda_min, "lambda_max": self.lambda_max, "kappa": self.kappa,
                "num_eigenvalues": int(self.eigenvalues.size)}


def materialize(op, n: int) -> np.ndarray:
    """Dense matrix of a linear map given as a callable, column by column."""
    if n > MAX_DENSE_DOFS:
        raise ValueError(f"{n} dofs exceed the dense oracle limit of {MAX_DENSE_DOFS}")
    if not callable(op):
        return op.toarray() if sp.issparse(op) else np.asarray(op, dtype=np.float64)
    cols = np.empty((n, n))
    e = np.zeros(n)
    for j in range(n):
        e[j] = 1.0
        cols[:, j] = op(e)
        e[j] = 0.0
    return cols


def dense_preconditioned_spectrum(A, M) -> SpectrumReport:
    """All eigenvalues of ``M A`` where ``M`` is the preconditioner action.

    With ``A = L L^T`` the product ``M A`` is similar to the symmetric
    matrix ``L^T M L``, which is diagonalized directly.
    """
    n = A.shape[0]
    if n > MAX_DENSE_DOFS:
        raise ValueError(f"{n} dofs exceed the dense oracle limit of {MAX_DENSE_DOFS}")
    Ad = materialize(A, n)
    Md = materialize(M, n)
    Md = 0.5 * (Md + Md.T)
    L = sla.cholesky(Ad, lower=True)
    S = L.T @ Md @ L
    theta = sla.eigvalsh(0.5 * (S + S.T))
    return SpectrumReport(theta, float(theta[0]), float(theta[-1]), float(theta[-1] / theta[0]))


def dense_stiffness(mesh: StructuredMesh, alpha: np.ndarray) -> np.ndarray:
    """Reference stiffness on free dofs, by explicit loops over elements.

    Uses gradients of the barycentric coordinates obtained by inverting the
    vertex matrix, independent of the production assembly formula.
    """
    free = np.flatnonzero(~mesh.node_on_physical_boundary)
    pos = {int(v): i for i, v in enumerate(free)}
    K = np.zeros((free.size, free.size))
    for t, tri in enumerate(mesh.triangles):
        P = np.column_stack([np.ones(3), mesh.nodes[tri]])
        G = np.linalg.inv(P)[1:, :]  # gradients of the three barycentric functions
        area = 0.5 * abs(np.linalg.det(P))
        Ke = alpha[t] * area * (G.T @ G)
        for a in range(3):
            for b in range(3):
                ia, ib = pos.get(int(tri[a])), pos.get(int(tri[b]))
                if ia is not None and ib is not None:
                    K[ia, ib] += Ke[a, b]
    return K


@dataclass(frozen=True)
class SplittingReport:
    reconstruction_error: float
    ratio: float
    energy_coarse: float
    energy_local: float
    energy_total: float


def check_stable_splitting(
    A, coarse: CoarseSpace, spectra: list[LocalSpectrum], partition: Partition, u: np.ndarray
) -> SplittingReport:
    """Split ``u`` into the enriched interpolant plus zero-extended local remainders.

    Returns the relative reconstruction error and the ratio
    ``(a(u0, u0) + sum_k a(u_k, u_k)) / a(u, u)``.
    """
    u0 = enriched_interpolate(coarse, spectra, u)
    rest = u - u0
    parts = []
    for idx in coarse.dofmap.local_dofs:
        uk = np.zeros_like(u)
        uk[idx] = rest[idx]
        parts.append(uk)
    recon = u0 + sum(parts) if parts else u0
    err = np.linalg.norm(recon - u) / max(np.linalg.norm(u), np.finfo(float).tiny)
    e0 = float(u0 @ (A @ u0))
    eloc = float(sum(p @ (A @ p) for p in parts))
    eu = float(u @ (A @ u))
    return SplittingReport(float(err), (e0 + eloc) / eu, e0, eloc, eu)


def splitting_constant(A, coarse: CoarseSpace, spectra: list[LocalSpectrum]) -> float:
    """Supremum over u of the splitting ratio, from a dense generalized eigenproblem.

    With ``T`` the matrix of the enriched interpolation, the summed energy
    of the splitting is ``u^T S u`` with ``S = T^T A T + (I - T)^T A (I - T)``;
    the local parts are a-orthogonal and ``u - Tu`` vanishes on the
    interface, so their energies add up to that of ``u - Tu``.
    """
    n = A.shape[0]
    T = materialize(lambda u: enriched_interpolate(coarse, spectra, u), n)
    Ad = materialize(A, n)
    R = np.eye(n) - T
    S = T.T @ Ad @ T + R.T @ Ad @ R
    return float(sla.eigh(0.5 * (S + S.T), Ad, eigvals_only=True)[-1])


def write_json_report(payload: dict, path) -> None:
    def default(o):
        if isinstance(o, np.ndarray):
            return o.tolist()
        if isinstance(o, (np.floating, np.integer)):
            return o.item()
        if hasattr(o, "__dataclass_fields__"):
            return asdict(o)
        raise TypeError(type(o))

    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, default=default)
