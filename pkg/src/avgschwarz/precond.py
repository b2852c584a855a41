"""Additive and multiplicative average Schwarz preconditioners."""
from __future__ import annotations

from enum import Enum

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .coarse import CoarseSpace
from .spectral import FactorizationError


class Variant(str, Enum):
    ADD = "add"
    MLT = "mlt"


class SchwarzPreconditioner:
    """Exact solves on subdomain interiors combined with a Galerkin coarse solve.

    ``apply`` returns the action of the preconditioner (an approximation of
    ``A^{-1}``) on a residual.  For ``Variant.ADD`` this is
    ``R0 A0^{-1} R0^T r + sum_k E_k A_k^{-1} E_k^T r``.  For ``Variant.MLT``
    it is the symmetric sweep coarse, locals, coarse, whose error
    propagation is ``(I - P0)(I - sum_k P_k)(I - P0)``.  The local
    corrections can be applied simultaneously because subdomain interiors
    do not couple.

    Parameters
    ----------
    A : sparse matrix
        Global stiffness matrix on the free dofs.
    local_dofs : list of ndarray
        Free dofs strictly inside each subdomain.
    coarse : CoarseSpace or None
        ``None`` drops the coarse term (one-level method, used in tests).
    """

    def __init__(self, A, local_dofs, coarse: CoarseSpace | None, variant: Variant = Variant.ADD):
        self.A = sp.csr_matrix(A)
        self.variant = Variant(variant)
        self.coarse = coarse
        self.local_dofs = [np.asarray(d) for d in local_dofs]
        self.local_blocks = []
        self.local_factors = []
        for k, idx in enumerate(self.local_dofs):
            Ak = self.A[idx][:, idx].toarray()
            try:
                fac = sla.cho_factor(Ak, lower=True)
            except np.linalg.LinAlgError as exc:
                raise FactorizationError(f"local block of subdomain {k} is not positive definite") from exc
            self.local_blocks.append(Ak)
            self.local_factors.append(fac)

    @property
    def shape(self):
        return self.A.shape

    def local_solve(self, r: np.ndarray) -> np.ndarray:
        z = np.zeros_like(r, dtype=np.float64)
        for idx, fac in zip(self.local_dofs, self.local_factors):
            z[idx] = sla.cho_solve(fac, r[idx])
        return z

    def coarse_solve(self, r: np.ndarray) -> np.ndarray:
        if self.coarse is None:
            return np.zeros_like(r, dtype=np.float64)
        return self.coarse.solve(r)

    def apply_additive(self, r: np.ndarray) -> np.ndarray:
        return self.coarse_solve(r) + self.local_solve(r)

    def apply_multiplicative(self, r: np.ndarray) -> np.ndarray:
        x = self.coarse_solve(r)
        x += self.local_solve(r - self.A @ x)
        x += self.coarse_solve(r - self.A @ x)
        return x

    def apply(self, r: np.ndarray) -> np.ndarray:
        r = np.asarray(r, dtype=np.float64)
        if self.variant is Variant.ADD:
            return self.apply_additive(r)
        return self.apply_multiplicative(r)

    __call__ = apply

    def as_linear_operator(self) -> spla.LinearOperator:
        return spla.LinearOperator(self.shape, matvec=self.apply, dtype=np.float64)


def build_preconditioner(A, dofmap, coarse: CoarseSpace | None, variant=Variant.ADD) -> SchwarzPreconditioner:
    return SchwarzPreconditioner(A, dofmap.local_dofs, coarse, variant)
