"""Local generalized eigenproblems and adaptive selection of enrichment modes."""
from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Union

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from .assembly import SpaceType, assemble_local
from .coefficient import CoefficientExtrema, CoefficientField
from .mesh import Partition

# relative gap below which consecutive eigenvalues count as one eigengroup
MULTIPLICITY_RTOL = 1e-8


class FactorizationError(np.linalg.LinAlgError):
    """Raised when a matrix expected to be SPD fails to factorize."""


@dataclass(frozen=True)
class ThresholdPolicy:
    """Select eigenpairs whose eigenvalue exceeds ``threshold``."""

    threshold: float = 100.0


@dataclass(frozen=True)
class FixedPolicy:
    """Select the ``count`` largest eigenpairs."""

    count: int


Policy = Union[ThresholdPolicy, FixedPolicy]


@dataclass(frozen=True)
class LocalSpectrum:
    """Eigenpairs of a_k(psi, v) = lambda b_k(psi, v) on one subdomain.

    ``eigenvalues`` are sorted decreasingly and the columns of
    ``eigenvectors`` are b_k-orthonormal.  ``A`` and ``B`` are the dense
    local matrices the pairs were computed from.
    """

    k: int
    space_type: SpaceType
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    A: np.ndarray
    B: np.ndarray
    selected: int = 0

    @property
    def size(self) -> int:
        return self.eigenvalues.shape[0]

    @property
    def lambda_next(self) -> float:
        """First eigenvalue left out of the enrichment."""
        return float(self.eigenvalues[self.selected])

    @property
    def selected_vectors(self) -> np.ndarray:
        return self.eigenvectors[:, : self.selected]

    def with_selection(self, count: int) -> "LocalSpectrum":
        if not 0 <= count < self.size:
            raise ValueError(f"selection {count} outside [0, {self.size})")
        return LocalSpectrum(self.k, self.space_type, self.eigenvalues, self.eigenvectors, self.A, self.B, count)


def _dense(M) -> np.ndarray:
    return M.toarray() if sp.issparse(M) else np.asarray(M, dtype=np.float64)


def _eigengroups(lam: np.ndarray) -> list[tuple[int, int]]:
    groups, start = [], 0
    for j in range(1, lam.size + 1):
        if j == lam.size or lam[j] < lam[j - 1] * (1.0 - MULTIPLICITY_RTOL):
            groups.append((start, j))
            start = j
    return groups


def solve_gevp(A, B) -> tuple[np.ndarray, np.ndarray]:
    """All eigenpairs of ``A psi = lambda B psi``, largest eigenvalue first.

    Reduces to a standard symmetric problem with the Cholesky factor
    ``B = L L^T``, diagonalizes ``L^{-1} A L^{-T}`` and maps the vectors back.
    Vectors come out B-orthonormal; each group of repeated eigenvalues is
    re-orthonormalized in the B inner product to remove roundoff drift.

    Raises
    ------
    FactorizationError
        If ``B`` is not positive definite.
    """
    A, B = _dense(A), _dense(B)
    if A.shape != B.shape or A.shape[0] != A.shape[1]:
        raise ValueError(f"shape mismatch: A {A.shape}, B {B.shape}")
    try:
        L = sla.cholesky(B, lower=True)
    except np.linalg.LinAlgError as exc:
        raise FactorizationError(f"b-form matrix is not positive definite: {exc}") from exc
    X = sla.solve_triangular(L, A, lower=True)
    C = sla.solve_triangular(L, X.T, lower=True)
    C = 0.5 * (C + C.T)
    lam, Y = sla.eigh(C)
    lam, Y = lam[::-1], Y[:, ::-1]
    psi = sla.solve_triangular(L, Y, lower=True, trans="T")

    for lo, hi in _eigengroups(lam):
        if hi - lo > 1:
            psi[:, lo:hi] = _b_gram_schmidt(psi[:, lo:hi], B)
        else:
            psi[:, lo] /= np.sqrt(psi[:, lo] @ B @ psi[:, lo])
    return lam, psi


def _b_gram_schmidt(V: np.ndarray, B: np.ndarray) -> np.ndarray:
    V = V.copy()
    for i in range(V.shape[1]):
        for _ in range(2):
            V[:, i] -= V[:, :i] @ (V[:, :i].T @ (B @ V[:, i]))
        V[:, i] /= np.sqrt(V[:, i] @ B @ V[:, i])
    return V


def select_enrichment(eigenvalues, policy: Policy) -> int:
    """Number of leading eigenpairs to put in the coarse space.

    A selection never splits a group of repeated eigenvalues (it is
    extended upward instead) and never takes the whole local space.
    """
    lam = np.asarray(eigenvalues, dtype=np.float64)
    N = lam.size
    if N == 0:
        return 0
    if isinstance(policy, ThresholdPolicy):
        M = int(np.count_nonzero(lam > policy.threshold))
    elif isinstance(policy, FixedPolicy):
        if policy.count < 0:
            raise ValueError("fixed enrichment count must be non-negative")
        M = min(int(policy.count), N)
    else:
        raise TypeError(f"unknown enrichment policy {policy!r}")
    M = min(M, N - 1)
    while 0 < M < N - 1 and not lam[M] < lam[M - 1] * (1.0 - MULTIPLICITY_RTOL):
        M += 1
    return M


def local_spectrum(
    partition: Partition,
    field: CoefficientField,
    extrema: CoefficientExtrema,
    k: int,
    space_type: SpaceType,
    policy: Policy | None = None,
) -> LocalSpectrum:
    A, B = assemble_local(partition, field, extrema, k, space_type)
    A, B = A.toarray(), B.toarray()
    lam, psi = solve_gevp(A, B)
    M = select_enrichment(lam, policy) if policy is not None else 0
    return LocalSpectrum(k, SpaceType(space_type), lam, psi, A, B, M)


def all_spectra(partition, field, extrema, space_type, policy) -> list[LocalSpectrum]:
    return [
        local_spectrum(partition, field, extrema, k, space_type, policy)
        for k in range(partition.num_subdomains)
    ]


def spectral_projection(spectrum: LocalSpectrum, v: np.ndarray) -> np.ndarray:
    """b_k-orthogonal projection of a local vector onto the selected modes."""
    Psi = spectrum.selected_vectors
    if Psi.shape[1] == 0:
        return np.zeros_like(np.asarray(v, dtype=np.float64))
    return Psi @ (Psi.T @ (spectrum.B @ v))


def write_spectra_csv(spectra: list[LocalSpectrum], path) -> None:
    """One row per eigenpair: subdomain, 1-based index, eigenvalue, selected flag."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["k", "j", "lambda", "selected", "type"])
        for s in spectra:
            for j, lam in enumerate(s.eigenvalues):
                w.writerow([s.k, j + 1, repr(float(lam)), int(j < s.selected), s.space_type.value])
