"""Preconditioned conjugate gradients with a Lanczos condition estimate."""
from __future__ import annotations

import csv
import time
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

DEFAULT_TOL = 5e-6


class BreakdownError(ArithmeticError):
    """p^T A p <= 0 or r^T z <= 0: an operator is not SPD."""


@dataclass(frozen=True)
class LanczosEstimate:
    kappa: float
    lambda_min: float
    lambda_max: float
    degenerate: bool  # fewer than two iterations; kappa is reported as 1


@dataclass
class SolveReport:
    iterations: int
    residual_history: np.ndarray
    converged: bool
    alphas: np.ndarray = field(repr=False)
    betas: np.ndarray = field(repr=False)
    condition: LanczosEstimate | None = None
    wall_time: float = 0.0
    enrichment_counts: list | None = None
    coarse_dimension: int | None = None

    @property
    def kappa(self) -> float:
        return self.condition.kappa if self.condition is not None else float("nan")

    @property
    def final_residual(self) -> float:
        return float(self.residual_history[-1])

    def write_residual_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["iteration", "relative_residual"])
            for i, r in enumerate(self.residual_history):
                w.writerow([i, repr(float(r))])


def lanczos_tridiagonal(alphas, betas) -> tuple[np.ndarray, np.ndarray]:
    """Diagonal and off-diagonal of the Lanczos matrix implied by PCG coefficients.

    ``alphas[j]`` are the step lengths and ``betas[j]`` the direction
    update coefficients, with ``betas`` at least one shorter than
    ``alphas``.
    """
    a = np.asarray(alphas, dtype=np.float64)
    b = np.asarray(betas, dtype=np.float64)[: max(a.size - 1, 0)]
    d = 1.0 / a
    d[1:] += b / a[:-1]
    e = np.sqrt(b) / a[:-1]
    return d, e


def condition_estimate(alphas, betas) -> LanczosEstimate:
    """Ratio of the extreme eigenvalues of the PCG Lanczos matrix."""
    a = np.asarray(alphas, dtype=np.float64)
    if a.size < 2:
        lam = 1.0 / a[0] if a.size else 1.0
        return LanczosEstimate(1.0, lam, lam, True)
    d, e = lanczos_tridiagonal(a, betas)
    theta = sla.eigvalsh_tridiagonal(d, e)
    return LanczosEstimate(float(theta[-1] / theta[0]), float(theta[0]), float(theta[-1]), False)


def _as_operator(M):
    if M is None:
        return lambda r: r.copy()
    if callable(M):
        return M
    return lambda r: M @ r


def pcg(A, b, M=None, tol: float = DEFAULT_TOL, max_iter: int | None = None, residual_norm: str = "unpreconditioned"):
    """Solve ``A x = b`` by PCG from a zero initial guess.

    Stops when the residual norm has dropped by ``tol`` relative to the
    initial one.  ``residual_norm`` selects the Euclidean norm of ``r``
    (``"unpreconditioned"``) or ``sqrt(r^T M r)`` (``"preconditioned"``).

    Returns
    -------
    x : ndarray
    report : SolveReport
        Non-converged runs (``max_iter`` reached) keep their partial data.

    Raises
    ------
    BreakdownError
        If a curvature ``p^T A p`` or ``r^T z`` is not positive.
    """
    if residual_norm not in ("unpreconditioned", "preconditioned"):
        raise ValueError(f"unknown residual norm {residual_norm!r}")
    t0 = time.perf_counter()
    matvec = _as_operator(A)
    prec = _as_operator(M)
    b = np.asarray(b, dtype=np.float64)
    n = b.shape[0]
    if max_iter is None:
        max_iter = 4 * n

    x = np.zeros(n)
    r = b.copy()
    z = prec(r)
    rz = float(r @ z)

    def norm(r, rz):
        return np.sqrt(rz) if residual_norm == "preconditioned" else np.linalg.norm(r)

    r0 = norm(r, rz)
    history = [1.0]
    alphas, betas = [], []
    if r0 == 0.0:
        report = SolveReport(0, np.array([0.0]), True, np.array([]), np.array([]), LanczosEstimate(1.0, 1.0, 1.0, True))
        return x, report
    if rz <= 0:
        raise BreakdownError(f"preconditioner is not positive definite (r^T z = {rz:.3e})")

    p = z.copy()
    converged = False
    for it in range(1, max_iter + 1):
        q = matvec(p)
        pq = float(p @ q)
        if pq <= 0:
            raise BreakdownError(f"operator is not positive definite (p^T A p = {pq:.3e} at iteration {it})")
        alpha = rz / pq
        x += alpha * p
        r -= alpha * q
        z = prec(r)
        rz_new = float(r @ z)
        alphas.append(alpha)
        res = norm(r, max(rz_new, 0.0)) / r0
        history.append(res)
        if res <= tol or res == 0.0:
            converged = True
            break
        if rz_new <= 0:
            raise BreakdownError(f"preconditioner is not positive definite (r^T z = {rz_new:.3e})")
        beta = rz_new / rz
        betas.append(beta)
        p = z + beta * p
        rz = rz_new

    report = SolveReport(
        iterations=len(alphas),
        residual_history=np.array(history),
        converged=converged,
        alphas=np.array(alphas),
        betas=np.array(betas),
        condition=condition_estimate(alphas, betas),
        wall_time=time.perf_counter() - t0,
    )
    return x, report
