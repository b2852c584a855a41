"""Oracle checks on desk-scale instances, shared by the ``verify`` command."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .assembly import SpaceType
from .coefficient import CoefficientGeometry
from .config import ExperimentConfig
from .experiments import setup_problem
from .krylov import pcg
from .oracle import check_stable_splitting, dense_preconditioned_spectrum, splitting_constant
from .precond import Variant


@dataclass
class Check:
    name: str
    passed: bool
    detail: dict

    def line(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        info = ", ".join(f"{k}={v:.4g}" if isinstance(v, float) else f"{k}={v}" for k, v in self.detail.items())
        return f"[{flag}] {self.name}: {info}"


def default_instances() -> list[ExperimentConfig]:
    geom = CoefficientGeometry(1.0, 1e4, 1e6)
    cells = []
    for n, N in [(12, 2), (18, 3)]:
        for t in SpaceType:
            cells.append(ExperimentConfig.from_dict({"n": n, "N_side": N}).replace(
                geometry=geom, space_type=t, variant=Variant.ADD))
    return cells


def verify_instance(cfg: ExperimentConfig, samples: int = 20, seed: int = 0) -> list[Check]:
    prob = setup_problem(cfg)
    tag = f"n={cfg.n} N_side={cfg.N_side} {cfg.space_type.value} {cfg.variant.value}"
    checks = []

    lam_ok, worst = True, 0.0
    for s in prob.spectra:
        bound = (prob.extrema.contrast() if s.space_type is SpaceType.SUBD else prob.extrema.layer_contrast())[s.k]
        lo, hi = s.eigenvalues.min(), s.eigenvalues.max()
        lam_ok &= bool(lo >= 1 - 1e-8 and hi <= bound * (1 + 1e-8))
        worst = max(worst, hi / bound)
    checks.append(Check(f"eigenvalue bounds ({tag})", lam_ok, {"max_lambda_over_bound": float(worst)}))

    dense = dense_preconditioned_spectrum(prob.A, prob.preconditioner)
    _, rep = pcg(prob.A, prob.b, prob.preconditioner, tol=cfg.tolerance)
    rel = abs(rep.kappa - dense.kappa) / dense.kappa
    checks.append(Check(f"lanczos vs dense kappa ({tag})", rel <= 0.05,
                        {"lanczos": rep.kappa, "dense": dense.kappa, "rel_diff": float(rel)}))
    if cfg.variant is Variant.ADD:
        checks.append(Check(f"lambda_max <= 2 ({tag})", dense.lambda_max <= 2 + 1e-8,
                            {"lambda_max": dense.lambda_max}))

    rng = np.random.default_rng(seed)
    errs, ratios = [], []
    for _ in range(samples):
        u = rng.standard_normal(prob.A.shape[0])
        r = check_stable_splitting(prob.A, prob.coarse, prob.spectra, prob.partition, u)
        errs.append(r.reconstruction_error)
        ratios.append(r.ratio)
    checks.append(Check(f"splitting reconstruction ({tag})", max(errs) <= 1e-12,
                        {"max_error": float(max(errs))}))
    # the smallest eigenvalue of the preconditioned operator is bounded below by 1/C_split
    C = splitting_constant(prob.A, prob.coarse, prob.spectra)
    checks.append(Check(f"sampled ratios <= splitting constant ({tag})", max(ratios) <= C * (1 + 1e-8),
                        {"max_sampled_ratio": float(max(ratios)), "constant": C}))
    checks.append(Check(f"lambda_min >= 1/splitting constant ({tag})",
                        dense.lambda_min >= 1.0 / C - 1e-8,
                        {"lambda_min": dense.lambda_min, "one_over_constant": 1.0 / C}))
    return checks


def run_verification(instances=None) -> list[Check]:
    checks = []
    for cfg in instances or default_instances():
        checks.extend(verify_instance(cfg))
    return checks
