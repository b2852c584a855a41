"""End-to-end experiment pipeline and the table/figure sweeps."""
from __future__ import annotations

import csv
import json
import logging
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .assembly import SpaceType, assemble_load, assemble_stiffness, build_dofmap, sine_rhs
from .coarse import build_coarse_space
from .coefficient import build_coefficient, coefficient_extrema
from .config import ExperimentConfig
from .krylov import pcg
from .mesh import build_mesh, build_partition
from .precond import Variant, build_preconditioner
from .spectral import FixedPolicy, ThresholdPolicy, all_spectra

log = logging.getLogger(__name__)

THREADS_ENV = "AVGSCHWARZ_THREADS"


class PipelineError(RuntimeError):
    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"stage '{stage}' failed: {type(cause).__name__}: {cause}")
        self.stage = stage
        self.cause = cause


@dataclass
class Problem:
    """All assembled pieces of one configuration, kept for inspection."""

    mesh: object
    partition: object
    field: object
    extrema: object
    A: object
    b: np.ndarray
    dofmap: object
    spectra: list
    coarse: object
    preconditioner: object


def setup_problem(cfg: ExperimentConfig) -> Problem:
    """Run every stage up to (not including) the Krylov solve."""
    stage = "mesh"
    try:
        mesh = build_mesh(cfg.n)
        stage = "partition"
        part = build_partition(mesh, cfg.N_side)
        stage = "coefficient"
        fld = build_coefficient(mesh, part, cfg.geometry)
        ext = coefficient_extrema(part, fld)
        stage = "assembly"
        A = assemble_stiffness(mesh, fld)
        b = assemble_load(mesh, sine_rhs)
        dm = build_dofmap(part)
        stage = "spectral"
        spectra = all_spectra(part, fld, ext, cfg.space_type, cfg.policy)
        stage = "coarse"
        cs = build_coarse_space(part, A, spectra, dm)
        stage = "precond"
        M = build_preconditioner(A, dm, cs, cfg.variant)
    except Exception as exc:
        raise PipelineError(stage, exc) from exc
    return Problem(mesh, part, fld, ext, A, b, dm, spectra, cs, M)


@dataclass
class ResultRow:
    n: int
    N_side: int
    H: float
    h: float
    ratio: int
    alpha_b: float
    alpha_c: float
    alpha_i: float
    channels_continuous: bool
    type: str
    variant: str
    policy: str
    iterations: int
    kappa: float
    converged: bool
    coarse_dimension: int
    enrichment_total: int
    enrichment_counts: list
    max_lambda_next: float
    runtime: float
    config_hash: str
    status: str = "ok"
    error: str = ""

    def to_csv_dict(self) -> dict:
        d = asdict(self)
        d["enrichment_counts"] = ";".join(str(m) for m in self.enrichment_counts)
        return d


CSV_FIELDS = list(ResultRow.__dataclass_fields__)


def _policy_label(policy) -> str:
    if isinstance(policy, ThresholdPolicy):
        return f"threshold={policy.threshold:g}"
    return f"fixed={policy.count}"


def _row_skeleton(cfg: ExperimentConfig) -> dict:
    g = cfg.geometry
    return dict(
        n=cfg.n,
        N_side=cfg.N_side,
        H=1.0 / cfg.N_side,
        h=1.0 / cfg.n,
        ratio=cfg.n // cfg.N_side,
        alpha_b=g.alpha_b,
        alpha_c=g.alpha_c,
        alpha_i=g.alpha_i,
        channels_continuous=g.channels_continuous,
        type=cfg.space_type.value,
        variant=cfg.variant.value,
        policy=_policy_label(cfg.policy),
        config_hash=cfg.solver_hash(),
    )


def run_single(cfg: ExperimentConfig, problem: Problem | None = None) -> tuple[ResultRow, object]:
    """Full pipeline for one configuration; returns the row and the solve report."""
    t0 = time.perf_counter()
    prob = problem or setup_problem(cfg)
    try:
        _, report = pcg(
            prob.A, prob.b, prob.preconditioner, tol=cfg.tolerance, max_iter=cfg.max_iter,
            residual_norm=cfg.residual_norm,
        )
    except Exception as exc:
        raise PipelineError("krylov", exc) from exc
    counts = [s.selected for s in prob.spectra]
    report.enrichment_counts = counts
    report.coarse_dimension = prob.coarse.dimension
    row = ResultRow(
        **_row_skeleton(cfg),
        iterations=report.iterations,
        kappa=report.kappa,
        converged=report.converged,
        coarse_dimension=prob.coarse.dimension,
        enrichment_total=int(sum(counts)),
        enrichment_counts=counts,
        max_lambda_next=max(s.lambda_next for s in prob.spectra),
        runtime=time.perf_counter() - t0,
    )
    log.info("n=%d N=%d %s %s: %d its, kappa %.3g", cfg.n, cfg.N_side, cfg.space_type.value,
             cfg.variant.value, row.iterations, row.kappa)
    return row, report


def _failed_row(cfg: ExperimentConfig, exc: BaseException) -> ResultRow:
    return ResultRow(
        **_row_skeleton(cfg),
        iterations=-1, kappa=float("nan"), converged=False, coarse_dimension=-1,
        enrichment_total=-1, enrichment_counts=[], max_lambda_next=float("nan"), runtime=0.0,
        status="failed", error=str(exc),
    )


def _run_cell(cfg: ExperimentConfig) -> ResultRow:
    try:
        return run_single(cfg)[0]
    except Exception as exc:  # per-cell failures are recorded, the sweep goes on
        log.warning("cell n=%d N_side=%d failed: %s", cfg.n, cfg.N_side, exc)
        return _failed_row(cfg, exc)


def _num_workers() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def run_cells(cells: list[ExperimentConfig]) -> list[ResultRow]:
    workers = _num_workers()
    if workers == 1 or len(cells) == 1:
        return [_run_cell(c) for c in cells]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_cell, cells))


def table1_cells(cfg: ExperimentConfig) -> list[ExperimentConfig]:
    cells = []
    for ac, ai in cfg.sweep["jumps"]:
        geom = cfg.geometry.with_jumps(ac, ai)
        for variant in cfg.sweep["variants"]:
            for N, n in cfg.sweep_pairs():
                cells.append(cfg.replace(n=n, N_side=N, geometry=geom, variant=Variant(variant)))
    return cells


def run_table1(cfg: ExperimentConfig) -> list[ResultRow]:
    """H/h and coefficient-jump sweep with the configured enrichment policy."""
    return run_cells(table1_cells(cfg))


def run_table2(cfg: ExperimentConfig, m_list=None) -> list[ResultRow]:
    """One row per fixed number of eigenvectors per subdomain."""
    m_list = cfg.fixed_counts if m_list is None else m_list
    return run_cells([cfg.replace(policy=FixedPolicy(int(m))) for m in m_list])


@dataclass
class EnrichmentComparison:
    n: int
    N_side: int
    policy: str
    config_hash: str
    counts: dict = field(default_factory=dict)
    lambda_next: dict = field(default_factory=dict)
    layer_constant: list = field(default_factory=list)

    def totals(self) -> dict:
        return {t: int(sum(c)) for t, c in self.counts.items()}

    def to_dict(self) -> dict:
        d = asdict(self)
        d["totals"] = self.totals()
        return d


def run_enrichment_comparison(cfg: ExperimentConfig) -> EnrichmentComparison:
    """Per-subdomain enrichment counts of both eigenproblem types for one setup."""
    if not isinstance(cfg.policy, ThresholdPolicy):
        raise ValueError("enrichment comparison needs a threshold policy")
    try:
        mesh = build_mesh(cfg.n)
        part = build_partition(mesh, cfg.N_side)
        fld = build_coefficient(mesh, part, cfg.geometry)
        ext = coefficient_extrema(part, fld)
    except Exception as exc:
        raise PipelineError("setup", exc) from exc
    out = EnrichmentComparison(cfg.n, cfg.N_side, _policy_label(cfg.policy), cfg.solver_hash())
    out.layer_constant = [bool(v) for v in ext.under_delta == ext.over_delta]
    for t in SpaceType:
        try:
            spectra = all_spectra(part, fld, ext, t, cfg.policy)
        except Exception as exc:
            raise PipelineError("spectral", exc) from exc
        out.counts[t.value] = [s.selected for s in spectra]
        out.lambda_next[t.value] = [s.lambda_next for s in spectra]
    return out


def write_rows_csv(rows: list[ResultRow], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=CSV_FIELDS)
        w.writeheader()
        for r in rows:
            w.writerow(r.to_csv_dict())


def read_rows_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def write_enrichment_csv(cmp: EnrichmentComparison, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["k", "M_subd", "M_layer", "layer_constant", "config_hash"])
        for k in range(len(cmp.layer_constant)):
            w.writerow([k, cmp.counts["subd"][k], cmp.counts["layer"][k], int(cmp.layer_constant[k]),
                        cmp.config_hash])


def write_json(payload, path) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, default=lambda o: o.item() if hasattr(o, "item") else str(o))
