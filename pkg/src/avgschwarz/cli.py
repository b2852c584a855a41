"""Command-line entry point: ``avgschwarz {run,table1,table2,enrichment,verify}``."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import asdict

from . import kernels
from .assembly import export_matrix_market
from .config import ConfigError, ExperimentConfig
from .experiments import (
    PipelineError,
    run_enrichment_comparison,
    run_single,
    run_table1,
    run_table2,
    setup_problem,
    write_enrichment_csv,
    write_json,
    write_rows_csv,
)
from .spectral import write_spectra_csv


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", metavar="PATH", help="JSON experiment configuration")
    p.add_argument("--out", metavar="PATH", help="output file (CSV for tables, JSON otherwise)")
    p.add_argument("--type", choices=["subd", "layer"], help="eigenproblem type")
    p.add_argument("--variant", choices=["add", "mlt"], help="additive or multiplicative")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--threshold", type=float, metavar="F", help="adaptive enrichment threshold")
    g.add_argument("--fixed", type=int, metavar="M", help="fixed number of eigenvectors per subdomain")
    p.add_argument("--n", type=int, help="fine subdivisions per side (h = 1/n)")
    p.add_argument("--nside", type=int, help="subdomains per side (H = 1/nside)")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="avgschwarz",
        description="Average Schwarz preconditioner with spectrally enriched coarse spaces.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="solve one configuration")
    _common(p)
    p.add_argument("--residuals", metavar="PATH", help="write the residual history as CSV")
    p.add_argument("--spectra", metavar="PATH", help="write local spectra as CSV")
    p.add_argument("--coarse-summary", metavar="PATH", help="write the coarse space summary as JSON")
    p.add_argument("--matrix", metavar="PATH", help="write the stiffness matrix in MatrixMarket format")

    p = sub.add_parser("table1", help="H/h and coefficient-jump sweep")
    _common(p)
    p = sub.add_parser("table2", help="fixed enrichment count sweep")
    _common(p)
    p.add_argument("--counts", type=int, nargs="+", metavar="M", help="fixed counts to sweep")
    p = sub.add_parser("enrichment", help="per-subdomain enrichment counts, SUBD vs LAYER")
    _common(p)
    p.add_argument("--continuous", action=argparse.BooleanOptionalAction, default=None,
                   help="channels continuous across subdomain boundaries")
    p = sub.add_parser("verify", help="run the dense oracle checks")
    p.add_argument("--out", metavar="PATH", help="JSON report")
    p.add_argument("-v", "--verbose", action="store_true")
    return parser


def config_from_args(args) -> ExperimentConfig:
    data = {}
    if args.config:
        try:
            with open(args.config) as fh:
                data = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read {args.config}: {exc.strerror}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{args.config}: not valid JSON ({exc})") from exc
    if args.n is not None:
        data["n"] = args.n
    if args.nside is not None:
        data["N_side"] = args.nside
    if args.type:
        data["type"] = args.type
    if args.variant:
        data["variant"] = args.variant
    if args.threshold is not None:
        data["enrichment"] = {"threshold": args.threshold}
    if args.fixed is not None:
        data["enrichment"] = {"fixed": args.fixed}
    if getattr(args, "continuous", None) is not None:
        data.setdefault("geometry", {})["channels_continuous"] = args.continuous
    if getattr(args, "counts", None):
        data["fixed_counts"] = args.counts
    return ExperimentConfig.from_dict(data)


def _print_rows(rows) -> None:
    for r in rows:
        status = "" if r.status == "ok" else f"  FAILED: {r.error}"
        print(f"H=1/{r.N_side:<3d} h=1/{r.n:<3d} ({r.alpha_c:.0e},{r.alpha_i:.0e}) {r.variant.upper()} "
              f"{r.policy:<16s} {r.iterations:4d} ({r.kappa:.3g})  coarse={r.coarse_dimension}{status}")


def cmd_run(args, cfg) -> int:
    prob = setup_problem(cfg)
    row, report = run_single(cfg, prob)
    print(f"{row.iterations} iterations, kappa {row.kappa:.4g}, coarse dimension {row.coarse_dimension}, "
          f"sum M_k {row.enrichment_total}, converged={row.converged}")
    out = args.out or cfg.output.get("json")
    if out:
        write_json(asdict(row), out)
    if args.residuals or cfg.output.get("residuals"):
        report.write_residual_csv(args.residuals or cfg.output["residuals"])
    if args.spectra or cfg.output.get("spectra"):
        write_spectra_csv(prob.spectra, args.spectra or cfg.output["spectra"])
    if args.coarse_summary or cfg.output.get("coarse_summary"):
        prob.coarse.write_summary(args.coarse_summary or cfg.output["coarse_summary"])
    if args.matrix or cfg.output.get("matrix"):
        export_matrix_market(prob.A, args.matrix or cfg.output["matrix"], comment=f"config {cfg.solver_hash()}")
    return 0 if row.converged else 2


def cmd_table1(args, cfg) -> int:
    rows = run_table1(cfg)
    _print_rows(rows)
    out = args.out or cfg.output.get("csv")
    if out:
        write_rows_csv(rows, out)
    return 0 if all(r.status == "ok" for r in rows) else 2


def cmd_table2(args, cfg) -> int:
    rows = run_table2(cfg)
    _print_rows(rows)
    out = args.out or cfg.output.get("csv")
    if out:
        write_rows_csv(rows, out)
    return 0 if all(r.status == "ok" for r in rows) else 2


def cmd_enrichment(args, cfg) -> int:
    cmp = run_enrichment_comparison(cfg)
    print(f"{'k':>3s} {'SUBD':>5s} {'LAYER':>5s}")
    for k, (ms, ml) in enumerate(zip(cmp.counts["subd"], cmp.counts["layer"])):
        print(f"{k:3d} {ms:5d} {ml:5d}")
    t = cmp.totals()
    print(f"sum {t['subd']:5d} {t['layer']:5d}")
    out = args.out or cfg.output.get("csv")
    if out:
        if str(out).endswith(".json"):
            write_json(cmp.to_dict(), out)
        else:
            write_enrichment_csv(cmp, out)
    if cfg.output.get("json"):
        write_json(cmp.to_dict(), cfg.output["json"])
    return 0


def cmd_verify(args) -> int:
    from .verification import run_verification

    checks = run_verification()
    for c in checks:
        print(c.line())
    if args.out:
        write_json({"backend": kernels.BACKEND,
                    "checks": [{"name": c.name, "passed": c.passed, **c.detail} for c in checks]}, args.out)
    return 0 if all(c.passed for c in checks) else 1


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        if args.command == "verify":
            return cmd_verify(args)
        cfg = config_from_args(args)
        return {"run": cmd_run, "table1": cmd_table1, "table2": cmd_table2, "enrichment": cmd_enrichment}[
            args.command
        ](args, cfg)
    except (ConfigError, PipelineError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
