"""Experiment orchestration: radius reports, single solves, out-of-sample
evaluation, and the multi-seed portfolio reproduction grid."""

from __future__ import annotations

import csv
import logging
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from .ambiguity import (
    AmbiguityRadius,
    BootstrapConfig,
    FIXED,
    RATE_BOUND,
    SCALE_MMD,
    bootstrap_radius,
    rate_radius,
)
from .config import ConfigError, RunConfig
from .constraints import PiecewiseAffine, UnsupportedModelError
from .kernels import KernelSpec, median_heuristic
from .reformulations import DrccpSolution, solve_cvar, solve_mip, solve_tractable_pwa
from .risk import evaluate_solution, sample_gaussian
from .samples import SampleSet, load_samples_csv

log = logging.getLogger("mmddrccp")

RESULTS_HEADER = [
    "seed",
    "N_train",
    "method",
    "epsilon",
    "objective",
    "cvar_out",
    "var_out",
    "violation_prob",
    "status",
]
RESULTS_SCHEMA = "# mmddrccp-results v1"
SUMMARY_HEADER = [
    "N_train",
    "method",
    "n_optimal",
    "objective_mean",
    "objective_std",
    "cvar_out_mean",
    "cvar_out_std",
]
SUMMARY_SCHEMA = "# mmddrccp-summary v1"

METHOD_ORDER = ["zero", "bootstrap", "rate"]


def _derived_int_seed(*parts: int) -> int:
    """Collapse a seed path into a single integer stream identifier."""
    return int(np.random.SeedSequence(list(parts)).generate_state(1)[0])


def resolve_sample(cfg: RunConfig, seed_override: int | None = None) -> SampleSet:
    data = cfg.data
    if data.csv_path is not None:
        return load_samples_csv(data.csv_path)
    if data.inline is not None:
        return SampleSet(data.inline, label="inline")
    gen = data.generator
    seed = gen.seed if seed_override is None else seed_override
    return sample_gaussian(gen.mean, gen.diag_cov, gen.n, seed=[seed, gen.n, 0])


def resolve_kernel(cfg: RunConfig, sample: SampleSet) -> KernelSpec:
    k = cfg.kernel
    if k.family == "linear_plus_one":
        return KernelSpec.linear_plus_one(k.sup_bound)
    bandwidth = median_heuristic(sample) if k.bandwidth == "median" else float(k.bandwidth)
    return KernelSpec.gaussian(bandwidth)


def compute_radius(
    cfg: RunConfig, sample: SampleSet | None = None, seed_override: int | None = None
) -> tuple[AmbiguityRadius, dict]:
    """Ambiguity radius per the config's radius block, plus a printable report."""
    if sample is None:
        sample = resolve_sample(cfg, seed_override)
    rc = cfg.radius
    report: dict = {"method": rc.method, "N": sample.n}
    if rc.method == "rate":
        value = rate_radius(sample.n, rc.delta, cfg.kernel.sup_bound)
        radius = AmbiguityRadius(value, RATE_BOUND, rc.delta, SCALE_MMD)
        report.update(delta=rc.delta, C=cfg.kernel.sup_bound)
    elif rc.method == "bootstrap":
        spec = resolve_kernel(cfg, sample)
        seed = rc.seed if rc.seed is not None else 0
        if seed_override is not None:
            seed = seed_override
        bcfg = BootstrapConfig(replicates=rc.replicates, confidence=rc.beta, rng_seed=seed)
        radius = bootstrap_radius(sample, spec, bcfg, scale=rc.scale)
        report.update(B=rc.replicates, beta=rc.beta, seed=seed)
        if spec.bandwidth is not None:
            report["bandwidth"] = spec.bandwidth
    else:
        radius = AmbiguityRadius(rc.value, FIXED, None, rc.scale)
    report.update(epsilon=radius.value, scale=radius.scale)
    return radius, report


def run_solve(cfg: RunConfig, seed_override: int | None = None) -> tuple[DrccpSolution, dict]:
    """Solve the configured problem on the configured data along one path."""
    sample = resolve_sample(cfg, seed_override)
    radius, radius_report = compute_radius(cfg, sample, seed_override)
    tol = cfg.solver.tolerances()
    path = cfg.solver.path

    if path == "cvar":
        spec = resolve_kernel(cfg, sample)
        sol = solve_cvar(
            cfg.problem,
            sample,
            spec,
            radius,
            tol,
            jitter=cfg.solver.jitter,
            ridge=cfg.solver.ridge,
            risk_offset=cfg.solver.risk_offset,
        )
    elif path == "mip":
        spec = resolve_kernel(cfg, sample)
        sol = solve_mip(
            cfg.problem, sample, spec, radius, cfg.mip_config(), tol,
            jitter=cfg.solver.jitter, ridge=cfg.solver.ridge,
        )
    else:
        if not isinstance(cfg.problem.model, PiecewiseAffine):
            raise UnsupportedModelError(
                "the tractable path requires a piecewise-affine constraint model"
            )
        if cfg.support is None:
            raise ConfigError("problem.model.support", "the tractable path requires a support polytope")
        sol = solve_tractable_pwa(
            cfg.problem,
            cfg.support,
            sample,
            radius,
            tol,
            jitter=cfg.solver.jitter,
            nonnegative_t=cfg.solver.nonnegative_t,
        )

    record = sol.to_record()
    record["path"] = path
    record["alpha"] = cfg.problem.alpha
    record["N_train"] = sample.n
    record["radius"] = radius_report
    return sol, record


def run_eval(cfg: RunConfig, record: dict, seed_override: int | None = None) -> dict:
    """Draw a fresh evaluation sample and score the recorded decision."""
    if cfg.data.generator is None:
        raise ConfigError("data.generator", "evaluation requires a generator data block")
    if record.get("x") is None:
        raise ValueError("solution record carries no decision vector (non-optimal solve?)")
    gen = cfg.data.generator
    seed = gen.seed if seed_override is None else seed_override
    eval_sample = sample_gaussian(
        gen.mean, gen.diag_cov, cfg.experiment.eval_size, seed=[seed, gen.n, 2]
    )
    x = np.asarray(record["x"], dtype=float)
    report = evaluate_solution(cfg.problem.model, x, eval_sample, cfg.problem.alpha, seed)
    return {
        "seed": seed,
        "N_train": record.get("N_train", ""),
        "method": record.get("radius", {}).get("method", ""),
        "epsilon": record.get("radius", {}).get("epsilon", ""),
        "objective": record.get("objective", ""),
        "cvar_out": report.cvar_out,
        "var_out": report.var_out,
        "violation_prob": report.violation_prob,
        "status": record.get("status", ""),
    }


def _fmt(value) -> str:
    if value is None or value == "":
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_results_csv(path: Path, rows: list[dict], header=RESULTS_HEADER, schema=RESULTS_SCHEMA):
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        fh.write(schema + "\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(row.get(col, "")) for col in header])


def read_results_csv(path: Path) -> list[dict]:
    """Read back a results CSV written by this module (lossless for floats)."""
    rows = []
    with Path(path).open("r", encoding="utf-8") as fh:
        line = fh.readline().strip()
        if not line.startswith("#"):
            raise ValueError(f"{path}: missing schema comment line")
        reader = csv.DictReader(fh)
        for row in reader:
            out = {}
            for key, val in row.items():
                if val == "" or val is None:
                    out[key] = None
                else:
                    try:
                        out[key] = int(val)
                    except ValueError:
                        try:
                            out[key] = float(val)
                        except ValueError:
                            out[key] = val
            rows.append(out)
    return rows


def _error_rows(n_train: int, seed: int, exc: Exception) -> list[dict]:
    log.warning("leaf (N=%d, seed=%d) setup failed: %s", n_train, seed, exc)
    return [
        {
            "seed": seed, "N_train": n_train, "method": method, "epsilon": None,
            "objective": None, "cvar_out": None, "var_out": None,
            "violation_prob": None, "status": "error",
        }
        for method in METHOD_ORDER
    ]


def _portfolio_leaf(cfg: RunConfig, n_train: int, seed: int) -> list[dict]:
    """Rows for one (N, seed) cell: zero / bootstrap / rate radii."""
    gen = cfg.data.generator
    try:
        train = sample_gaussian(gen.mean, gen.diag_cov, n_train, seed=[seed, n_train, 0])
        spec = resolve_kernel(cfg, train)
        boot_cfg = BootstrapConfig(
            replicates=cfg.radius.replicates,
            confidence=cfg.radius.beta,
            rng_seed=_derived_int_seed(seed, n_train, 1),
        )
        radii = {
            "zero": AmbiguityRadius(0.0, FIXED, None, cfg.radius.scale),
            "bootstrap": bootstrap_radius(train, spec, boot_cfg, scale=cfg.radius.scale),
            "rate": AmbiguityRadius(
                rate_radius(n_train, cfg.radius.delta, cfg.kernel.sup_bound),
                RATE_BOUND,
                cfg.radius.delta,
                SCALE_MMD,
            ),
        }
        eval_sample = sample_gaussian(
            gen.mean, gen.diag_cov, cfg.experiment.eval_size, seed=[seed, n_train, 2]
        )
    except Exception as exc:  # a broken cell must not sink the grid
        return _error_rows(n_train, seed, exc)
    tol = cfg.solver.tolerances()
    rows = []
    for method in METHOD_ORDER:
        eps = radii[method]
        row = {
            "seed": seed,
            "N_train": n_train,
            "method": method,
            "epsilon": eps.value,
        }
        try:
            sol = solve_cvar(
                cfg.problem, train, spec, eps, tol,
                jitter=cfg.solver.jitter, ridge=cfg.solver.ridge,
                risk_offset=cfg.solver.risk_offset,
            )
        except Exception as exc:  # a leaf failure is a row, not a crash
            log.warning("leaf (N=%d, seed=%d, %s) failed: %s", n_train, seed, method, exc)
            row.update(objective=None, cvar_out=None, var_out=None,
                       violation_prob=None, status="error")
            rows.append(row)
            continue
        row["status"] = sol.status.value
        if sol.is_optimal:
            rep = evaluate_solution(cfg.problem.model, sol.x, eval_sample, cfg.problem.alpha, seed)
            row.update(
                objective=sol.objective,
                cvar_out=rep.cvar_out,
                var_out=rep.var_out,
                violation_prob=rep.violation_prob,
            )
        else:
            row.update(objective=None, cvar_out=None, var_out=None, violation_prob=None)
        rows.append(row)
    return rows


def reproduce_portfolio(cfg: RunConfig, jobs: int = 1) -> tuple[list[dict], list[dict]]:
    """Run the (N, seed, method) grid; rows come back in deterministic
    (N, seed, method) order regardless of worker scheduling."""
    if cfg.data.generator is None:
        raise ConfigError("data.generator", "reproduce-portfolio requires a generator data block")
    leaves = [(n, s) for n in cfg.experiment.n_train for s in cfg.experiment.seeds]
    log.info("portfolio grid: %d leaves, jobs=%d", len(leaves), jobs)
    if jobs <= 1:
        leaf_rows = [_portfolio_leaf(cfg, n, s) for n, s in leaves]
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(_portfolio_leaf, cfg, n, s) for n, s in leaves]
            leaf_rows = [f.result() for f in futures]
    rows = [row for chunk in leaf_rows for row in chunk]

    summary = []
    for n in cfg.experiment.n_train:
        for method in METHOD_ORDER:
            cell = [
                r for r in rows
                if r["N_train"] == n and r["method"] == method and r["status"] == "optimal"
            ]
            objs = np.array([r["objective"] for r in cell], dtype=float)
            cvars = np.array([r["cvar_out"] for r in cell], dtype=float)
            summary.append(
                {
                    "N_train": n,
                    "method": method,
                    "n_optimal": len(cell),
                    "objective_mean": float(objs.mean()) if len(cell) else None,
                    "objective_std": float(objs.std(ddof=1)) if len(cell) > 1 else None,
                    "cvar_out_mean": float(cvars.mean()) if len(cell) else None,
                    "cvar_out_std": float(cvars.std(ddof=1)) if len(cell) > 1 else None,
                }
            )
    return rows, summary
