"""Experiment orchestration: condition checks, runs, sweeps, optimum reports.

These functions tie the library together for the shipped configurations:
build the lifted and super-lifted models, synthesize filters, run the
closed loop, analyze the iteration-domain map against the limit plant
and serialize everything.  File outputs are deterministic: identical
configs and seeds produce byte-identical CSV and JSON (floats are
written with 17 significant digits).
"""

from __future__ import annotations

import os
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .config import ExperimentConfig, build_reference
from .errors import DivergenceError, FixedPointError, KktSolveError
from .filters import LearningFilters, synthesize
from .iteration_map import ClosedLoopMap, build_closed_loop, check_condition1, z_infinity
from .lifting import LiftedModel, build_lifted_lti
from .optimum import build_problem, check_condition3, solve_kkt, verify_repeatability
from .simulator import DisturbanceSpec, UncertaintySpec, run_closed_loop
from .superlift import SuperOperators, build_operators, build_super
from .weights import PerformanceWeights, assemble_weights

__all__ = [
    "Pipeline",
    "assemble_pipeline",
    "check_report",
    "run_experiment",
    "sweep_horizons",
    "optimum_report",
]


@dataclass(frozen=True)
class Pipeline:
    """Everything needed to run and analyze one horizon length."""

    n_i: int
    ops: SuperOperators
    weights: PerformanceWeights
    lifted_model: LiftedModel
    lifted_limit: LiftedModel
    filters: LearningFilters
    limit_map: ClosedLoopMap
    r_lift: np.ndarray
    d_limit: np.ndarray


def assemble_pipeline(config: ExperimentConfig, n_i: int | None = None) -> Pipeline:
    """Build models, weights and filters for one horizon length.

    Filters come from the controller's model; the closed-loop map is
    taken against the limit plant (the true plant when one is given).
    """
    n_i = config.n_i if n_i is None else n_i
    lifted_model = build_lifted_lti(config.model, config.n_s)
    lifted_limit = build_lifted_lti(config.limit_model, config.n_s)
    ops = build_operators(config.n_s, config.model.n_x, config.model.n_u, n_i)
    weights = assemble_weights(config.weights, config.n_s, n_i, ops)
    filters = synthesize(build_super(lifted_model, n_i), lifted_model, weights, ops)
    limit_map = build_closed_loop(filters, lifted_limit, ops)
    reference = build_reference(config.reference, config.n_s, config.model.n_x)
    d_limit = np.tile(config.disturbance_mean, config.n_s)
    return Pipeline(
        n_i=n_i, ops=ops, weights=weights,
        lifted_model=lifted_model, lifted_limit=lifted_limit,
        filters=filters, limit_map=limit_map,
        r_lift=reference.r_lift, d_limit=d_limit,
    )


def _converged_optimum(config: ExperimentConfig, pipe: Pipeline):
    """Repeatable optimum against the limit plant.

    The QP is assembled at n_i = 1; the optimum does not depend on the
    horizon length because the matrices scale uniformly with n_i.
    """
    ops1 = build_operators(config.n_s, config.model.n_x, config.model.n_u, 1)
    w1 = assemble_weights(config.weights, config.n_s, 1, ops1)
    prob = build_problem(pipe.lifted_limit, w1, ops1, pipe.r_lift, pipe.d_limit)
    verdict = check_condition3(prob)
    opt = solve_kkt(prob) if verdict.satisfied else None
    return prob, verdict, opt


# ---------------------------------------------------------------------------
# deterministic serialization (17 significant digits)

def _fmt(x) -> str:
    x = float(x)
    if np.isnan(x):
        return "nan"
    if np.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


def _json_render(obj, indent: int) -> str:
    pad = "  " * indent
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [
            f'{pad}  "{k}": {_json_render(v, indent + 1)}' for k, v in obj.items()
        ]
        return "{\n" + ",\n".join(items) + f"\n{pad}}}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(np.asarray(obj).tolist()) if isinstance(obj, np.ndarray) else list(obj)
        if not seq:
            return "[]"
        items = [_json_render(v, indent) for v in seq]
        return "[" + ", ".join(items) + "]"
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return "null" if not np.isfinite(obj) else _fmt(obj)
    return '"' + str(obj).replace("\\", "\\\\").replace('"', '\\"') + '"'


def write_json(path: Path, obj: dict):
    path.write_text(_json_render(obj, 0) + "\n")


def write_csv(path: Path, header: list[str], rows):
    lines = [",".join(header)]
    for row in rows:
        cells = []
        for v in row:
            if isinstance(v, (int, np.integer)):
                cells.append(str(int(v)))
            else:
                cells.append(_fmt(v))
        lines.append(",".join(cells))
    path.write_text("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# commands

def check_report(config: ExperimentConfig) -> dict:
    """Verdicts for the stability and solvability conditions."""
    pipe = assemble_pipeline(config)
    verdict1 = check_condition1(pipe.limit_map)
    _, verdict3, _ = _converged_optimum(config, pipe)
    return {
        "n_i": pipe.n_i,
        "rho_A_z": verdict1.radius,
        "condition1_satisfied": verdict1.stable,
        "condition3_min_eigenvalue": verdict3.min_eigenvalue,
        "condition3_satisfied": verdict3.satisfied,
        "all_satisfied": verdict1.stable and verdict3.satisfied,
    }


def _uncertainty_spec(config: ExperimentConfig, pipe: Pipeline) -> UncertaintySpec | None:
    magnitude = config.uncertainty_magnitude
    if magnitude is None:
        # auto scale: one percent of the limit plant's lifted input map
        magnitude = 0.01 * float(np.linalg.norm(pipe.lifted_limit.G_lift, "fro"))
    if magnitude == 0.0:
        return None
    return UncertaintySpec(
        magnitude=magnitude, decay=config.uncertainty_decay, seed=config.seed
    )


def run_experiment(config: ExperimentConfig, out_dir) -> dict:
    """One closed-loop run; writes trajectory.csv, convergence.csv, summary.json."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    pipe = assemble_pipeline(config)

    verdict1 = check_condition1(pipe.limit_map)
    if not verdict1.stable:
        warnings.warn(
            f"iteration-domain map is unstable against the limit plant "
            f"(spectral radius {verdict1.radius:.4f}); the run may not converge",
            stacklevel=2,
        )

    disturbance = DisturbanceSpec(
        mean_per_step=config.disturbance_mean,
        sigma=config.disturbance_sigma,
        seed=config.seed,
    )
    divergence = None
    try:
        record = run_closed_loop(
            pipe.filters, pipe.ops, pipe.lifted_limit, pipe.r_lift,
            config.n_iterations,
            disturbance=disturbance,
            uncertainty=_uncertainty_spec(config, pipe),
            u_init=config.u_init, x0_init=config.x0_init,
            weights=pipe.weights,
        )
    except DivergenceError as exc:
        # keep whatever completed; files below cover the partial history
        divergence = exc
        record = exc.record

    z_inf = None
    z_inf_residual = None
    try:
        zi = z_infinity(pipe.limit_map, pipe.r_lift, pipe.d_limit, require_stable=False)
        z_inf = zi.stacked
        z_inf_residual = float(np.max(np.abs(
            z_inf - pipe.limit_map.step(z_inf, pipe.r_lift, pipe.d_limit)
        )))
    except FixedPointError:
        pass

    _, verdict3, opt = _converged_optimum(config, pipe)
    repeat_residual = (
        verify_repeatability(opt, pipe.lifted_limit, pipe.d_limit) if opt else None
    )

    n_x, n_u, n_s = config.model.n_x, config.model.n_u, config.n_s
    r_states = pipe.r_lift.reshape(n_s, n_x)
    traj_rows = []
    for j in range(record.n_iterations):
        x = record.x_hist[j].reshape(n_s, n_x)
        u = record.u_hist[j].reshape(n_s, n_u)
        for k in range(n_s):
            traj_rows.append([j, k + 1, *x[k], *u[k], *r_states[k]])
    header = (
        ["iteration", "step"]
        + [f"x_{i + 1}" for i in range(n_x)]
        + [f"u_{i + 1}" for i in range(n_u)]
        + [f"r_{i + 1}" for i in range(n_x)]
    )
    write_csv(out / "trajectory.csv", header, traj_rows)

    if z_inf is not None:
        dists = np.linalg.norm(record.z_hist - z_inf, axis=1)
    else:
        dists = np.full(record.n_iterations, np.nan)
    write_csv(
        out / "convergence.csv",
        ["iteration", "distance_to_z_inf"],
        [[j, dists[j]] for j in range(record.n_iterations)],
    )

    distance = None
    if z_inf is not None and opt is not None:
        distance = float(np.linalg.norm(z_inf - opt.z_opt.stacked))
    summary = {
        "n_i": pipe.n_i,
        "n_s": n_s,
        "n_iterations": config.n_iterations,
        "iterations_completed": record.n_iterations,
        "diverged_at_iteration": None if divergence is None else divergence.iteration,
        "seeds": {"master": config.seed},
        "rho_A_z": verdict1.radius,
        "condition1_satisfied": verdict1.stable,
        "condition3_min_eigenvalue": verdict3.min_eigenvalue,
        "condition3_satisfied": verdict3.satisfied,
        "z_inf": z_inf,
        "z_inf_residual": z_inf_residual,
        "z_opt": opt.z_opt.stacked if opt else None,
        "lambda_opt": opt.lambda_opt if opt else None,
        "kkt_constraint_residual": opt.constraint_residual if opt else None,
        "kkt_stationarity_residual": opt.stationarity_residual if opt else None,
        "repeatability_residual": repeat_residual,
        "distance_z_inf_to_z_opt": distance,
        "final_distance_to_z_inf": float(dists[-1]) if z_inf is not None else None,
        "config": config.raw,
    }
    write_json(out / "summary.json", summary)
    if divergence is not None:
        raise divergence
    return summary


def _sweep_row(config: ExperimentConfig, n_i: int, z_opt_stacked) -> dict:
    start = time.perf_counter()
    pipe = assemble_pipeline(config, n_i)
    radius = check_condition1(pipe.limit_map).radius
    distance = None
    residual = None
    try:
        zi = z_infinity(pipe.limit_map, pipe.r_lift, pipe.d_limit, require_stable=False)
        residual = float(np.max(np.abs(
            zi.stacked - pipe.limit_map.step(zi.stacked, pipe.r_lift, pipe.d_limit)
        )))
        if z_opt_stacked is not None:
            distance = float(np.linalg.norm(zi.stacked - z_opt_stacked))
    except FixedPointError:
        pass
    return {
        "n_i": n_i,
        "rho_A_z": radius,
        "distance_z_inf_to_z_opt": distance,
        "z_inf_residual": residual,
        "runtime_s": time.perf_counter() - start,
    }


def sweep_horizons(config: ExperimentConfig, out_dir=None, ni_list=None) -> list[dict]:
    """Distance from the converged point to the repeatable optimum per horizon.

    The optimum is computed once (it does not depend on n_i); each
    horizon length is synthesized and analyzed independently, in
    parallel across worker threads (capped by RHILC_THREADS).
    """
    ni_list = list(config.n_i_sweep if ni_list is None else ni_list)
    pipe0 = assemble_pipeline(config, ni_list[0])
    _, verdict3, opt = _converged_optimum(config, pipe0)
    z_opt_stacked = opt.z_opt.stacked if opt else None

    max_workers = int(os.environ.get("RHILC_THREADS", 0)) or min(len(ni_list), os.cpu_count() or 1)
    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        rows = list(pool.map(lambda ni: _sweep_row(config, ni, z_opt_stacked), ni_list))

    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        write_csv(
            out / "sweep.csv",
            ["n_i", "rho_A_z", "distance_z_inf_to_z_opt", "z_inf_residual", "runtime_s"],
            [
                [r["n_i"], r["rho_A_z"],
                 np.nan if r["distance_z_inf_to_z_opt"] is None else r["distance_z_inf_to_z_opt"],
                 np.nan if r["z_inf_residual"] is None else r["z_inf_residual"],
                 r["runtime_s"]]
                for r in rows
            ],
        )
    return rows


def optimum_report(config: ExperimentConfig, out_dir=None) -> dict:
    """Repeatable optimum with residuals; writes optimum.json.

    Needs no filter synthesis: the optimum depends only on the limit
    plant, the weights and the affine sources.
    """
    lifted_limit = build_lifted_lti(config.limit_model, config.n_s)
    ops = build_operators(config.n_s, config.model.n_x, config.model.n_u, config.n_i)
    weights = assemble_weights(config.weights, config.n_s, config.n_i, ops)
    reference = build_reference(config.reference, config.n_s, config.model.n_x)
    d_limit = np.tile(config.disturbance_mean, config.n_s)
    prob = build_problem(lifted_limit, weights, ops, reference.r_lift, d_limit)
    verdict = check_condition3(prob)
    report = {
        "n_i": config.n_i,
        "condition3_min_eigenvalue": verdict.min_eigenvalue,
        "condition3_satisfied": verdict.satisfied,
        "z_opt": None,
        "lambda_opt": None,
        "kkt_constraint_residual": None,
        "kkt_stationarity_residual": None,
        "repeatability_residual": None,
    }
    if verdict.satisfied:
        try:
            opt = solve_kkt(prob)
        except KktSolveError as exc:
            report["error"] = str(exc)
        else:
            report.update({
                "z_opt": opt.z_opt.stacked,
                "lambda_opt": opt.lambda_opt,
                "kkt_constraint_residual": opt.constraint_residual,
                "kkt_stationarity_residual": opt.stationarity_residual,
                "repeatability_residual": verify_repeatability(
                    opt, lifted_limit, d_limit
                ),
            })
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        write_json(out / "optimum.json", report)
    return report
