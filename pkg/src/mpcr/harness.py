"""Monte Carlo experiments pairing simulated scaled populations with their
theoretical limits.

Each replicate runs one coupled trajectory on its own random stream, reads
the chain and its majorant at the pivot time ``kappa``, and evaluates the
matching limit vectors. Replicates may execute concurrently; records carry
their replicate index and tables are emitted in replicate order, so results
are independent of scheduling.
"""

from __future__ import annotations

import dataclasses
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import ConfigError, EmptyInput, UnknownFigure
from .maps import G_eval, theorem_limits
from .params import ModelParams
from .sim import RngStream, SimMode, simulate

# Relative errors are reported only where the limit exceeds this floor;
# convergence in probability gives no relative control near zero.
REL_ERROR_FLOOR = 1e-3

_DEFAULT_TOL = 1e-8


@dataclass
class ExperimentRecord:
    """Paired simulated/theoretical values for one replicate.

    ``scaled_Z`` and ``W_hat`` are read from the same coupled trajectory at
    the pivot time, each component scaled by b_i**(-kappa); dominance
    scaled_Z <= W_hat is inherited from the pathwise coupling. The thm2
    fields are filled only by offset-time experiments.
    """

    replicate: int
    scaled_Z: np.ndarray
    W_hat: np.ndarray
    thm1_limit: np.ndarray
    x_vec: Optional[np.ndarray] = None
    x_total: Optional[float] = None
    thm2_vector: Optional[np.ndarray] = None
    thm2_total: Optional[float] = None
    n_offset: Optional[int] = None


@dataclass
class ErrorSummary:
    """Aggregate absolute/relative errors of one experiment batch."""

    kappa: int
    replicates: int
    mean_abs_error: np.ndarray
    median_abs_error: np.ndarray
    median_rel_error: np.ndarray


def _lower_median(values: np.ndarray) -> float:
    """Median with the lower convention on even counts."""
    if values.size == 0:
        return float("nan")
    return float(np.sort(values)[(values.size - 1) // 2])


def _run_replicates(
    replicates: int, threads: int, one: Callable[[int], ExperimentRecord]
) -> list[ExperimentRecord]:
    if replicates < 1:
        raise ConfigError(f"replicates={replicates} must be >= 1")
    if threads <= 1:
        records = [one(rep) for rep in range(replicates)]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            records = list(pool.map(one, range(replicates)))
    records.sort(key=lambda r: r.replicate)
    return records


def run_theorem1(
    params: ModelParams,
    replicates: int,
    seed: Optional[int] = None,
    tol: float = _DEFAULT_TOL,
    threads: int = 1,
) -> list[ExperimentRecord]:
    """Pivot-time experiment: compare b_i**(-kappa) Z_i(kappa) with its limit
    W_hat_i * G_i(W_hat_0), both from the same coupled run."""
    root = params.seed if seed is None else seed
    kappa = params.kappa
    scale = params.b_array ** float(kappa)

    def one(rep: int) -> ExperimentRecord:
        stream = RngStream(root, rep)
        traj = simulate(params, kappa, SimMode.COUPLED, stream)
        scaled_z = traj.z_at(kappa) / scale
        w_hat = traj.y_at(kappa) / scale
        tl = theorem_limits(w_hat, 0, params, tol)
        return ExperimentRecord(
            replicate=rep, scaled_Z=scaled_z, W_hat=w_hat, thm1_limit=tl.thm1
        )

    return _run_replicates(replicates, threads, one)


def run_theorem2(
    params: ModelParams,
    n_offset: int,
    replicates: int,
    seed: Optional[int] = None,
    steps: Optional[int] = None,
    tol: float = _DEFAULT_TOL,
    threads: int = 1,
) -> list[ExperimentRecord]:
    """Offset-time experiment: compare Z_i(kappa+n)/K with the limit that
    spreads f^(n)(H(W_hat_0)) over the dominant types.

    The chain is observed after kappa + n_offset cycles; for negative
    offsets the coupled pair is still advanced to kappa so the majorant can
    be read at the pivot time.
    """
    kappa = params.kappa
    steps_z = kappa + n_offset
    if steps_z < 1:
        raise ConfigError(f"kappa + n_offset = {steps_z} must be >= 1")
    if steps is not None and steps != steps_z:
        raise ConfigError(f"steps={steps} disagrees with kappa + n_offset = {steps_z}")
    n_run = max(kappa, steps_z)
    root = params.seed if seed is None else seed
    scale = params.b_array ** float(kappa)

    def one(rep: int) -> ExperimentRecord:
        stream = RngStream(root, rep)
        traj = simulate(params, n_run, SimMode.COUPLED, stream)
        scaled_z = traj.z_at(kappa) / scale
        w_hat = traj.y_at(kappa) / scale
        tl = theorem_limits(w_hat, n_offset, params, tol)
        x_vec = traj.z_at(steps_z) / params.K
        return ExperimentRecord(
            replicate=rep,
            scaled_Z=scaled_z,
            W_hat=w_hat,
            thm1_limit=tl.thm1,
            x_vec=x_vec,
            x_total=float(x_vec.sum()),
            thm2_vector=tl.thm2_vector,
            thm2_total=tl.thm2_total,
            n_offset=n_offset,
        )

    return _run_replicates(replicates, threads, one)


def summarize(
    records: Sequence[ExperimentRecord], kappa: Optional[int] = None
) -> ErrorSummary:
    """Aggregate |scaled_Z_i - thm1_limit_i| over a record batch.

    Medians use the lower convention on even counts; relative errors are
    taken only over records whose limit exceeds REL_ERROR_FLOOR.
    """
    if len(records) == 0:
        raise EmptyInput("cannot summarize zero records")
    abs_err = np.array([np.abs(r.scaled_Z - r.thm1_limit) for r in records])
    limits = np.array([r.thm1_limit for r in records])
    d = abs_err.shape[1]
    med_rel = np.empty(d)
    for i in range(d):
        mask = limits[:, i] > REL_ERROR_FLOOR
        med_rel[i] = _lower_median(abs_err[mask, i] / limits[mask, i])
    return ErrorSummary(
        kappa=-1 if kappa is None else int(kappa),
        replicates=len(records),
        mean_abs_error=abs_err.mean(axis=0),
        median_abs_error=np.array([_lower_median(abs_err[:, i]) for i in range(d)]),
        median_rel_error=med_rel,
    )


def convergence_sweep(
    params_template: ModelParams,
    kappa_list: Sequence[int],
    replicates: int,
    seed: Optional[int] = None,
    tol: float = _DEFAULT_TOL,
    threads: int = 1,
) -> list[ErrorSummary]:
    """Pivot-time error summaries across increasing kappa values."""
    ks = list(kappa_list)
    if not ks:
        raise ConfigError("kappa_list must be nonempty")
    if any(k < 4 for k in ks):
        raise ConfigError("every kappa in the sweep must be >= 4")
    if any(b > a for a, b in zip(ks[1:], ks)):
        raise ConfigError("kappa_list must be sorted ascending")
    out = []
    for k in ks:
        params = dataclasses.replace(params_template, kappa=k)
        records = run_theorem1(params, replicates, seed=seed, tol=tol, threads=threads)
        out.append(summarize(records, kappa=k))
    return out


# Parameter families behind the shipped figures.
_FIGURE_A_V = (0.9, 0.8, 0.7, 0.6, 0.5, 0.4, 0.3, 0.2)
_FIGURE_12_V = (0.9, 0.2)
_FIGURE_3_V = (0.9, 0.9, 0.9, 0.9, 0.9)
_FIGURE_3_Z0 = (16, 8, 4, 2, 1)


def default_figure_params(figure_id: str, seed: int = 0) -> ModelParams:
    """Canonical model for each shipped figure."""
    fid = str(figure_id)
    if fid == "A":
        return ModelParams(kappa=25, v=_FIGURE_A_V, z0=(1,) * 8, seed=seed)
    if fid in ("1", "2"):
        return ModelParams(kappa=25, v=_FIGURE_12_V, z0=(1, 1), seed=seed)
    if fid == "3":
        return ModelParams(kappa=29, v=_FIGURE_3_V, z0=_FIGURE_3_Z0, seed=seed)
    raise UnknownFigure(f"figure id must be one of A, 1, 2, 3; got {figure_id!r}")


def figure_data(
    figure_id: str,
    params: Optional[ModelParams] = None,
    options: Optional[dict] = None,
) -> list[dict]:
    """Rows behind one of the shipped figures.

    A: correction-factor curves G_1..G_d on an x grid (all equal 1 at x=0).
    1: per-replicate pairs (scaled_Z_i, limit_i) for the two-type model.
    2: per-replicate joint limit coordinates (limit_1, limit_2).
    3: long-form (type, simulated, limit) rows for the five-type model
       observed three cycles before the pivot time.
    """
    fid = str(figure_id)
    opts = dict(options or {})
    allowed = {"replicates", "seed", "tol", "x_max", "n_points", "n_offset", "threads"}
    unknown = set(opts) - allowed
    if unknown:
        raise ConfigError(f"unknown figure option(s): {', '.join(sorted(unknown))}")
    seed = opts.get("seed")
    tol = float(opts.get("tol", _DEFAULT_TOL))
    threads = int(opts.get("threads", 1))
    if params is None:
        params = default_figure_params(fid, seed=seed or 0)

    if fid == "A":
        x_max = float(opts.get("x_max", 10.0))
        n_points = int(opts.get("n_points", 201))
        if x_max <= 0 or n_points < 2:
            raise ConfigError("figure A needs x_max > 0 and n_points >= 2")
        rows = []
        for x in np.linspace(0.0, x_max, n_points):
            g = G_eval(float(x), params, tol)
            row = {"x": float(x)}
            for i in range(params.d):
                row[f"G_{i + 1}"] = g[i].value
            rows.append(row)
        return rows

    replicates = int(opts.get("replicates", 200))
    if fid in ("1", "2"):
        if params.d != 2:
            raise ConfigError(f"figure {fid} requires a two-type model")
        records = run_theorem1(params, replicates, seed=seed, tol=tol, threads=threads)
        if fid == "1":
            return [
                {
                    "replicate": r.replicate,
                    "scaled_Z_1": float(r.scaled_Z[0]),
                    "limit_1": float(r.thm1_limit[0]),
                    "scaled_Z_2": float(r.scaled_Z[1]),
                    "limit_2": float(r.thm1_limit[1]),
                }
                for r in records
            ]
        return [
            {
                "replicate": r.replicate,
                "coord1": float(r.thm1_limit[0]),
                "coord2": float(r.thm1_limit[1]),
            }
            for r in records
        ]

    if fid == "3":
        if params.d0 != params.d:
            raise ConfigError("figure 3 requires all types tied at the maximal v")
        n_offset = int(opts.get("n_offset", -3))
        records = run_theorem2(
            params, n_offset, replicates, seed=seed, tol=tol, threads=threads
        )
        rows = []
        for r in records:
            for i in range(params.d):
                rows.append(
                    {
                        "replicate": r.replicate,
                        "type": i + 1,
                        "simulated": float(r.x_vec[i]),
                        "limit": float(r.thm2_vector[i]),
                    }
                )
        return rows

    raise UnknownFigure(f"figure id must be one of A, 1, 2, 3; got {figure_id!r}")


def theorem1_rows(records: Sequence[ExperimentRecord]) -> list[dict]:
    """Table rows for the pivot-time experiment: replicate, then per type
    scaled_Z_i, W_hat_i, limit_i."""
    rows = []
    for r in records:
        row: dict = {"replicate": r.replicate}
        for i in range(r.scaled_Z.size):
            row[f"scaled_Z_{i + 1}"] = float(r.scaled_Z[i])
            row[f"W_hat_{i + 1}"] = float(r.W_hat[i])
            row[f"limit_{i + 1}"] = float(r.thm1_limit[i])
        rows.append(row)
    return rows


def theorem2_rows(records: Sequence[ExperimentRecord]) -> list[dict]:
    """Table rows for the offset-time experiment: replicate, totals, then per
    type X_i, W_hat_i, limit_i (the spread limit vector)."""
    rows = []
    for r in records:
        if r.x_vec is None or r.thm2_vector is None:
            raise EmptyInput("record carries no offset-time columns")
        row: dict = {
            "replicate": r.replicate,
            "X_total": float(r.x_total),
            "thm2_total": float(r.thm2_total),
        }
        for i in range(r.x_vec.size):
            row[f"X_{i + 1}"] = float(r.x_vec[i])
            row[f"W_hat_{i + 1}"] = float(r.W_hat[i])
            row[f"limit_{i + 1}"] = float(r.thm2_vector[i])
        rows.append(row)
    return rows


def sweep_rows(summaries: Sequence[ErrorSummary]) -> list[dict]:
    """Table rows for a kappa sweep, one row per kappa."""
    rows = []
    for s in summaries:
        row: dict = {"kappa": s.kappa, "replicates": s.replicates}
        for i in range(s.mean_abs_error.size):
            row[f"mean_abs_error_{i + 1}"] = float(s.mean_abs_error[i])
            row[f"median_abs_error_{i + 1}"] = float(s.median_abs_error[i])
            row[f"median_rel_error_{i + 1}"] = float(s.median_rel_error[i])
        rows.append(row)
    return rows
