"""Command-line front end: config parsing, dispatch, deterministic output.

Subcommands: ``maps`` (point evaluations with certificates, printed to
stdout), ``simulate`` (trajectories), ``theorem1`` / ``theorem2`` (paired
Monte Carlo experiments), ``sweep`` (error summaries across kappa), and
``figure`` (data behind the shipped figures). Every run writes the resolved
configuration to a manifest alongside its output files; nothing reads the
clock, so identical configs give byte-identical outputs.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .errors import ConfigError, IoError, MpcrError, NumericalError
from .harness import (
    convergence_sweep,
    figure_data,
    run_theorem1,
    run_theorem2,
    sweep_rows,
    theorem1_rows,
    theorem2_rows,
)
from .maps import F_apply, F_inverse, G_eval, H_eval, f_apply, f_inverse
from .params import ModelParams, validate
from .sim import RngStream, SimMode, simulate

DEFAULT_OUT = "mpcr_out"
DEFAULT_TOL = 1e-8
DEFAULT_REPLICATES = 200

# Config file schema: key -> coercion. Arrays are comma-separated scalars.
_SCHEMA = {
    "v": lambda s: [float(t) for t in _split(s)],
    "z0": lambda s: [int(t) for t in _split(s)],
    "kappa": int,
    "seed": int,
    "replicates": int,
    "n_offset": int,
    "kappa_list": lambda s: [int(t) for t in _split(s)],
    "tol": float,
    "figure_id": str,
    "out": str,
    "format": str,
    "threads": int,
    "steps": int,
    "mode": str,
    "x_max": float,
    "n_points": int,
}


def _split(s: str) -> list[str]:
    return [t.strip() for t in str(s).split(",") if t.strip()]


def parse_config_file(path: str) -> dict:
    """Parse a flat key = value config file; '#' starts a comment."""
    values: dict = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, _, value = line.partition("=")
        key = key.strip()
        if key not in _SCHEMA:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        try:
            values[key] = _SCHEMA[key](value.strip())
        except ValueError as exc:
            raise ConfigError(f"{path}:{lineno}: bad value for {key}: {exc}") from exc
    return values


@dataclass
class RunConfig:
    """Fully resolved invocation: model, experiment, and output blocks."""

    command: str
    v: Optional[list[float]] = None
    z0: Optional[list[int]] = None
    kappa: Optional[int] = None
    seed: int = 0
    replicates: int = DEFAULT_REPLICATES
    n_offset: int = 0
    kappa_list: list[int] = field(default_factory=list)
    tol: float = DEFAULT_TOL
    figure_id: Optional[str] = None
    steps: Optional[int] = None
    mode: str = "mpcr_only"
    out: str = DEFAULT_OUT
    format: str = "csv"
    threads: int = 1

    def as_manifest_dict(self) -> dict:
        return {
            "command": self.command,
            "model": {
                "v": self.v,
                "z0": self.z0,
                "kappa": self.kappa,
                "seed": self.seed,
            },
            "experiment": {
                "replicates": self.replicates,
                "n_offset": self.n_offset,
                "kappa_list": self.kappa_list,
                "tol": self.tol,
                "figure_id": self.figure_id,
                "steps": self.steps,
                "mode": self.mode,
            },
            "output": {
                "out": self.out,
                "format": self.format,
                "threads": self.threads,
            },
        }

    def model_params(self) -> ModelParams:
        raw = {"v": self.v, "z0": self.z0, "kappa": self.kappa, "seed": self.seed}
        missing = [k for k in ("v", "z0", "kappa") if raw[k] is None]
        if missing:
            raise ConfigError(
                f"missing model parameter(s): {', '.join(missing)} "
                "(set via --config file or flags)"
            )
        return validate(raw)


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Merge config file and flags; flags win, MPCR_OUT wins over --out."""
    file_vals = parse_config_file(args.config) if args.config else {}
    cfg = RunConfig(command=args.command)

    def pick(key: str, default):
        flag = getattr(args, key, None)
        if flag is not None:
            return flag
        if key in file_vals:
            return file_vals[key]
        return default

    cfg.v = pick("v", None)
    cfg.z0 = pick("z0", None)
    cfg.kappa = pick("kappa", None)
    cfg.seed = int(pick("seed", 0))
    cfg.replicates = int(pick("replicates", DEFAULT_REPLICATES))
    cfg.n_offset = int(pick("n_offset", 0))
    cfg.kappa_list = list(pick("kappa_list", []))
    cfg.tol = float(pick("tol", DEFAULT_TOL))
    cfg.figure_id = pick("figure_id", None)
    cfg.steps = pick("steps", None)
    cfg.mode = str(pick("mode", "mpcr_only"))
    cfg.out = str(pick("out", DEFAULT_OUT))
    env_out = os.environ.get("MPCR_OUT")
    if env_out:
        cfg.out = env_out
    cfg.format = str(pick("format", "csv"))
    if cfg.format not in ("csv", "json"):
        raise ConfigError(f"format must be csv or json, got {cfg.format!r}")
    cfg.threads = int(pick("threads", 1))
    if cfg.threads == 0:
        cfg.threads = os.cpu_count() or 1
    if cfg.threads < 0:
        raise ConfigError("threads must be >= 0")
    if cfg.tol <= 0:
        raise ConfigError("tol must be > 0")
    return cfg


def _format_cell(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_table(rows: Sequence[dict], path: Path, fmt: str) -> None:
    """Write rows as CSV (header + shortest round-trip decimals, LF endings)
    or JSON. Identical rows produce byte-identical files."""
    if not rows:
        raise IoError(f"refusing to write empty table to {path}")
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        if fmt == "csv":
            buf = io.StringIO()
            writer = csv.writer(buf, lineterminator="\n")
            columns = list(rows[0].keys())
            writer.writerow(columns)
            for row in rows:
                writer.writerow([_format_cell(row[c]) for c in columns])
            path.write_text(buf.getvalue(), encoding="utf-8", newline="")
        elif fmt == "json":
            path.write_text(
                json.dumps(rows, indent=2) + "\n", encoding="utf-8", newline=""
            )
        else:
            raise ConfigError(f"unknown output format {fmt!r}")
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def _write_manifest(cfg: RunConfig, out_dir: Path, outputs: list[str]) -> None:
    manifest = {
        "artifact_version": __version__,
        "config": cfg.as_manifest_dict(),
        "outputs": outputs,
    }
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / f"{cfg.command}_manifest.json").write_text(
            json.dumps(manifest, indent=2, sort_keys=True) + "\n",
            encoding="utf-8",
            newline="",
        )
    except OSError as exc:
        raise IoError(f"cannot write manifest in {out_dir}: {exc}") from exc


def _vec_str(vec) -> str:
    return "(" + ", ".join(repr(float(x)) for x in vec) + ")"


def _cmd_maps(cfg: RunConfig, args: argparse.Namespace) -> list[str]:
    """Evaluate requested maps/limits at points; print value + certificate."""
    requested = [
        args.f is not None,
        args.finv is not None,
        args.H is not None,
        args.G is not None,
        args.F is not None,
        args.Finv is not None,
    ]
    if not any(requested):
        raise ConfigError("maps: request at least one of --f/--finv/--H/--G/--F/--Finv")

    def v1() -> float:
        if args.v1 is not None:
            return args.v1
        if cfg.v:
            return cfg.v[0]
        raise ConfigError("maps: --v1 (or a model v) is required")

    def full_params() -> ModelParams:
        if not cfg.v:
            raise ConfigError("maps: vector operations need --v")
        z0 = cfg.z0 if cfg.z0 else [1] * len(cfg.v)
        kappa = cfg.kappa if cfg.kappa is not None else 1
        return validate({"v": cfg.v, "z0": z0, "kappa": kappa, "seed": cfg.seed})

    lines = []
    if args.f is not None:
        val = f_apply(args.f, args.n, v1())
        lines.append(f"f^({args.n})({args.f!r}) = {val!r}")
    if args.finv is not None:
        val = f_inverse(args.finv, v1())
        lines.append(f"f_inverse({args.finv!r}) = {val!r}")
    if args.H is not None:
        ev = H_eval(args.H, v1(), cfg.tol)
        lines.append(
            f"H({args.H!r}) = {ev.value!r}  certificate = {ev.truncation_bound!r}"
            f"  terms = {ev.terms_used}"
        )
    if args.G is not None:
        params = full_params()
        for i, ev in enumerate(G_eval(args.G, params, cfg.tol)):
            lines.append(
                f"G_{i + 1}({args.G!r}) = {ev.value!r}"
                f"  certificate = {ev.truncation_bound!r}  terms = {ev.terms_used}"
            )
    if args.F is not None:
        params = full_params()
        x = [float(t) for t in _split(args.F)]
        lines.append(f"F({_vec_str(x)}) = {_vec_str(F_apply(x, params))}")
    if args.Finv is not None:
        params = full_params()
        y = [float(t) for t in _split(args.Finv)]
        inv = F_inverse(y, params)
        back = F_apply(inv, params)
        resid = float(np.abs(back - np.asarray(y)).sum())
        lines.append(
            f"F_inverse({_vec_str(y)}) = {_vec_str(inv)}  residual = {resid!r}"
        )
    for line in lines:
        print(line)
    return []


def _cmd_simulate(cfg: RunConfig, out_dir: Path) -> list[str]:
    params = cfg.model_params()
    steps = cfg.steps if cfg.steps is not None else params.kappa
    mode = SimMode(cfg.mode)
    rows = []
    for rep in range(cfg.replicates):
        traj = simulate(params, steps, mode, RngStream(cfg.seed, rep))
        for state in traj.states:
            row: dict = {"replicate": rep, "n": state.n}
            for i in range(params.d):
                row[f"z_{i + 1}"] = int(state.z[i])
            if state.y is not None:
                for i in range(params.d):
                    row[f"y_{i + 1}"] = int(state.y[i])
            rows.append(row)
    name = f"simulate.{cfg.format}"
    write_table(rows, out_dir / name, cfg.format)
    return [name]


def _cmd_theorem1(cfg: RunConfig, out_dir: Path) -> list[str]:
    params = cfg.model_params()
    records = run_theorem1(
        params, cfg.replicates, seed=cfg.seed, tol=cfg.tol, threads=cfg.threads
    )
    name = f"theorem1.{cfg.format}"
    write_table(theorem1_rows(records), out_dir / name, cfg.format)
    return [name]


def _cmd_theorem2(cfg: RunConfig, out_dir: Path) -> list[str]:
    params = cfg.model_params()
    records = run_theorem2(
        params,
        cfg.n_offset,
        cfg.replicates,
        seed=cfg.seed,
        steps=cfg.steps,
        tol=cfg.tol,
        threads=cfg.threads,
    )
    name = f"theorem2.{cfg.format}"
    write_table(theorem2_rows(records), out_dir / name, cfg.format)
    return [name]


def _cmd_sweep(cfg: RunConfig, out_dir: Path) -> list[str]:
    params = cfg.model_params()
    if not cfg.kappa_list:
        raise ConfigError("sweep: kappa_list is required")
    summaries = convergence_sweep(
        params, cfg.kappa_list, cfg.replicates, seed=cfg.seed,
        tol=cfg.tol, threads=cfg.threads,
    )
    name = f"sweep.{cfg.format}"
    write_table(sweep_rows(summaries), out_dir / name, cfg.format)
    return [name]


def _cmd_figure(cfg: RunConfig, out_dir: Path) -> list[str]:
    if cfg.figure_id is None:
        raise ConfigError("figure: --id is required")
    params = None
    if cfg.v is not None:
        params = cfg.model_params()
    options = {
        "replicates": cfg.replicates,
        "seed": cfg.seed,
        "tol": cfg.tol,
        "threads": cfg.threads,
    }
    if cfg.figure_id == "3":
        options["n_offset"] = cfg.n_offset if cfg.n_offset != 0 else -3
    rows = figure_data(cfg.figure_id, params, options)
    name = f"figure{cfg.figure_id}.{cfg.format}"
    write_table(rows, out_dir / name, cfg.format)
    return [name]


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key = value config file")
    common.add_argument("--out", help=f"output directory (default {DEFAULT_OUT}; "
                        "env MPCR_OUT overrides)")
    common.add_argument("--format", choices=("csv", "json"), default=None)
    common.add_argument("--replicates", type=int, default=None)
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--kappa", type=int, default=None)
    common.add_argument("--v", type=lambda s: [float(t) for t in _split(s)],
                        default=None, metavar="V1,V2,...")
    common.add_argument("--z0", type=lambda s: [int(t) for t in _split(s)],
                        default=None, metavar="N1,N2,...")
    common.add_argument("--n-offset", dest="n_offset", type=int, default=None)
    common.add_argument("--tol", type=float, default=None)
    common.add_argument("--threads", type=int, default=None,
                        help="worker threads (0 = auto)")

    parser = argparse.ArgumentParser(
        prog="mpcr",
        description="Multitype PCR branching processes: simulation, limit "
        "functions, and Monte Carlo verification.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_maps = sub.add_parser(
        "maps", parents=[common],
        help="evaluate f/H/G/F/F_inverse at points; prints value + certificate",
    )
    p_maps.add_argument("--f", type=float, help="evaluate the n-th iterate at r")
    p_maps.add_argument("--n", type=int, default=1, help="iterate count for --f")
    p_maps.add_argument("--finv", type=float, help="evaluate the scalar inverse at y")
    p_maps.add_argument("--H", type=float, help="evaluate the scaling limit at r")
    p_maps.add_argument("--G", type=float, help="evaluate all G_i at r (needs --v)")
    p_maps.add_argument("--F", metavar="X1,X2,...", help="one multitype step")
    p_maps.add_argument("--Finv", metavar="Y1,Y2,...", help="multitype preimage")
    p_maps.add_argument("--v1", type=float, help="scalar replication probability")

    sub.add_parser(
        "simulate", parents=[common],
        help="trajectories to CSV/JSON: columns replicate, n, z_i (and y_i "
        "when mode = coupled); --steps and mode/replicates from config",
    ).add_argument("--steps", type=int, default=None)
    sub.add_parser(
        "theorem1", parents=[common],
        help="pivot-time experiment; columns: replicate, then per type "
        "scaled_Z_i, W_hat_i, limit_i",
    )
    p_t2 = sub.add_parser(
        "theorem2", parents=[common],
        help="offset-time experiment; columns: replicate, X_total, "
        "thm2_total, then per type X_i, W_hat_i, limit_i",
    )
    p_t2.add_argument("--steps", type=int, default=None,
                      help="observation time kappa + n_offset (checked)")
    p_sweep = sub.add_parser(
        "sweep", parents=[common],
        help="error summaries across kappa values; columns: kappa, "
        "replicates, then per type mean/median abs and median rel errors",
    )
    p_sweep.add_argument("--kappa-list", dest="kappa_list", default=None,
                         type=lambda s: [int(t) for t in _split(s)],
                         metavar="K1,K2,...")
    p_fig = sub.add_parser(
        "figure", parents=[common],
        help="data behind figures A/1/2/3 (see README for column sets)",
    )
    p_fig.add_argument("--id", dest="figure_id", choices=("A", "1", "2", "3"),
                       default=None)
    return parser


_COMMANDS = {
    "simulate": _cmd_simulate,
    "theorem1": _cmd_theorem1,
    "theorem2": _cmd_theorem2,
    "sweep": _cmd_sweep,
    "figure": _cmd_figure,
}


def dispatch(argv: Sequence[str]) -> int:
    """Run one subcommand; returns the process exit status."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        cfg = resolve_config(args)
        out_dir = Path(cfg.out)
        if cfg.command == "maps":
            outputs = _cmd_maps(cfg, args)
        else:
            outputs = _COMMANDS[cfg.command](cfg, out_dir)
        _write_manifest(cfg, out_dir, outputs)
        return 0
    except ConfigError as exc:
        print(f"mpcr: config error: {exc}", file=sys.stderr)
        return ConfigError.exit_code
    except NumericalError as exc:
        print(f"mpcr: numerical error: {exc}", file=sys.stderr)
        return NumericalError.exit_code
    except IoError as exc:
        print(f"mpcr: io error: {exc}", file=sys.stderr)
        return IoError.exit_code
    except MpcrError as exc:
        print(f"mpcr: error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
