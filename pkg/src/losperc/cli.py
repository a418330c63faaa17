"""Command-line front end for the experiment drivers.

One subcommand per driver.  Options resolve as CLI flag over config-file
value over environment (``LOSPERC_THREADS``) over built-in default.  Each
run writes a CSV table (``--out`` or stdout) and, when ``--out`` is given,
a JSON mirror ``<out>.json`` holding the schema version, the resolved
configuration, and the same rows.  No wall-clock fields appear in either
file, so a rerun with the same configuration and seed is byte-identical.

Exit codes: 0 success, 1 non-bracketed bisection, 2 configuration error,
3 fuzz suite failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

from . import experiments as xp
from .coverage1d import CoverageTable, DomainError
from .percolation import WindowTooSmall

__all__ = ["main"]

_COMMANDS = (
    "crossing",
    "sweep",
    "pc-bisect",
    "lambda-c",
    "ngood",
    "stab",
    "russo",
    "unique",
    "coverage1d",
    "fuzz",
)

# params entries settable directly as CLI conveniences, per command
_PARAM_FLAGS: Dict[str, Tuple[str, ...]] = {
    "crossing": ("p", "lam", "r"),
    "sweep": ("p", "lam", "r"),
    "pc-bisect": ("r", "tol"),
    "lambda-c": ("p", "r", "lam_max", "tol_lambda"),
    "ngood": ("p", "lam", "r", "n"),
    "stab": ("n",),
    "russo": ("p", "lam", "r", "n", "alpha"),
    "unique": ("p", "lam", "r"),
    "coverage1d": ("ell_min", "ell_max", "lam", "r", "n_samples", "knots_per_decade"),
    "fuzz": ("budget", "n_max", "fault"),
}

_INT_PARAMS = {"n_samples", "knots_per_decade", "budget", "n_max"}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="losperc",
        description="Percolation experiments on random planar street systems.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name, help=f"run the {name} driver")
        p.add_argument("--config", help="JSON file with configuration defaults")
        p.add_argument("--seed", type=int, help="master seed (required)")
        p.add_argument("--reps", type=int, help="number of replicates")
        p.add_argument("--window", type=float, help="analysis box side")
        p.add_argument("--margin", type=float, help="sampling margin per side")
        p.add_argument("--threads", type=int, help="worker processes")
        p.add_argument("--out", help="CSV output path (stdout when absent)")
        for flag in _PARAM_FLAGS[name]:
            p.add_argument(
                f"--{flag.replace('_', '-')}",
                dest=f"param_{flag}",
                help=f"parameter {flag}",
            )
    return parser


def _coerce_param(name: str, raw: str) -> Any:
    if name == "fault":
        return raw
    if name in _INT_PARAMS:
        try:
            return int(raw)
        except ValueError:
            raise xp.ConfigError(f"parameter {name!r} must be an integer, got {raw!r}")
    if raw in ("inf", "Infinity", "+inf"):
        return math.inf
    try:
        return float(raw)
    except ValueError:
        raise xp.ConfigError(f"parameter {name!r} must be numeric, got {raw!r}")


def _load_config_file(path: str) -> Dict[str, Any]:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise xp.ConfigError(f"cannot read config file: {exc}")
    except json.JSONDecodeError as exc:
        raise xp.ConfigError(f"config file is not valid JSON: {exc}")
    if not isinstance(data, dict):
        raise xp.ConfigError("config file must hold a JSON object")
    return data


def _resolve_config(args: argparse.Namespace) -> xp.RunConfig:
    file_cfg: Dict[str, Any] = {}
    if args.config:
        file_cfg = _load_config_file(args.config)
    params: Dict[str, Any] = {}
    reserved = {"seed", "window", "margin", "reps", "threads", "out", "params"}
    raw_params = file_cfg.get("params", {})
    if not isinstance(raw_params, dict):
        raise xp.ConfigError('config key "params" must be an object')
    params.update(raw_params)
    for key, value in file_cfg.items():
        if key not in reserved:
            params[key] = value
    for flag in _PARAM_FLAGS[args.command]:
        raw = getattr(args, f"param_{flag}", None)
        if raw is not None:
            params[flag] = _coerce_param(flag, raw)

    def pick(name: str, default: Any) -> Any:
        cli = getattr(args, name, None)
        if cli is not None:
            return cli
        if name in file_cfg:
            return file_cfg[name]
        return default

    threads = pick("threads", None)
    if threads is None:
        env = os.environ.get("LOSPERC_THREADS")
        if env is not None:
            try:
                threads = int(env)
            except ValueError:
                raise xp.ConfigError(f"LOSPERC_THREADS must be an integer, got {env!r}")
        else:
            threads = 1
    seed = pick("seed", None)
    if seed is None:
        raise xp.ConfigError("a master seed is required (--seed or config file)")
    kwargs: Dict[str, Any] = {
        "seed": int(seed),
        "threads": int(threads),
        "out": pick("out", None),
        "params": params,
    }
    window = pick("window", None)
    if window is not None:
        kwargs["window"] = float(window)
    margin = pick("margin", None)
    if margin is not None:
        kwargs["margin"] = float(margin)
    reps = pick("reps", None)
    if reps is not None:
        kwargs["reps"] = int(reps)
    return xp.RunConfig(**kwargs)


# ---------------------------------------------------------------------------
# row building


def _cell(value: Any) -> Any:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if value is None:
        return ""
    return value


def _estimate_cells(est) -> Dict[str, Any]:
    return {
        "value": est.value,
        "stderr": est.stderr,
        "n_samples": est.n_samples,
        "seed": est.seed,
    }


def _sweep_rows(res: xp.SweepResult) -> Tuple[List[str], List[Dict[str, Any]]]:
    rows = []
    names: List[str] = []
    for row in res.rows:
        d: Dict[str, Any] = {}
        for k, v in row.params:
            d[k] = v
            if k not in names:
                names.append(k)
        d.update(_estimate_cells(row.estimate))
        d["n_excluded"] = row.n_excluded
        rows.append(d)
    header = names + ["value", "stderr", "n_samples", "seed", "n_excluded"]
    for axis, count in res.monotone_violations:
        col = f"violations_{axis}"
        header.append(col)
        for d in rows:
            d[col] = count
    return header, rows


def _russo_rows(rep: xp.RussoReport, config: xp.RunConfig) -> Tuple[List[str], List[Dict[str, Any]]]:
    header = [
        "kind",
        "lam",
        "r",
        "theta",
        "pivotal_sum",
        "pivotal_stderr",
        "d_lambda",
        "d_lambda_stderr",
        "d_r",
        "d_r_stderr",
        "agreement_z",
        "bound_lhs",
        "bound_rhs",
        "bound_sigma",
        "bound_satisfied",
        "n_samples",
        "n_excluded",
    ]
    main_row: Dict[str, Any] = {
        "kind": "point",
        "lam": config.fparam("lam", 0.5),
        "r": config.fparam("r", 1.5),
        "theta": rep.theta.value,
        "pivotal_sum": rep.pivotal_sum.value,
        "pivotal_stderr": rep.pivotal_sum.stderr,
        "d_lambda": rep.fd_lambda.value,
        "d_lambda_stderr": rep.fd_lambda.stderr,
        "d_r": rep.fd_r.value,
        "d_r_stderr": rep.fd_r.stderr,
        "agreement_z": rep.agreement_z,
        "n_samples": rep.theta.n_samples,
        "n_excluded": rep.n_excluded,
    }
    if rep.inequality is not None:
        main_row.update(
            bound_lhs=rep.inequality.lhs,
            bound_rhs=rep.inequality.rhs,
            bound_sigma=rep.inequality.sigma,
            bound_satisfied=rep.inequality.satisfied,
        )
    rows = [main_row]
    for pt in rep.grid:
        rows.append(
            {
                "kind": "grid",
                "lam": pt.lam,
                "r": pt.r,
                "d_lambda": pt.d_lambda.value,
                "d_lambda_stderr": pt.d_lambda.stderr,
                "d_r": pt.d_r.value,
                "d_r_stderr": pt.d_r.stderr,
                "bound_lhs": pt.bound.lhs,
                "bound_rhs": pt.bound.rhs,
                "bound_sigma": pt.bound.sigma,
                "bound_satisfied": pt.bound.satisfied,
                "n_samples": pt.d_lambda.n_samples,
            }
        )
    return header, rows


def _run(command: str, config: xp.RunConfig) -> Tuple[List[str], List[Dict[str, Any]], int]:
    if command == "crossing":
        header, rows = _sweep_rows(xp.cmd_crossing(config))
        return header, rows, 0
    if command == "sweep":
        header, rows = _sweep_rows(xp.cmd_sweep(config))
        return header, rows, 0
    if command == "pc-bisect":
        value = xp.cmd_pc_bisect(config.fparam("r"), config)
        return ["r", "p_c"], [{"r": config.fparam("r"), "p_c": value}], 0
    if command == "lambda-c":
        res = xp.cmd_lambda_c(config.fparam("p"), config.fparam("r"), config)
        row = {
            "p": config.fparam("p"),
            "r": config.fparam("r"),
            "status": res.status,
            "lambda_c": res.value,
            "est_zero": res.est_zero,
            "est_max": res.est_max,
            "lam_max": res.lam_max,
        }
        return list(row.keys()), [row], 0
    if command == "ngood":
        header, rows = _sweep_rows(xp.cmd_ngood(config))
        return header, rows, 0
    if command == "stab":
        header, rows = _sweep_rows(xp.cmd_stab(config))
        return header, rows, 0
    if command == "russo":
        header, rows = _russo_rows(xp.cmd_russo(config), config)
        return header, rows, 0
    if command == "unique":
        header, rows = _sweep_rows(xp.cmd_unique(config))
        return header, rows, 0
    if command == "coverage1d":
        table = CoverageTable.build(
            config.fparam("ell_min", 0.05),
            config.fparam("ell_max", 20.0),
            lam=config.fparam("lam", 1.0),
            r=config.fparam("r", 1.0),
            n_samples=int(config.param("n_samples", 100_000)),
            seed=config.seed,
            knots_per_decade=int(config.param("knots_per_decade", 64)),
        )
        header = ["ell", "lambda", "r", "p", "stderr", "n_samples", "seed"]
        rows = [
            {
                "ell": float(ell),
                "lambda": table.lam,
                "r": table.r,
                "p": float(p),
                "stderr": float(s),
                "n_samples": table.n_samples,
                "seed": table.seed,
            }
            for ell, p, s in zip(table.ells, table.probs, table.stderrs)
        ]
        return header, rows, 0
    if command == "fuzz":
        rep = xp.cmd_fuzz(config)
        header = ["suite", "cases", "failures", "first_failure"]
        rows = [
            {
                "suite": s.name,
                "cases": s.cases,
                "failures": s.failures,
                "first_failure": s.first_failure,
            }
            for s in rep.suites
        ]
        return header, rows, 0 if rep.ok else 3
    raise xp.ConfigError(f"unknown command {command!r}")


# ---------------------------------------------------------------------------
# serialization


def _write_csv(stream, header: Sequence[str], rows: Sequence[Mapping[str, Any]]) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_cell(row.get(col)) for col in header])


def _json_safe(value: Any) -> Any:
    if isinstance(value, float) and not math.isfinite(value):
        return repr(value)
    if isinstance(value, dict):
        return {k: _json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]
    return value


def _config_echo(command: str, config: xp.RunConfig) -> Dict[str, Any]:
    return {
        "command": command,
        "seed": config.seed,
        "window": config.window,
        "margin": config.effective_margin,
        "reps": config.reps,
        "threads": config.threads,
        "params": _json_safe(dict(config.params)),
    }


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        config = _resolve_config(args)
    except xp.ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        header, rows, rc = _run(args.command, config)
    except (xp.ConfigError, WindowTooSmall, DomainError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except xp.NonBracketed as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    buf = io.StringIO()
    _write_csv(buf, header, rows)
    text = buf.getvalue()
    if config.out:
        with open(config.out, "w", newline="") as fh:
            fh.write(text)
        mirror = {
            "schema_version": xp.SCHEMA_VERSION,
            "config_echo": _config_echo(args.command, config),
            "rows": [_json_safe(dict(row)) for row in rows],
        }
        with open(config.out + ".json", "w") as fh:
            json.dump(mirror, fh, indent=2, sort_keys=True)
            fh.write("\n")
    else:
        sys.stdout.write(text)
    return rc


if __name__ == "__main__":
    sys.exit(main())
