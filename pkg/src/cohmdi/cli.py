"""Command-line interface.

Three subcommands: `keyrate` evaluates (or optimizes) a single operating
point, `sweep` regenerates the figure data as CSV, `verify` runs the
self-check suites.  Exit codes: 0 success, 1 verification failure, 2
configuration error.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import math
import os
import sys
import tempfile

from . import fastpath
from .bounds import ZeroGainError
from .channel import ChannelModel
from .config import PRESETS, ConfigError, RunConfig, merge_raw, validate_config
from .keyrate import KeyRatePoint, SearchConfig, key_rate, optimize_alpha, sweep
from .states import DegenerateEmbeddingError
from .verify import FAIL, SKIP, run_suites
from .virtual_bloch import SingularBlochError

CSV_HEADER = "loss_db,epsilon,gamma_sq,alpha_opt,R,e_ph_U,e_bit,Q,gamma_obs,flag"


def _fmt(x: float) -> str:
    """17 significant digits: enough for bit-stable round trips."""
    return f"{x:.17g}"


def _csv_rows(points: list[KeyRatePoint]) -> list[str]:
    rows = [CSV_HEADER]
    for p in points:
        rows.append(",".join([
            _fmt(p.loss_db), _fmt(p.epsilon), _fmt(p.gamma_sq), _fmt(p.alpha),
            _fmt(p.R), _fmt(p.e_ph_U), _fmt(p.e_bit), _fmt(p.Q),
            _fmt(p.gamma_obs), p.flag,
        ]))
    return rows


def _write_atomic(path: str, text: str) -> None:
    """Write via a sibling temp file and rename; never leaves partials."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".cohmdi-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _point_record(point: KeyRatePoint) -> dict:
    record = {
        "loss_db": point.loss_db,
        "epsilon": point.epsilon,
        "alpha": point.alpha,
        "gamma_sq": point.gamma_sq,
        "R": point.R,
        "e_ph_U": point.e_ph_U,
        "e_bit": point.e_bit,
        "Q": point.Q,
        "gamma_obs": point.gamma_obs,
        "f_e": point.f_e,
        "p_key": point.p_key,
        "flag": point.flag,
        "backend": fastpath.BACKEND,
    }
    if point.detail is not None:
        d = point.detail
        record["intermediates"] = {
            "kappa": d.embedding.kappa,
            "xi": d.embedding.xi,
            "yields_c": d.yields.y_c.tolist(),
            "yields_d": d.yields.y_d.tolist(),
            "yields_success": d.yields.y_success.tolist(),
            "deltas": d.deltas.tolist(),
            "delta_vir_L": d.delta_vir_L,
            "f_obj": d.bloch.f_obj.tolist(),
            "gamma_ref_U": d.bound.gamma_ref_U,
            "gamma_ref_U_parts": list(d.bound.gamma_ref_U_parts),
            "gamma_U": d.bound.gamma_U,
        }
    return record


def _effective_config(args) -> RunConfig:
    raw: dict = {}
    if args.preset:
        if args.preset not in PRESETS:
            raise ConfigError(f"unknown preset {args.preset!r}; "
                              f"choose from {sorted(PRESETS)}")
        raw = PRESETS[args.preset]
    if args.config:
        with open(args.config) as fh:
            try:
                file_raw = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"config file {args.config} is not valid JSON: {exc}")
        raw = merge_raw(raw, file_raw)
    overrides: dict = {}
    if getattr(args, "out", None):
        overrides.setdefault("output", {})["path"] = args.out
    if getattr(args, "format", None):
        overrides.setdefault("output", {})["format"] = args.format
    if getattr(args, "seed", None) is not None:
        overrides["seed"] = args.seed
    raw = merge_raw(raw, overrides)
    return validate_config(raw)


def _epsilon_for_point(cfg: RunConfig):
    if cfg.epsilon_table is not None:
        return cfg.epsilon_table
    return cfg.epsilon_list[0]


def cmd_keyrate(args) -> int:
    cfg = _effective_config(args)
    if cfg.loss_grid is not None:
        raise ConfigError("keyrate needs channel.loss_db (a single point), "
                          "not channel.loss_grid")
    loss_db = cfg.loss_db if cfg.loss_db is not None else 10.0
    epsilon = _epsilon_for_point(cfg)
    gamma = math.sqrt(cfg.gamma_sq_list[0])
    try:
        if cfg.alpha == "optimize":
            alpha_star, point, trace = optimize_alpha(
                loss_db, epsilon, gamma, cfg.p_d, f_e=cfg.f_e, p_key=cfg.p_key
            )
            point = dataclasses.replace(point, gamma_sq=cfg.gamma_sq_list[0])
        else:
            ch = ChannelModel.from_loss_db(loss_db, cfg.p_d)
            point = key_rate(cfg.alpha, gamma, epsilon, ch, f_e=cfg.f_e,
                             p_key=cfg.p_key)
            point = dataclasses.replace(point, loss_db=loss_db,
                                        gamma_sq=cfg.gamma_sq_list[0])
            trace = None
    except (DegenerateEmbeddingError, SingularBlochError, ZeroGainError) as exc:
        print(f"R = 0  [{type(exc).__name__}: {exc}]")
        return 0

    print(f"loss          : {point.loss_db:.4f} dB")
    print(f"alpha         : {point.alpha:.6f}"
          + (" (optimized)" if cfg.alpha == "optimize" else ""))
    print(f"epsilon       : {point.epsilon:g}")
    print(f"|gamma|^2     : {point.gamma_sq:g}")
    print(f"gamma_obs     : {point.gamma_obs:.6e}")
    print(f"Q             : {point.Q:.6e}")
    print(f"e_bit         : {point.e_bit:.6e}")
    print(f"e_ph upper    : {point.e_ph_U:.6f}")
    print(f"R             : {point.R:.6e}")
    print(f"flag          : {point.flag}")
    print(f"backend       : {fastpath.BACKEND}")
    if trace is not None:
        print(f"optimizer     : {trace.evaluations} evaluations, "
              f"bracket {trace.bracket_width:.2e}")
    if cfg.out_path:
        if cfg.out_format == "json":
            _write_atomic(cfg.out_path, json.dumps(_point_record(point), indent=2) + "\n")
        else:
            _write_atomic(cfg.out_path, "\n".join(_csv_rows([point])) + "\n")
        print(f"wrote {cfg.out_path}")
    return 0


def cmd_sweep(args) -> int:
    cfg = _effective_config(args)
    if cfg.loss_grid is None:
        raise ConfigError("sweep needs channel.loss_grid")
    if cfg.epsilon_table is not None:
        raise ConfigError("sweep expects uniform epsilon values (scalar or list)")
    if cfg.alpha != "optimize":
        raise ConfigError("sweep optimizes alpha; set source.alpha to \"optimize\"")
    result = sweep(
        cfg.loss_grid.values(), cfg.epsilon_list, cfg.gamma_sq_list, cfg.p_d,
        f_e=cfg.f_e, p_key=cfg.p_key, search=SearchConfig(), jobs=args.jobs,
    )
    if cfg.out_format == "json":
        text = json.dumps([_point_record(p) for p in result.points], indent=2) + "\n"
    else:
        text = "\n".join(_csv_rows(result.points)) + "\n"
    out_path = cfg.out_path or "sweep.csv"
    _write_atomic(out_path, text)
    positive = sum(1 for p in result.points if p.R > 0.0)
    print(f"wrote {out_path}: {len(result.points)} points, {positive} with R > 0 "
          f"[backend {fastpath.BACKEND}]")
    return 0


def cmd_verify(args) -> int:
    cfg = _effective_config(args)
    names = [args.suite] if args.suite else None
    try:
        results = run_suites(names, seed=cfg.seed, n_max=cfg.n_max)
    except KeyError as exc:
        raise ConfigError(str(exc))
    width = max(len(r.name) for r in results)
    failures = 0
    for r in results:
        dev = "n/a" if math.isnan(r.max_deviation) else f"{r.max_deviation:.3e}"
        line = f"{r.name:<{width}}  {r.status}  max deviation {dev}"
        if r.detail:
            line += f"  {r.detail}"
        print(line)
        if r.status == FAIL:
            failures += 1
        elif r.status == SKIP:
            print(f"{r.name:<{width}}  skipped with reason above; not counted as failure")
    return 1 if failures else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cohmdi",
        description="Security bounds and key rates for coherent-state MDI-QKD "
                    "with uncharacterized transmitter side-channels.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file")
    common.add_argument("--preset", help=f"built-in preset: {', '.join(sorted(PRESETS))}")
    common.add_argument("--out", help="output path")
    common.add_argument("--format", choices=["csv", "json"], help="output format")
    common.add_argument("--seed", type=int, help="seed for the property suites")

    p_key = sub.add_parser("keyrate", parents=[common],
                           help="evaluate one operating point")
    p_key.set_defaults(func=cmd_keyrate)

    p_sweep = sub.add_parser("sweep", parents=[common],
                             help="optimize over a loss grid and emit CSV")
    p_sweep.add_argument("--jobs", type=int, default=1,
                         help="parallel worker processes (default 1)")
    p_sweep.set_defaults(func=cmd_sweep)

    p_verify = sub.add_parser("verify", parents=[common],
                              help="run the self-check suites")
    p_verify.add_argument("--suite", help="run a single suite by name")
    p_verify.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
