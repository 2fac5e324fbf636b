"""Command-line front end: constants, thresholds, simulations, calibration.

Simulation runs are driven by a flat INI config (a preset name or a file
path) with scenario-specific sections; command-line flags override file
values.  Outputs are an RFC-4180-style CSV plus a JSON manifest carrying
everything needed to reproduce the run byte for byte.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import hashlib
import json
import sys
import time
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from .distributions import make_model
from .regime import TestingProblem, compute_regime
from .simlab import (
    SCENARIO1_COLUMNS,
    SCENARIO2_COLUMNS,
    CellError,
    ExperimentConfig,
    ProcedureSpec,
    Scenario,
    cell_rows,
    default_alpha_grid,
    estimate_c0,
    scenario_cells,
)
from .thresholds import bfdr_threshold, gw_threshold, oracle_threshold

_DISTS = ("student-t", "pareto", "inverse-gamma")

_SCENARIO_NAMES = {
    "s1": Scenario.RISK_RATIO_VS_ALPHA,
    "scenario1": Scenario.RISK_RATIO_VS_ALPHA,
    "risk-ratio-vs-alpha": Scenario.RISK_RATIO_VS_ALPHA,
    "s2": Scenario.ERROR_RATES_VS_P,
    "scenario2": Scenario.ERROR_RATES_VS_P,
    "error-rates-vs-p": Scenario.ERROR_RATES_VS_P,
}


def _positive(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not a number")
    if not value > 0:
        raise argparse.ArgumentTypeError(f"{text!r} must be positive")
    return value


def _unit_open(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not a number")
    if not 0.0 < value < 1.0:
        raise argparse.ArgumentTypeError(f"{text!r} must lie in (0, 1)")
    return value


def _float_list(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not a comma-separated number list")


def _fmt(value) -> str:
    return f"{value:.12g}"


def _csv_field(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def parse_procedure(label: str) -> ProcedureSpec:
    """Inverse of ProcedureSpec.label(): 'bfdr@0.1' -> ('bfdr', 0.1)."""
    kind, sep, level = label.partition("@")
    return ProcedureSpec(kind.strip(), float(level) if sep else None)


def _print_table(pairs, csv_path: str | None) -> None:
    for name, value in pairs:
        print(f"{name} = {value if isinstance(value, str) else _fmt(value)}")
    if csv_path:
        with open(csv_path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["name", "value"])
            for name, value in pairs:
                writer.writerow([name, value if isinstance(value, str) else _fmt(value)])


def cmd_constants(args) -> int:
    model = make_model(args.dist, args.gamma)
    regime = compute_regime(model, args.C, delta_inf=args.delta_inf)
    _print_table(
        [
            ("dist", args.dist),
            ("gamma", args.gamma),
            ("C", args.C),
            ("delta_inf", args.delta_inf),
            ("C0", regime.c0),
            ("C1", regime.c1),
            ("C2", regime.c2),
            ("C_B", regime.c_b),
            ("alpha_inf", regime.alpha_inf),
            ("beta_star_inf", regime.beta_star_inf),
        ],
        args.csv,
    )
    return 0


def cmd_threshold(args) -> int:
    model = make_model(args.dist, args.gamma)
    if args.v is not None:
        # direct target ratio: unit odds (p = 1/2) with the ratio as the
        # loss-weight quotient reproduces any requested v
        problem = TestingProblem(
            m=args.m, p=0.5, sigma0=1.0, u=args.u, delta0=args.v, delta_a=1.0
        )
    else:
        problem = TestingProblem(
            m=args.m,
            p=args.p,
            sigma0=1.0,
            u=args.u,
            delta0=args.delta0,
            delta_a=args.delta_a,
        )
    if args.rule == "oracle":
        result = oracle_threshold(model, problem)
    elif args.rule == "bfdr":
        result = bfdr_threshold(model, problem, args.alpha)
    else:
        result = gw_threshold(model, problem, args.alpha)
    print(f"omega = {_fmt(result.omega)}")
    print(f"omega_sq = {_fmt(result.omega ** 2)}")
    print(f"residual = {_fmt(result.residual)}")
    print(f"status = {result.status.value}")
    return 0


def _resolve_config_text(name: str) -> str:
    path = Path(name)
    if path.is_file():
        return path.read_text()
    candidate = name if name.endswith(".cfg") else name + ".cfg"
    ref = resources.files("abos.presets").joinpath(candidate)
    if ref.is_file():
        return ref.read_text()
    raise ValueError(f"config {name!r} is neither a file nor a bundled preset")


def _parse_scenario(text: str) -> Scenario:
    try:
        return _SCENARIO_NAMES[text.strip().lower()]
    except KeyError:
        raise ValueError(
            f"unknown scenario {text!r}; expected one of {sorted(_SCENARIO_NAMES)}"
        )


def _split_list(text: str) -> list[str]:
    return [x.strip() for x in text.split(",") if x.strip()]


def _config_from_ini(text: str, args) -> ExperimentConfig:
    cp = configparser.ConfigParser()
    cp.read_string(text)
    if "run" not in cp:
        raise ValueError("config is missing its [run] section")
    run = cp["run"]

    scenario = _parse_scenario(run.get("scenario", "s1"))
    dist = args.dist or run.get("dist", "student-t")
    gammas = args.gamma if args.gamma else _float_list(run.get("gamma", "3"))
    models = tuple(make_model(dist, g) for g in gammas)
    c_grid = args.C if args.C else _float_list(run.get("c", "1"))

    if scenario is Scenario.RISK_RATIO_VS_ALPHA:
        section = cp["s1"] if "s1" in cp else {}
        raw = section.get("alpha-grid", "default")
        if args.alpha:
            alpha_grid = args.alpha
        elif raw.strip().lower() == "default":
            alpha_grid = default_alpha_grid()
        else:
            alpha_grid = _float_list(raw)
        p_grid: tuple[float, ...] = ()
    else:
        section = cp["s2"] if "s2" in cp else {}
        alpha_grid = args.alpha if args.alpha else ()
        p_grid = args.p if args.p else _float_list(section.get("p-grid", ""))

    return ExperimentConfig(
        models=models,
        scenario=scenario,
        m=args.m if args.m is not None else run.getint("m", 10_000),
        replicates=(
            args.replicates
            if args.replicates is not None
            else run.getint("replicates", 200)
        ),
        seed=args.seed if args.seed is not None else run.getint("seed", 0),
        c_grid=c_grid,
        alpha_grid=alpha_grid,
        p_grid=p_grid,
        delta0=run.getfloat("delta0", 1.0),
        delta_a=run.getfloat("delta-a", 1.0),
        procedures=tuple(
            parse_procedure(lbl) for lbl in _split_list(run.get("procedures", "oracle, bh"))
        ),
        workers=args.workers if args.workers is not None else run.getint("workers", fallback=None),
    )


def _config_echo(cfg: ExperimentConfig) -> dict:
    return {
        "scenario": cfg.scenario.value,
        "m": cfg.m,
        "replicates": cfg.replicates,
        "seed": cfg.seed,
        "models": [{"dist": mdl.kind.value, "gamma": mdl.gamma} for mdl in cfg.models],
        "c_grid": list(cfg.c_grid),
        "alpha_grid": list(cfg.alpha_grid),
        "p_grid": list(cfg.p_grid),
        "delta0": cfg.delta0,
        "delta_a": cfg.delta_a,
        "procedures": [spec.label() for spec in cfg.procedures],
        "workers": cfg.workers,
    }


def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    digest.update(path.read_bytes())
    return digest.hexdigest()


def cmd_simulate(args) -> int:
    started = time.monotonic()
    cfg = _config_from_ini(_resolve_config_text(args.config), args)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    if cfg.scenario is Scenario.RISK_RATIO_VS_ALPHA:
        columns, csv_name = SCENARIO1_COLUMNS, "scenario1.csv"
    else:
        columns, csv_name = SCENARIO2_COLUMNS, "scenario2.csv"

    rows: list[dict] = []
    failures: list[str] = []
    for cell in scenario_cells(cfg):
        try:
            rows.extend(cell_rows(cfg, cell))
        except CellError as exc:
            failures.append(
                f"cell {cell.index} ({cell.model.kind.value} gamma={cell.model.gamma:g} "
                f"C={cell.c:g} p={cell.p:g}): {exc}"
            )

    csv_path = out_dir / csv_name
    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_csv_field(row[col]) for col in columns])

    manifest = {
        "tool": "abos",
        "version": __version__,
        "command": "simulate",
        "config": _config_echo(cfg),
        "seed": cfg.seed,
        "duration_seconds": round(time.monotonic() - started, 3),
        "outputs": [
            {"path": csv_name, "rows": len(rows), "sha256": _sha256(csv_path)}
        ],
    }
    if failures:
        manifest["failed_cells"] = failures
    manifest_path = out_dir / "manifest.json"
    manifest_path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")

    print(f"wrote {csv_path} ({len(rows)} rows)")
    print(f"wrote {manifest_path}")
    for line in failures:
        print(f"failed: {line}", file=sys.stderr)
    return 1 if failures else 0


def cmd_estimate_c0(args) -> int:
    observations = np.loadtxt(args.input, ndmin=1)
    model = make_model(args.dist, args.gamma)
    c0_hat, c_hat = estimate_c0(
        observations, model, args.delta_inf, args.a1, args.a2, args.b
    )
    print(f"c0_hat = {_fmt(c0_hat)}")
    print(f"c_hat = {_fmt(c_hat)}")
    return 0


def _add_model_flags(parser, with_c: bool = True) -> None:
    parser.add_argument("--dist", required=True, choices=_DISTS)
    parser.add_argument("--gamma", required=True, type=_positive)
    if with_c:
        parser.add_argument("--C", required=True, type=_positive)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="abos",
        description="Sparse scale-mixture multiple testing toolkit",
    )
    parser.add_argument("--version", action="version", version=f"abos {__version__}")
    sub = parser.add_subparsers(dest="cmd", required=True)

    p_const = sub.add_parser("constants", help="print regime constants")
    _add_model_flags(p_const)
    p_const.add_argument("--delta-inf", type=_positive, default=1.0)
    p_const.add_argument("--csv", help="also write the table to this CSV file")
    p_const.set_defaults(func=cmd_constants)

    p_thr = sub.add_parser("threshold", help="solve one testing threshold")
    _add_model_flags(p_thr, with_c=False)
    p_thr.add_argument("--rule", required=True, choices=("oracle", "bfdr", "gw"))
    p_thr.add_argument("--u", required=True, type=_positive, help="variance inflation")
    group = p_thr.add_mutually_exclusive_group(required=True)
    group.add_argument("--p", type=_unit_open, help="signal fraction")
    group.add_argument("--v", type=_positive, help="target ratio, bypassing p")
    p_thr.add_argument("--alpha", type=_unit_open)
    p_thr.add_argument("--m", type=int, default=1000)
    p_thr.add_argument("--delta0", type=_positive, default=1.0)
    p_thr.add_argument("--delta-a", dest="delta_a", type=_positive, default=1.0)
    p_thr.set_defaults(func=cmd_threshold)

    p_sim = sub.add_parser("simulate", help="run a scenario to CSV + manifest")
    p_sim.add_argument(
        "--config",
        default="s1-desk",
        help="preset name (s1-desk, s2-desk, paper-s1-m1e6, paper-s2) or file path",
    )
    p_sim.add_argument("--out-dir", default=".")
    p_sim.add_argument("--seed", type=int)
    p_sim.add_argument("--m", type=int)
    p_sim.add_argument("--replicates", type=int)
    p_sim.add_argument("--workers", type=int)
    p_sim.add_argument("--dist", choices=_DISTS)
    p_sim.add_argument("--gamma", type=_float_list, help="comma-separated tail indices")
    p_sim.add_argument("--C", type=_float_list, help="comma-separated difficulties")
    p_sim.add_argument("--alpha", type=_float_list, help="comma-separated levels")
    p_sim.add_argument("--p", type=_float_list, help="comma-separated signal fractions")
    p_sim.set_defaults(func=cmd_simulate)

    p_est = sub.add_parser("estimate-c0", help="window-count calibration from data")
    p_est.add_argument("--input", required=True, help="text file, one observation per line")
    _add_model_flags(p_est, with_c=False)
    p_est.add_argument("--delta-inf", type=_positive, default=1.0)
    p_est.add_argument("--a1", required=True, type=_positive)
    p_est.add_argument("--a2", required=True, type=_positive)
    p_est.add_argument("--b", required=True, type=_positive)
    p_est.set_defaults(func=cmd_estimate_c0)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "cmd", None) == "threshold":
        if args.rule in ("bfdr", "gw") and args.alpha is None:
            parser.error(f"--rule {args.rule} requires --alpha")
    try:
        return args.func(args)
    except (ValueError, OSError, CellError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
