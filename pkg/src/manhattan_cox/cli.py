"""Command-line front end.

    manhattan-cox validate --preset sl-sp --mode typical-point --trials 100000 --out sl-sp.csv
    manhattan-cox curve --mode intersection --lambda-l 10 --lambda-c 3 --format json

Exit codes: 0 success (validation passed), 1 validation failed,
2 configuration error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .analytic import cdf_intersection, cdf_typical_assembled, cdf_typical_theorem2
from .geom import ManhattanCoxError, Mode, ModelParams
from .montecarlo import MIN_TRIALS, default_grid, validate

SCHEMA_VERSION = 1
EXIT_OK = 0
EXIT_FAILED = 1
EXIT_CONFIG = 2

# Densities (lambda_l, lambda_c) of the four regimes, per reference point.
PRESETS = {
    Mode.INTERSECTION: {
        "dl-dp": (10.0, 3.0),
        "sl-dp": (1.0, 3.0),
        "dl-sp": (10.0, 0.5),
        "sl-sp": (1.0, 0.5),
    },
    Mode.TYPICAL_POINT: {
        "dl-dp": (10.0, 5.0),
        "sl-dp": (1.0, 5.0),
        "dl-sp": (10.0, 0.5),
        "sl-sp": (1.0, 0.5),
    },
}
_MODE_SUFFIXES = (("-intersection", Mode.INTERSECTION), ("-typical-point", Mode.TYPICAL_POINT), ("-typical", Mode.TYPICAL_POINT))


class ConfigError(ManhattanCoxError):
    pass


@dataclass(frozen=True)
class RunConfig:
    mode: Mode
    lambda_l: float
    lambda_c: float
    n_trials: int = 100_000
    seed: int = 0
    grid_size: int = 200
    out: Optional[str] = None
    fmt: str = "csv"
    preset: Optional[str] = None

    @property
    def params(self) -> ModelParams:
        return ModelParams(self.lambda_l, self.lambda_c)


def split_preset(name: str):
    """``'sl-sp-typical'`` -> ``('sl-sp', Mode.TYPICAL_POINT)``; bare names give ``None`` mode."""
    name = name.lower()
    for suffix, mode in _MODE_SUFFIXES:
        if name.endswith(suffix):
            return name[: -len(suffix)], mode
    return name, None


def resolve_config(args: argparse.Namespace, command: str) -> RunConfig:
    settings = {}
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                settings.update(json.load(fh))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config file {args.config}: {exc}")
    for key in ("mode", "preset", "lambda_l", "lambda_c", "trials", "seed", "grid_size", "out", "format"):
        value = getattr(args, key, None)
        if value is not None:
            settings[key] = value

    mode = settings.get("mode")
    preset = settings.get("preset")
    if preset is not None:
        base, preset_mode = split_preset(str(preset))
        if preset_mode is not None:
            if mode is not None and Mode.parse(mode) is not preset_mode:
                raise ConfigError(f"preset {preset!r} conflicts with --mode {mode}")
            mode = preset_mode
        if mode is None:
            raise ConfigError("a preset needs a mode (pass --mode or a suffixed preset name)")
        table = PRESETS[Mode.parse(mode)]
        if base not in table:
            raise ConfigError(f"unknown preset {preset!r}; choose from {sorted(table)}")
        lam_l, lam_c = table[base]
        settings.setdefault("lambda_l", lam_l)
        settings.setdefault("lambda_c", lam_c)
        preset = base
    if mode is None:
        raise ConfigError("--mode is required")
    try:
        mode = Mode.parse(mode)
    except ValueError as exc:
        raise ConfigError(str(exc))
    if "lambda_l" not in settings or "lambda_c" not in settings:
        raise ConfigError("densities missing: pass --lambda-l and --lambda-c or a --preset")

    try:
        cfg = RunConfig(
            mode=mode,
            lambda_l=float(settings["lambda_l"]),
            lambda_c=float(settings["lambda_c"]),
            n_trials=int(settings.get("trials", 100_000)),
            seed=int(settings.get("seed", 0)),
            grid_size=int(settings.get("grid_size", 200)),
            out=settings.get("out"),
            fmt=str(settings.get("format", "csv")).lower(),
            preset=preset,
        )
        cfg.params
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc))
    if cfg.fmt not in ("csv", "json"):
        raise ConfigError(f"unknown format {cfg.fmt!r}")
    if command == "validate" and cfg.n_trials < MIN_TRIALS:
        raise ConfigError(f"--trials must be >= {MIN_TRIALS}")
    if cfg.seed < 0:
        raise ConfigError("--seed must be non-negative")
    if cfg.grid_size < 2:
        raise ConfigError("--grid-size must be >= 2")
    return cfg


def fmt_float(value: float) -> str:
    return format(float(value), ".17g")


def render_csv(header: Sequence[str], columns: Sequence[Sequence[float]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in zip(*columns):
        writer.writerow([fmt_float(v) for v in row])
    return buf.getvalue()


def parse_csv(text: str):
    """Inverse of :func:`render_csv`: ``(header, list of float columns)``."""
    rows = list(csv.reader(io.StringIO(text)))
    header, body = rows[0], rows[1:]
    columns = [[float(r[k]) for r in body] for k in range(len(header))]
    return header, columns


def render_json(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=True, allow_nan=False) + "\n"


def _emit(text: str, out: Optional[str]) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    Path(out).write_text(text, encoding="utf-8", newline="")


def _config_dict(cfg: RunConfig) -> dict:
    d = asdict(cfg)
    d["mode"] = cfg.mode.value
    d.pop("out")
    return d


def report_path(out: str) -> str:
    p = Path(out)
    return str(p.with_name(p.stem + ".report.json"))


def cmd_validate(cfg: RunConfig) -> int:
    regime = cfg.preset or f"l{cfg.lambda_l:g}-c{cfg.lambda_c:g}"
    report, emp, ana = validate(cfg.params, cfg.mode, cfg.n_trials, cfg.seed, grid_size=cfg.grid_size, regime=regime)
    h = emp.dkw_halfwidth
    lo = np.clip(emp.values - h, 0.0, 1.0)
    hi = np.clip(emp.values + h, 0.0, 1.0)
    report_doc = {
        "schema_version": SCHEMA_VERSION,
        "kind": "validation-report",
        "config": _config_dict(cfg),
        "report": report.to_dict(),
    }
    if cfg.fmt == "csv":
        header = ["distance_km", "cdf_empirical", "cdf_analytic", "dkw_lo", "dkw_hi"]
        _emit(render_csv(header, [emp.grid, emp.values, ana.values, lo, hi]), cfg.out)
        if cfg.out is not None:
            Path(report_path(cfg.out)).write_text(render_json(report_doc), encoding="utf-8")
    else:
        doc = dict(report_doc)
        doc["kind"] = "validation"
        doc["curves"] = {
            "distance_km": emp.grid.tolist(),
            "cdf_empirical": emp.values.tolist(),
            "cdf_analytic": ana.values.tolist(),
            "dkw_lo": lo.tolist(),
            "dkw_hi": hi.tolist(),
        }
        _emit(render_json(doc), cfg.out)
    status = "PASS" if report.passed else "FAIL"
    print(
        f"{status} {regime} {cfg.mode.value}: ks={report.ks_statistic:.5f} "
        f"tol={report.tolerance:.5f} (n={report.n_trials}, seed={cfg.seed})",
        file=sys.stderr,
    )
    return EXIT_OK if report.passed else EXIT_FAILED


def cmd_curve(cfg: RunConfig) -> int:
    params = cfg.params
    grid = default_grid(params, cfg.mode, cfg.grid_size)
    if cfg.mode is Mode.INTERSECTION:
        columns = {"distance_km": grid, "cdf": np.asarray(cdf_intersection(grid, params))}
    else:
        thm = np.array([cdf_typical_theorem2(t, params) for t in grid])
        asm = np.array([cdf_typical_assembled(t, params) for t in grid])
        columns = {
            "distance_km": grid,
            "cdf_theorem2": thm,
            "cdf_assembled": asm,
            "abs_diff": np.abs(thm - asm),
        }
    if cfg.fmt == "csv":
        _emit(render_csv(list(columns), list(columns.values())), cfg.out)
    else:
        doc = {
            "schema_version": SCHEMA_VERSION,
            "kind": "curve",
            "config": _config_dict(cfg),
            "columns": {k: np.asarray(v).tolist() for k, v in columns.items()},
        }
        _emit(render_json(doc), cfg.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="manhattan-cox",
        description="Shortest path distances in the Manhattan Poisson line Cox process.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--mode", choices=[m.value for m in Mode])
        p.add_argument("--preset", help="dl-dp | dl-sp | sl-dp | sl-sp (optionally suffixed -intersection/-typical)")
        p.add_argument("--lambda-l", dest="lambda_l", type=float, help="line density per km")
        p.add_argument("--lambda-c", dest="lambda_c", type=float, help="point density per km of line")
        p.add_argument("--grid-size", dest="grid_size", type=int)
        p.add_argument("--out", help="output path (default: stdout)")
        p.add_argument("--format", choices=["csv", "json"])
        p.add_argument("--config", help="JSON file with any of the above; flags take precedence")

    p_val = sub.add_parser("validate", help="Monte-Carlo vs exact CDF")
    common(p_val)
    p_val.add_argument("--trials", type=int)
    p_val.add_argument("--seed", type=int)

    p_curve = sub.add_parser("curve", help="exact CDF on a grid")
    common(p_curve)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args, args.command)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.command == "validate":
        return cmd_validate(cfg)
    return cmd_curve(cfg)


if __name__ == "__main__":
    sys.exit(main())
