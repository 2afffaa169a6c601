"""Command-line interface: ``deformed-bs {spectrum,compare,area,nmax,uncertainty}``.

Exit status is 0 on success, 1 for configuration errors and 2 for numerical
failures.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import asdict, dataclass
from typing import Any, Sequence

from . import __version__
from .deformation import (Deformation, QuadraticGUP, deformation_from_expr,
                          min_momentum_uncertainty, min_position_uncertainty, q_factor)
from .errors import (DeformedBSError, ExpressionSyntaxError, ParameterDomain,
                     UnknownIdentifier)
from .problem import CustomPotential, Harmonic, Problem, SquareWell
from .quantizer import DEFAULT_TOL, LevelResult, area_limit, max_level, phase_area, spectrum
from . import reference as ref

FORMATS = ("table", "csv", "json")
PROBLEMS = ("oscillator", "well", "custom")

# config-file key -> (flag name, type)
OPTIONS: dict[str, tuple[str, Any]] = {
    "problem": ("--problem", str),
    "a": ("--a", float),
    "potential_expr": ("--potential-expr", str),
    "scan_lo": ("--scan-lo", float),
    "scan_hi": ("--scan-hi", float),
    "alpha": ("--alpha", float),
    "beta": ("--beta", float),
    "deformation_expr": ("--deformation-expr", str),
    "hbar": ("--hbar", float),
    "delta": ("--delta", float),
    "levels": ("--levels", str),
    "energy": ("--energy", float),
    "tol": ("--tol", float),
    "format": ("--format", str),
    "out": ("--out", str),
}


class ConfigError(Exception):
    def __init__(self, flag: str, message: str):
        super().__init__(f"{flag}: {message}")
        self.flag = flag


@dataclass
class RunConfig:
    problem: str = "oscillator"
    a: float | None = None
    potential_expr: str | None = None
    scan_lo: float | None = None
    scan_hi: float | None = None
    alpha: float = 0.0
    beta: float = 0.0
    deformation_expr: str | None = None
    hbar: float = 1.0
    delta: float | None = None
    n_from: int | None = None
    n_to: int | None = None
    energy: float | None = None
    tol: float = DEFAULT_TOL
    format: str = "table"
    out: str | None = None

    def to_dict(self) -> dict[str, Any]:
        return {k: v for k, v in asdict(self).items() if v is not None and k != "out"}


# ------------------------------------------------------------------ parsing

def parse_levels(text: Any) -> tuple[int, int]:
    """``"1..10"``, ``"3"`` or a two-element list."""
    try:
        if isinstance(text, (list, tuple)):
            lo, hi = (int(v) for v in text)
        elif isinstance(text, int):
            lo = hi = text
        elif ".." in str(text):
            left, right = str(text).split("..", 1)
            lo, hi = int(left), int(right)
        else:
            lo = hi = int(text)
    except (TypeError, ValueError):
        raise ConfigError("--levels", f"expected FROM..TO, got {text!r}") from None
    if lo < 0 or hi < lo:
        raise ConfigError("--levels", f"need 0 <= FROM <= TO, got {lo}..{hi}")
    return lo, hi


def _load_config_file(path: str) -> dict[str, Any]:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError("--config", f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError("--config", f"{path} is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError("--config", "top level must be an object")
    out = {}
    for key, value in data.items():
        norm = key.replace("-", "_")
        if norm not in OPTIONS:
            raise ConfigError("--config", f"unknown key {key!r}")
        out[norm] = value
    return out


def build_config(args: argparse.Namespace) -> RunConfig:
    merged: dict[str, Any] = {}
    if args.config:
        merged.update(_load_config_file(args.config))
    for key in OPTIONS:
        value = getattr(args, key, None)
        if value is not None:
            merged[key] = value

    cfg = RunConfig()
    for key, value in merged.items():
        flag, typ = OPTIONS[key]
        if key == "levels":
            cfg.n_from, cfg.n_to = parse_levels(value)
            continue
        if value is None:
            continue
        try:
            value = typ(value)
        except (TypeError, ValueError):
            raise ConfigError(flag, f"invalid value {value!r}") from None
        if typ is float and not math.isfinite(value):
            raise ConfigError(flag, "must be finite")
        setattr(cfg, key, value)

    if cfg.problem not in PROBLEMS:
        raise ConfigError("--problem", f"must be one of {', '.join(PROBLEMS)}")
    if cfg.format not in FORMATS:
        raise ConfigError("--format", f"must be one of {', '.join(FORMATS)}")
    if cfg.hbar <= 0.0:
        raise ConfigError("--hbar", "must be positive")
    if cfg.tol <= 0.0 or cfg.tol >= 1e-2:
        raise ConfigError("--tol", "must lie in (0, 0.01)")
    if cfg.alpha < 0.0:
        raise ConfigError("--alpha", "must be non-negative")
    if cfg.beta < 0.0:
        raise ConfigError("--beta", "must be non-negative")
    if cfg.deformation_expr is not None and ("alpha" in merged or "beta" in merged):
        raise ConfigError("--deformation-expr", "cannot be combined with --alpha/--beta")
    if cfg.problem == "well":
        if cfg.a is None:
            raise ConfigError("--a", "required for --problem well")
        if cfg.a <= 0.0:
            raise ConfigError("--a", "must be positive")
    if cfg.problem == "custom":
        if cfg.potential_expr is None:
            raise ConfigError("--potential-expr", "required for --problem custom")
        if cfg.scan_lo is None or cfg.scan_hi is None:
            raise ConfigError("--scan-lo", "--scan-lo and --scan-hi are required for --problem custom")
        if not cfg.scan_lo < cfg.scan_hi:
            raise ConfigError("--scan-hi", "must exceed --scan-lo")
    return cfg


def build_problem(cfg: RunConfig) -> Problem:
    if cfg.problem == "oscillator":
        pot = Harmonic()
    elif cfg.problem == "well":
        pot = SquareWell(cfg.a)
    else:
        try:
            pot = CustomPotential.from_source(cfg.potential_expr, cfg.scan_lo, cfg.scan_hi)
        except (ExpressionSyntaxError, UnknownIdentifier) as exc:
            raise ConfigError("--potential-expr", str(exc)) from None
    return Problem(pot, hbar=cfg.hbar, delta=cfg.delta)


def build_deformation(cfg: RunConfig) -> Deformation:
    if cfg.deformation_expr is not None:
        try:
            return deformation_from_expr(cfg.deformation_expr)
        except (ExpressionSyntaxError, UnknownIdentifier) as exc:
            raise ConfigError("--deformation-expr", str(exc)) from None
    return QuadraticGUP(cfg.alpha, cfg.beta)


def level_range(cfg: RunConfig, pr: Problem) -> tuple[int, int]:
    if cfg.n_from is not None:
        lo, hi = cfg.n_from, cfg.n_to
    else:
        lo = 0 if pr.delta_default > 0.0 else 1
        hi = lo + 4
    if not lo + pr.delta_default > 0.0:
        raise ConfigError("--levels", f"n + delta must be positive; start at n >= 1 when delta = {pr.delta_default:g}")
    return lo, hi


# --------------------------------------------------------------- formatting

def fmt_csv(x: Any) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return format(x, ".17g")
    return str(x)


def fmt_table(x: Any) -> str:
    if x is None:
        return "-"
    if isinstance(x, float):
        return format(x, ".10g")
    return str(x)


def render(fmt: str, columns: Sequence[str], rows: list[dict[str, Any]],
           cfg: RunConfig, key: str, extra_meta: dict[str, Any] | None = None) -> str:
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([fmt_csv(row.get(c)) for c in columns])
        return buf.getvalue()
    if fmt == "json":
        meta = {"tool_version": __version__, "tolerance": cfg.tol}
        if extra_meta:
            meta.update(extra_meta)
        doc = {"config": cfg.to_dict(), key: [{c: row.get(c) for c in columns} for row in rows],
               "meta": meta}
        return dumps_canonical(doc)
    cells = [[fmt_table(row.get(c)) for c in columns] for row in rows]
    widths = [max([len(c)] + [len(r[i]) for r in cells]) for i, c in enumerate(columns)]
    lines = ["  ".join(c.rjust(w) for c, w in zip(columns, widths)),
             "  ".join("-" * w for w in widths)]
    lines += ["  ".join(v.rjust(w) for v, w in zip(r, widths)) for r in cells]
    return "\n".join(lines) + "\n"


def dumps_canonical(doc: Any) -> str:
    """Sorted keys, two-space indent, shortest round-trip floats, no NaN."""
    return json.dumps(doc, sort_keys=True, indent=2, allow_nan=False) + "\n"


def _emit(text: str, cfg: RunConfig) -> None:
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _level_row(lv: LevelResult) -> dict[str, Any]:
    return {
        "n": lv.n,
        "energy": lv.energy,
        "target_area": lv.target_area,
        "achieved_area": lv.achieved_area,
        "iterations": lv.iterations if lv.bound else None,
        "status": lv.status,
    }


# ----------------------------------------------------------------- commands

SPECTRUM_COLUMNS = ("n", "energy", "target_area", "achieved_area", "iterations", "status")


def cmd_spectrum(cfg: RunConfig) -> int:
    pr = build_problem(cfg)
    d = build_deformation(cfg)
    lo, hi = level_range(cfg, pr)
    levels = spectrum(pr, d, lo, hi, pr.delta_default, cfg.tol)
    _emit(render(cfg.format, SPECTRUM_COLUMNS, [_level_row(lv) for lv in levels], cfg, "levels"), cfg)
    return 0


def _oscillator_references(cfg: RunConfig, n: int) -> dict[str, float | None]:
    a, b = cfg.alpha, cfg.beta
    out: dict[str, float | None] = {}
    if a > 0.0 and b > 0.0:
        out["wkb_closed"] = ref.oscillator_wkb_closed(a, b, n, 0.5 if cfg.delta is None else cfg.delta)
        out["exact_leading_order"] = ref.oscillator_exact_leading(a, b, n) if a * b < 1.0 else None
    elif a == 0.0 and b == 0.0:
        delta = 0.5 if cfg.delta is None else cfg.delta
        out["wkb_closed"] = 2.0 * (n + delta)
    out["linear"] = ref.oscillator_linear(a, b, n)
    return out


def _well_references(cfg: RunConfig, n: int) -> dict[str, float | None]:
    a, b, width = cfg.alpha, cfg.beta, cfg.a
    out: dict[str, float | None] = {"linear": ref.well_linear(a, b, width, n)}
    if b == 0.0 and a > 0.0:
        out["beta0_exact"] = ref.well_beta0_exact(a, width, n)
    return out


def cmd_compare(cfg: RunConfig) -> int:
    if cfg.problem == "custom":
        raise ConfigError("--problem", "no reference formula applies to a custom potential")
    if cfg.deformation_expr is not None:
        raise ConfigError("--deformation-expr", "reference formulas cover only --alpha/--beta deformations")
    if cfg.hbar != 1.0:
        raise ConfigError("--hbar", "reference formulas assume hbar = 1")
    pr = build_problem(cfg)
    d = build_deformation(cfg)
    lo, hi = level_range(cfg, pr)
    levels = spectrum(pr, d, lo, hi, pr.delta_default, cfg.tol)
    refs_for = _oscillator_references if cfg.problem == "oscillator" else _well_references

    rows = []
    ref_names: list[str] = []
    for lv in levels:
        row: dict[str, Any] = {"n": lv.n, "energy": lv.energy, "status": lv.status}
        for name, value in refs_for(cfg, lv.n).items():
            if name not in ref_names:
                ref_names.append(name)
            row[name] = value
            if value is not None and lv.energy is not None:
                diff = abs(lv.energy - value)
                row[f"{name}_abs_diff"] = diff
                row[f"{name}_rel_diff"] = diff / abs(lv.energy)
        if cfg.problem == "oscillator":
            row["oscillator_exact_offset"] = ref.oscillator_exact_offset(cfg.alpha, cfg.beta)
        rows.append(row)
    columns = ["n", "energy", "status"]
    for name in ref_names:
        columns += [name, f"{name}_abs_diff", f"{name}_rel_diff"]
    if cfg.problem == "oscillator":
        columns.append("oscillator_exact_offset")
    _emit(render(cfg.format, columns, rows, cfg, "levels"), cfg)
    return 0


def cmd_area(cfg: RunConfig) -> int:
    if cfg.energy is None:
        raise ConfigError("--energy", "required for the area command")
    pr = build_problem(cfg)
    d = build_deformation(cfg)
    if not cfg.energy > pr.min_potential():
        raise ConfigError("--energy", f"must exceed the potential minimum {pr.min_potential():g}")
    res = phase_area(pr, d, cfg.energy, max(1e-12, 0.1 * cfg.tol))
    row = {
        "energy": cfg.energy,
        "area": res.value,
        "error_estimate": res.error_estimate,
        "evaluations": res.evaluations,
        "n_plus_delta": res.value / (2.0 * math.pi * pr.hbar),
    }
    columns = ("energy", "area", "error_estimate", "evaluations", "n_plus_delta")
    _emit(render(cfg.format, columns, [row], cfg, "area"), cfg)
    return 0


def cmd_nmax(cfg: RunConfig) -> int:
    pr = build_problem(cfg)
    d = build_deformation(cfg)
    limit = area_limit(pr, d)
    n_max = max_level(pr, d, pr.delta_default, limit)
    row = {
        "area_limit": limit.value if limit.finite else "infinite",
        "n_max": n_max if n_max is not None else "unbounded",
    }
    _emit(render(cfg.format, ("area_limit", "n_max"), [row], cfg, "nmax"), cfg)
    return 0


def cmd_uncertainty(cfg: RunConfig) -> int:
    a, b, h = cfg.alpha, cfg.beta, cfg.hbar
    try:
        dx = min_position_uncertainty(a, b, h)
        dp = min_momentum_uncertainty(a, b, h)
    except ParameterDomain as exc:
        raise ConfigError("--alpha", f"hbar^2*alpha*beta >= 1 ({exc})") from None
    try:
        q = q_factor(a, b)
    except ParameterDomain:
        q = None
    row = {"alpha": a, "beta": b, "hbar": h, "delta_x": dx, "delta_p": dp, "q_factor": q}
    columns = ("alpha", "beta", "hbar", "delta_x", "delta_p", "q_factor")
    _emit(render(cfg.format, columns, [row], cfg, "uncertainty"), cfg)
    return 0


COMMANDS = {
    "spectrum": cmd_spectrum,
    "compare": cmd_compare,
    "area": cmd_area,
    "nmax": cmd_nmax,
    "uncertainty": cmd_uncertainty,
}


def make_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("problem")
    g.add_argument("--problem", choices=PROBLEMS, default=None)
    g.add_argument("--a", type=float, default=None, help="square-well half-width")
    g.add_argument("--potential-expr", dest="potential_expr", default=None,
                   help="custom potential U(X), e.g. 'X^4'")
    g.add_argument("--scan-lo", dest="scan_lo", type=float, default=None)
    g.add_argument("--scan-hi", dest="scan_hi", type=float, default=None)
    g.add_argument("--hbar", type=float, default=None)
    g.add_argument("--delta", type=float, default=None,
                   help="offset in 2*pi*hbar*(n + delta); default 1/2, or 0 for the well")
    g = common.add_argument_group("deformation")
    g.add_argument("--alpha", type=float, default=None)
    g.add_argument("--beta", type=float, default=None)
    g.add_argument("--deformation-expr", dest="deformation_expr", default=None,
                   help="custom f(X, P), e.g. '1 + 0.1*P^2'")
    g = common.add_argument_group("run")
    g.add_argument("--levels", default=None, help="level range FROM..TO")
    g.add_argument("--energy", type=float, default=None, help="energy for the area command")
    g.add_argument("--tol", type=float, default=None, help=f"relative tolerance (default {DEFAULT_TOL:g})")
    g.add_argument("--format", choices=FORMATS, default=None)
    g.add_argument("--config", default=None, help="JSON file with the same keys as the flags")
    g.add_argument("--out", default=None, help="write output here instead of stdout")

    parser = argparse.ArgumentParser(
        prog="deformed-bs",
        description="Bohr-Sommerfeld spectra under deformed commutators [X,P] = i hbar f(X,P).")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on bad usage; usage errors are configuration errors here
        return 0 if exc.code == 0 else 1
    try:
        cfg = build_config(args)
        return COMMANDS[args.command](cfg)
    except (ConfigError, ParameterDomain) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except DeformedBSError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
