"""Command-line interface.

Subcommands expose every operation with deterministic text output:

    roots       solve the dispersion relation at one parameter point
    sweep       dispersion/attenuation table over an h grid
    hmax        locate the maximum-absorption state on a branch
    theta-scan  max attenuation vs orientation (acoustic + secondary)
    simulate    forced kinetic run, wave fit, snapshot dump
    verify      oracle cross-check suite (pass/fail table)

Exit codes: 0 success, 1 argument/validation error, 2 numerical failure.
Angles are radians by default; append "deg" for degrees (e.g. --theta 45deg).
A flat `key = value` config file may supply any long option (without the
leading dashes); explicit flags take precedence.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass

import numpy as np

from . import analysis, dispersion, simulate
from .errors import (
    BranchAmbiguityError,
    CFLError,
    ConvergenceError,
    DomainError,
    FitError,
    InstabilityError,
    NoInteriorMaximumError,
    PositivityError,
    SingularDenominatorError,
)
from .model import ModelConfig

__all__ = ["main", "entry", "RunSpec", "emit"]

SWEEP_HEADER = ("h", "B", "theta", "n", "branch", "lambda_r", "lambda_i", "residual")
THETA_SCAN_HEADER = ("theta", "branch", "max_lambda_i")
VERIFY_SEED = 2718

_NUMERICAL_ERRORS = (ConvergenceError, FitError, InstabilityError,
                     PositivityError, NoInteriorMaximumError,
                     BranchAmbiguityError, SingularDenominatorError, CFLError)


@dataclass(frozen=True)
class RunSpec:
    """Full description of one CLI run; output is a pure function of this.

    No hidden state and no randomness without an explicit seed binding: the
    only stochastic subcommand (`verify`) carries its fixed seed here.
    """

    subcommand: str
    params: tuple          # sorted (key, value) bindings, lists as tuples
    out: str | None
    format: str

    def __getitem__(self, key):
        return dict(self.params)[key]


def _make_spec(subcommand: str, bindings: dict, out, fmt: str) -> RunSpec:
    frozen = {k: tuple(v) if isinstance(v, list) else v
              for k, v in bindings.items()}
    return RunSpec(subcommand=subcommand,
                   params=tuple(sorted(frozen.items())),
                   out=out, format=fmt)


class _CLIError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would sys.exit(2); we want exit 1
        raise _CLIError(message)


def _fmt(value) -> str:
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(int(value))
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def parse_angle(text: str) -> float:
    """Angle in radians; a trailing 'deg' marks degrees."""
    text = text.strip()
    try:
        if text.lower().endswith("deg"):
            return math.radians(float(text[:-3]))
        return float(text)
    except ValueError:
        raise _CLIError(f"invalid angle {text!r}") from None


def _parse_angle_list(text: str):
    return [parse_angle(tok) for tok in text.split(",") if tok.strip()]


def _parse_float_list(text: str):
    try:
        return [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise _CLIError(f"invalid number list {text!r}") from None


def _parse_range(text: str, log: bool, default_steps: int = 40) -> np.ndarray:
    parts = text.split(":")
    if len(parts) not in (2, 3):
        raise _CLIError(f"invalid range {text!r}: expected LO:HI[:STEPS]")
    try:
        lo, hi = float(parts[0]), float(parts[1])
        steps = int(parts[2]) if len(parts) == 3 else default_steps
    except ValueError:
        raise _CLIError(f"invalid range {text!r}") from None
    if steps < 2:
        raise _CLIError("range needs at least 2 steps")
    if log:
        if lo <= 0 or hi <= 0:
            raise _CLIError("log range requires positive bounds")
        return np.geomspace(lo, hi, steps)
    return np.linspace(lo, hi, steps)


def _read_config_file(path: str) -> dict:
    values = {}
    try:
        with open(path, encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, start=1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise _CLIError(f"{path}:{lineno}: expected key = value")
                key, _, value = line.partition("=")
                values[key.strip()] = value.strip()
    except (OSError, UnicodeDecodeError) as exc:
        raise _CLIError(f"cannot read config file {path}: {exc}") from None
    return values


def _merged(args, config: dict, key: str, default, cast=None):
    """Flag value if given, else config-file value, else default."""
    attr = key.replace("-", "_")
    value = getattr(args, attr, None)
    if value is not None:
        return value
    if key in config:
        raw = config[key]
        if cast is bool:
            return raw.lower() in ("1", "true", "yes", "on")
        return cast(raw) if cast else raw
    return default


def emit(rows, fmt: str, path, header=SWEEP_HEADER) -> None:
    """Write a table as CSV (17 significant digits) or JSON.

    Output is byte-identical for identical inputs: fixed header, fixed float
    formatting, newline-terminated rows, no locale dependence.
    """
    if fmt == "csv":
        lines = [",".join(header)]
        for row in rows:
            lines.append(",".join(_fmt(getattr(row, key)) for key in header))
        text = "\n".join(lines) + "\n"
    elif fmt == "json":
        records = [{key: getattr(row, key) for key in header} for row in rows]
        text = json.dumps(records, indent=1) + "\n"
    else:
        raise DomainError("format must be 'csv' or 'json'")
    if path is None:
        sys.stdout.write(text)
    elif hasattr(path, "write"):
        path.write(text)
    else:
        try:
            with open(path, "w", encoding="ascii", newline="\n") as fh:
                fh.write(text)
        except OSError as exc:
            raise DomainError(f"cannot write {path}: {exc}") from None


def _roots_rows(h: float, B: float, theta: float, n: int, policy: str):
    if h <= 0:
        raise DomainError("--h must be positive")
    if B <= -1:
        raise DomainError("--B must exceed -1")
    h_b = h * (1.0 + B)
    roots = dispersion.solve_roots(dispersion.assemble_polynomial(h_b, theta, n))
    selected = dispersion.select_branch(roots, h_b, theta, n, policy=policy)
    if policy == "acoustic":
        selected = [selected]
    return [analysis.SweepRow(h=h, B=B, theta=theta, n=n, branch=r.branch,
                              lambda_r=r.lam.real, lambda_i=r.lam.imag,
                              residual=r.residual)
            for r in selected]


def _cmd_roots(args, config) -> int:
    spec = _make_spec(
        "roots",
        {"h": _merged(args, config, "h", None, float),
         "B": _merged(args, config, "B", 0.0, float),
         "theta": _merged(args, config, "theta", None, parse_angle),
         "n": _merged(args, config, "n", 2, int),
         "branch": _merged(args, config, "branch", "acoustic", str)},
        _merged(args, config, "out", None, str),
        _merged(args, config, "format", "csv", str))
    if spec["h"] is None:
        raise DomainError("--h is required")
    if spec["theta"] is None:
        raise DomainError("--theta is required")
    if spec["branch"] not in ("acoustic", "all"):
        raise DomainError("--branch must be acoustic or all")
    rows = _roots_rows(spec["h"], spec["B"], spec["theta"], spec["n"],
                       spec["branch"])
    emit(rows, spec.format, spec.out)
    return 0


def _cmd_sweep(args, config) -> int:
    # the default grid is log-spaced; an explicit --h-range is linear
    # unless --log is passed
    default_log = _merged(args, config, "h-range", None, str) is None
    spec = _make_spec(
        "sweep",
        {"h-range": _merged(args, config, "h-range", "1e-2:1e2:40", str),
         "log": _merged(args, config, "log", default_log, bool),
         "theta": _merged(args, config, "theta", [0.0], _parse_angle_list),
         "B": _merged(args, config, "B", [0.0], _parse_float_list),
         "n": _merged(args, config, "n", 2, int),
         "branch": _merged(args, config, "branch", "acoustic", str)},
        _merged(args, config, "out", None, str),
        _merged(args, config, "format", "csv", str))
    h_grid = _parse_range(spec["h-range"], spec["log"])
    if np.any(h_grid <= 0):
        raise DomainError("--h-range must be positive")
    if any(b <= -1 for b in spec["B"]):
        raise DomainError("--B values must exceed -1")
    table = analysis.sweep(spec["theta"], spec["B"], h_grid, spec["n"],
                           branch_policy=spec["branch"])
    emit(table, spec.format, spec.out)
    return 0


def _cmd_hmax(args, config) -> int:
    spec = _make_spec(
        "hmax",
        {"theta": _merged(args, config, "theta", None, parse_angle),
         "B": _merged(args, config, "B", 0.0, float),
         "n": _merged(args, config, "n", 2, int),
         "branch": _merged(args, config, "branch", "acoustic", str),
         "h-range": _merged(args, config, "h-range", "1e-2:1e2", str)},
        None, "text")
    if spec["theta"] is None:
        raise DomainError("--theta is required")
    parts = spec["h-range"].split(":")
    try:
        lo, hi = float(parts[0]), float(parts[1])
    except (IndexError, ValueError):
        raise DomainError(f"invalid --h-range: {spec['h-range']!r}") from None
    peak = analysis.find_hmax(spec["theta"], spec["B"], n=spec["n"],
                              branch=spec["branch"], h_range=(lo, hi))
    sys.stdout.write(f"h_max = {_fmt(peak.h_max)}\n"
                     f"lambda_i_max = {_fmt(peak.lambda_i_max)}\n"
                     f"bracket = {_fmt(peak.bracket[0])} {_fmt(peak.bracket[1])}\n")
    return 0


def _cmd_theta_scan(args, config) -> int:
    spec = _make_spec(
        "theta-scan",
        {"B": _merged(args, config, "B", 0.0, float),
         "n": _merged(args, config, "n", 2, int),
         "h-cap": _merged(args, config, "h-cap", 10.0, float),
         "steps": _merged(args, config, "steps", 33, int)},
        _merged(args, config, "out", None, str),
        _merged(args, config, "format", "csv", str))
    if spec["steps"] < 3:
        raise DomainError("--steps must be >= 3")
    grid = np.linspace(0.0, math.pi / 2.0, spec["steps"])
    grid[np.argmin(np.abs(grid - math.pi / 4.0))] = math.pi / 4.0  # exact
    rows = analysis.theta_scan(spec["B"], spec["n"], spec["h-cap"], grid)
    emit(rows, spec.format, spec.out, header=THETA_SCAN_HEADER)
    return 0


def _cmd_simulate(args, config) -> int:
    spec = _make_spec(
        "simulate",
        {"h": _merged(args, config, "h", None, float),
         "B": _merged(args, config, "B", 0.0, float),
         "theta": _merged(args, config, "theta", None, parse_angle),
         "n": _merged(args, config, "n", 2, int),
         "ppw": _merged(args, config, "ppw", 40, int),
         "periods": _merged(args, config, "periods", 5, int),
         "wavelengths": _merged(args, config, "wavelengths", 12, int),
         "nonlinear": _merged(args, config, "nonlinear", False, bool),
         "eps": _merged(args, config, "eps", 1e-3, float),
         "stride": _merged(args, config, "stride", 1, int)},
        _merged(args, config, "out", None, str), "text")
    if spec["h"] is None:
        raise DomainError("--h is required")
    if spec["theta"] is None:
        raise DomainError("--theta is required")
    if spec["h"] <= 0:
        raise DomainError("--h must be positive")
    if spec["B"] <= -1:
        raise DomainError("--B must exceed -1")
    if spec["eps"] <= 0:
        raise DomainError("--eps must be positive")
    cfg = ModelConfig.from_reduced(n=spec["n"], theta=spec["theta"],
                                   h=spec["h"], B=spec["B"])
    series = simulate.run_forced(
        cfg, wavelengths=spec["wavelengths"], points_per_wavelength=spec["ppw"],
        periods=spec["periods"],
        mode="nonlinear" if spec["nonlinear"] else "linear", eps=spec["eps"])
    fit = simulate.fit_wave(series)
    root = dispersion.acoustic_root(spec["h"] * (1.0 + spec["B"]),
                                    cfg.theta, spec["n"])
    lam = fit.lambda_meas
    sys.stdout.write(
        f"k_r = {_fmt(fit.k_r)}\n"
        f"k_i = {_fmt(fit.k_i)}\n"
        f"lambda_meas = {_fmt(lam.real)} {_fmt(lam.imag)}\n"
        f"lambda_root = {_fmt(root.lam.real)} {_fmt(root.lam.imag)}\n"
        f"rms_residual = {_fmt(fit.rms_residual)}\n")
    if spec.out is not None:
        simulate.dump_snapshot(series[-1], spec.out, stride=spec["stride"])
    return 0


def _multiset_match(a, b, tol=1e-9) -> bool:
    if len(a) != len(b):
        return False
    a = sorted(a, key=lambda u: (u.real, u.imag))
    b = sorted(b, key=lambda u: (u.real, u.imag))
    return all(abs(x - y) <= tol * max(1.0, abs(y)) for x, y in zip(a, b))


def _verify_checks(seed: int = VERIFY_SEED):
    rng = np.random.default_rng(seed)

    def closed_form_oracle():
        for _ in range(1000):
            h_b = 10.0 ** rng.uniform(-3, 3)
            theta = rng.uniform(0.0, math.pi / 2.0)
            got = dispersion.solve_roots(
                dispersion.assemble_polynomial(h_b, theta, 2))
            want = dispersion.closed_form_n2(h_b, theta)
            if not _multiset_match(list(got), list(want)):
                return False
        return True

    def theta_pi4_identity():
        for B in (-0.5, 0.0, 0.5):
            for h in (0.1, 1.0, 10.0):
                root = dispersion.acoustic_root(h * (1.0 + B), math.pi / 4.0, 2)
                if abs(root.lam - 1.0) >= 1e-10:
                    return False
        return True

    def hydrodynamic_limit():
        for n in (2, 3, 4):
            for theta in np.linspace(0.0, math.pi / n, 5):
                root = dispersion.acoustic_root(1e6, float(theta), n)
                if abs(root.lam - 1.0) >= 1e-4:
                    return False
        return True

    def theta_symmetry():
        for n in (2, 3, 4):
            for theta in np.linspace(1e-3, math.pi / n - 1e-3, 10):
                h_b = 10.0 ** rng.uniform(-2, 2)
                base = list(dispersion.solve_roots(
                    dispersion.assemble_polynomial(h_b, float(theta), n)))
                for other in (theta + math.pi / n, math.pi / n - theta):
                    roots = list(dispersion.solve_roots(
                        dispersion.assemble_polynomial(h_b, float(other), n)))
                    if not _multiset_match(base, roots):
                        return False
        return True

    def hb_collapse():
        for theta in (0.0, 0.3, math.pi / 8):
            for (h, B) in ((0.7, 0.7), (2.0, -0.4), (5.0, 0.3)):
                r1 = _roots_rows(h, B, theta, 2, "acoustic")[0]
                r2 = _roots_rows(h * (1.0 + B), 0.0, theta, 2, "acoustic")[0]
                if (r1.lambda_r, r1.lambda_i) != (r2.lambda_r, r2.lambda_i):
                    return False
        return True

    def residual_contract():
        table = analysis.sweep([0.0, math.pi / 8, math.pi / 4], [0.0, 0.5],
                               np.geomspace(1e-2, 1e2, 25), 2,
                               branch_policy="all")
        return all(row.residual < 1e-9 for row in table)

    return [
        ("closed-form-oracle", closed_form_oracle),
        ("theta-pi4-identity", theta_pi4_identity),
        ("hydrodynamic-limit", hydrodynamic_limit),
        ("theta-symmetry", theta_symmetry),
        ("h-b-collapse", hb_collapse),
        ("residual-contract", residual_contract),
    ]


def _cmd_verify(args, config) -> int:
    spec = _make_spec("verify", {"seed": VERIFY_SEED}, None, "text")
    failures = 0
    for name, check in _verify_checks(spec["seed"]):
        ok = check()
        sys.stdout.write(f"{name}: {'PASS' if ok else 'FAIL'}\n")
        failures += 0 if ok else 1
    sys.stdout.write(f"{'all checks passed' if failures == 0 else f'{failures} check(s) failed'}\n")
    return 0 if failures == 0 else 2


def _build_parser() -> _Parser:
    parser = _Parser(prog="bosewave", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="subcommand")

    def add_common(p):
        p.add_argument("--config", default=None, help="flat key = value file")
        p.add_argument("--out", default=None, help="output file (default stdout)")
        p.add_argument("--format", default=None, choices=("csv", "json"))

    p = sub.add_parser("roots", help="dispersion roots at one parameter point")
    p.add_argument("--h", default=None)
    p.add_argument("--B", default=None)
    p.add_argument("--theta", default=None)
    p.add_argument("--n", default=None)
    p.add_argument("--branch", default=None, choices=("acoustic", "all"))
    add_common(p)

    p = sub.add_parser("sweep", help="dispersion/attenuation table over h")
    p.add_argument("--h-range", dest="h_range", default=None, metavar="LO:HI:STEPS")
    p.add_argument("--log", action="store_true", default=None)
    p.add_argument("--theta", default=None, help="comma-separated angles")
    p.add_argument("--B", default=None, help="comma-separated values")
    p.add_argument("--n", default=None)
    p.add_argument("--branch", default=None, choices=("acoustic", "all"))
    add_common(p)

    p = sub.add_parser("hmax", help="maximum-absorption state")
    p.add_argument("--theta", default=None)
    p.add_argument("--B", default=None)
    p.add_argument("--n", default=None)
    p.add_argument("--branch", default=None, choices=("acoustic", "secondary"))
    p.add_argument("--h-range", dest="h_range", default=None, metavar="LO:HI")
    p.add_argument("--config", default=None)

    p = sub.add_parser("theta-scan", help="max attenuation vs orientation")
    p.add_argument("--B", default=None)
    p.add_argument("--n", default=None)
    p.add_argument("--h-cap", dest="h_cap", default=None)
    p.add_argument("--steps", default=None)
    add_common(p)

    p = sub.add_parser("simulate", help="forced kinetic run + wave fit")
    p.add_argument("--h", default=None)
    p.add_argument("--B", default=None)
    p.add_argument("--theta", default=None)
    p.add_argument("--n", default=None)
    p.add_argument("--ppw", default=None)
    p.add_argument("--periods", default=None)
    p.add_argument("--wavelengths", default=None)
    p.add_argument("--nonlinear", action="store_true", default=None)
    p.add_argument("--eps", default=None)
    p.add_argument("--stride", default=None)
    p.add_argument("--config", default=None)
    p.add_argument("--out", default=None)

    p = sub.add_parser("verify", help="oracle cross-check suite")
    p.add_argument("--config", default=None)

    return parser


_COMMANDS = {
    "roots": _cmd_roots,
    "sweep": _cmd_sweep,
    "hmax": _cmd_hmax,
    "theta-scan": _cmd_theta_scan,
    "simulate": _cmd_simulate,
    "verify": _cmd_verify,
}

_CASTS = {
    "h": float, "B": None, "theta": None, "n": int, "ppw": int,
    "periods": int, "wavelengths": int, "eps": float, "stride": int,
    "steps": int, "h-cap": float, "h-range": str,
}


def _coerce_args(args) -> None:
    """Cast string-valued flags in place, naming the flag on failure."""
    for key, cast in _CASTS.items():
        attr = key.replace("-", "_")
        value = getattr(args, attr, None)
        if value is None or cast is None or not isinstance(value, str):
            continue
        try:
            setattr(args, attr, cast(value))
        except ValueError:
            raise DomainError(f"invalid value for --{key}: {value!r}") from None
    if getattr(args, "subcommand", None) in ("roots", "hmax", "simulate"):
        if isinstance(getattr(args, "theta", None), str):
            args.theta = parse_angle(args.theta)
        if isinstance(getattr(args, "B", None), str):
            try:
                args.B = float(args.B)
            except ValueError:
                raise DomainError(f"invalid value for --B: {args.B!r}") from None
    if getattr(args, "subcommand", None) == "sweep":
        if isinstance(getattr(args, "theta", None), str):
            args.theta = _parse_angle_list(args.theta)
        if isinstance(getattr(args, "B", None), str):
            args.B = _parse_float_list(args.B)
    if getattr(args, "subcommand", None) == "theta-scan":
        if isinstance(getattr(args, "B", None), str):
            try:
                args.B = float(args.B)
            except ValueError:
                raise DomainError(f"invalid value for --B: {args.B!r}") from None


def main(argv=None) -> int:
    """Run the CLI; returns the exit code (0 ok, 1 arguments, 2 numerical)."""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.subcommand is None:
            parser.print_help(sys.stderr)
            return 1
        config = {}
        if getattr(args, "config", None):
            config = _read_config_file(args.config)
        _coerce_args(args)
        return _COMMANDS[args.subcommand](args, config)
    except (_CLIError, DomainError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1
    except _NUMERICAL_ERRORS as exc:
        sys.stderr.write(f"numerical error: {exc}\n")
        return 2


def entry() -> None:
    sys.exit(main(sys.argv[1:]))
