"""Command-line front end.

Subcommands: ``verify``, ``bracket``, ``spectrum``, ``dirac``. Exit codes:
0 pass, 1 failed check, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import export
from .expr import (
    DomainError,
    ExprSyntaxError,
    NotPolynomialError,
    UnknownIdentifierError,
    evaluate,
    parse,
    to_string,
    variables,
)
from .poisson import ChartMismatchError, bracket, load_bivector
from .quantize import (
    ActionAngleSpace,
    QuantizationParams,
    UnsupportedObservableError,
    dirac_convergence,
    dirac_residual,
    hamiltonian_operator,
    spectrum,
)
from .so3 import So3Model
from .verify import run_verification

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

DEFAULTS = {
    "lambda": [0.0],
    "kmax": 5,
    "grid_n": 201,
    "grid_l": 10.0,
    "inertia": 1.0,
    "seed": 42,
    "out": None,
    "format": "json",
    "pretty": False,
}


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    lambdas: list[float] = field(default_factory=lambda: [0.0])
    kmax: int = 5
    grid_n: int = 201
    grid_l: float = 10.0
    inertia: float = 1.0
    seed: int = 42
    out: str | None = None
    format: str = "json"
    pretty: bool = False

    def validate(self):
        if self.kmax < 1:
            raise ConfigError(f"--kmax must be >= 1, got {self.kmax}")
        if self.grid_n < 3 or self.grid_n % 2 == 0:
            raise ConfigError(f"--grid-n must be odd and >= 3, got {self.grid_n}")
        if not self.grid_l > 0:
            raise ConfigError(f"--grid-l must be positive, got {self.grid_l}")
        if not self.inertia > 0:
            raise ConfigError(f"--inertia must be positive, got {self.inertia}")
        if self.format not in ("json", "csv"):
            raise ConfigError(f"--format must be json or csv, got {self.format!r}")
        if len(self.lambdas) != 1:
            raise ConfigError("the so(3) model has one periodic angle; give exactly one --lambda value")
        return self


def _float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file supplying any flag (flags override it)")
    common.add_argument("--lambda", dest="lambda_", type=_float_list, default=None, metavar="F,...")
    common.add_argument("--kmax", type=int, default=None)
    common.add_argument("--grid-n", type=int, default=None)
    common.add_argument("--grid-l", type=float, default=None)
    common.add_argument("--inertia", type=float, default=None)
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--out", default=None, help="output path (default: stdout)")
    common.add_argument("--format", choices=["json", "csv"], default=None)
    common.add_argument("--pretty", action="store_true", default=None)

    parser = argparse.ArgumentParser(prog="ncquant", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("verify", parents=[common], help="run the full check battery")

    p = sub.add_parser("bracket", parents=[common], help="Poisson bracket of two expressions")
    p.add_argument("f")
    p.add_argument("g")
    p.add_argument(
        "--structure",
        default="so3-liepoisson",
        help="so3-liepoisson, so3-aa, or a path to a bivector JSON document",
    )
    p.add_argument("--at", action="append", default=[], metavar="x=v,...", help="evaluation point (repeatable)")
    p.add_argument("--samples", type=int, default=3, help="random sample points when no --at is given")

    p = sub.add_parser("spectrum", parents=[common], help="spectrum of a polynomial in the actions r, x1")
    p.add_argument("--hamiltonian", "-H", default="0.5*I*r^2")

    p = sub.add_parser("dirac", parents=[common], help="commutator/bracket residuals on a grid ladder")
    p.add_argument("f")
    p.add_argument("g")
    p.add_argument("--ladder", type=_int_list, default=[51, 101, 201])
    p.add_argument(
        "--space",
        choices=["cylinder", "so3"],
        default="cylinder",
        help="cylinder: actions J, p with angles alpha (periodic), q; so3: r, x1 with alpha, gamma",
    )
    return parser


def resolve_config(args) -> RunConfig:
    merged = dict(DEFAULTS)
    if args.config:
        try:
            data = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config file: {exc}")
        for key, value in data.items():
            key = key.replace("-", "_")
            if key not in merged:
                raise ConfigError(f"unknown config key {key!r}")
            merged[key] = value
    flags = {
        "lambda": args.lambda_,
        "kmax": args.kmax,
        "grid_n": args.grid_n,
        "grid_l": args.grid_l,
        "inertia": args.inertia,
        "seed": args.seed,
        "out": args.out,
        "format": args.format,
        "pretty": args.pretty,
    }
    merged.update({k: v for k, v in flags.items() if v is not None})
    lam = merged["lambda"]
    if isinstance(lam, (int, float)):
        lam = [lam]
    elif isinstance(lam, str):
        lam = _float_list(lam)
    try:
        cfg = RunConfig(
            lambdas=[float(v) for v in lam],
            kmax=int(merged["kmax"]),
            grid_n=int(merged["grid_n"]),
            grid_l=float(merged["grid_l"]),
            inertia=float(merged["inertia"]),
            seed=int(merged["seed"]),
            out=merged["out"],
            format=str(merged["format"]),
            pretty=bool(merged["pretty"]),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc))
    return cfg.validate()


def _emit(cfg: RunConfig, text: str):
    export.write_text(text, cfg.out)


# ---------------------------------------------------------------- commands


def cmd_verify(cfg: RunConfig) -> int:
    checks = run_verification(cfg.lambdas, cfg.kmax, cfg.grid_n, cfg.grid_l, cfg.inertia, cfg.seed)
    report = {name: c.to_json() for name, c in checks.items()}
    all_pass = all(c.passed for c in checks.values())
    if cfg.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["check", "pass", "residual", "tolerance"])
        for name, c in checks.items():
            w.writerow([name, c.passed, repr(float(c.residual)), repr(float(c.tolerance))])
        _emit(cfg, buf.getvalue())
    else:
        _emit(cfg, export.dumps(report, cfg.pretty))
    return EXIT_OK if all_pass else EXIT_FAIL


def _parse_point(text: str) -> dict[str, float]:
    point = {}
    for item in text.split(","):
        if not item.strip():
            continue
        name, _, value = item.partition("=")
        if not _:
            raise ConfigError(f"bad point {text!r}; expected name=value,...")
        point[name.strip()] = float(value)
    return point


def cmd_bracket(cfg: RunConfig, args) -> int:
    model = So3Model.build(cfg.inertia)
    if args.structure == "so3-liepoisson":
        W = model.lie_poisson
    elif args.structure == "so3-aa":
        W = model.aa_bivector
    else:
        try:
            W = load_bivector(Path(args.structure))
        except (OSError, KeyError, ValueError) as exc:
            raise ConfigError(f"cannot load bivector {args.structure!r}: {exc}")
    f = parse(args.f, W.chart)
    g = parse(args.g, W.chart)
    b = bracket(f, g, W)
    if args.at:
        points = [_parse_point(s) for s in args.at]
    elif args.structure == "so3-aa":
        points = model.random_chart_points(np.random.default_rng(cfg.seed), args.samples)
    else:
        rng = np.random.default_rng(cfg.seed)
        points = [{x: float(rng.uniform(-2, 2)) for x in W.chart.names} for _ in range(args.samples)]
    values = []
    for p in points:
        missing = variables(b) - set(p)
        if missing:
            raise ConfigError(f"point {p} does not assign {sorted(missing)}")
        values.append({"point": p, "value": evaluate(b, p)})
    doc = {"f": args.f, "g": args.g, "structure": args.structure, "bracket": to_string(b), "values": values}
    if cfg.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        names = list(W.chart.names)
        w.writerow(names + ["value"])
        for v in values:
            w.writerow([repr(float(v["point"].get(n, float("nan")))) for n in names] + [repr(float(v["value"]))])
        _emit(cfg, f"# {{f,g}} = {to_string(b)}\n" + buf.getvalue())
    elif cfg.pretty:
        lines = [f"{{{args.f}, {args.g}}} = {to_string(b)}"]
        for v in values:
            pt = ", ".join(f"{k}={val:g}" for k, val in v["point"].items())
            lines.append(f"  at ({pt}): {v['value']:.12g}")
        _emit(cfg, "\n".join(lines) + "\n")
    else:
        _emit(cfg, export.dumps(doc))
    return EXIT_OK


def cmd_spectrum(cfg: RunConfig, args) -> int:
    model = So3Model.build(cfg.inertia)
    H = parse(args.hamiltonian, {"r", "x1", "I"}, {"I": cfg.inertia})
    if "x1" in variables(H):
        space = model.action_angle_space()
        params = QuantizationParams(space, tuple(cfg.lambdas), cfg.kmax, ((cfg.grid_l, cfg.grid_n),))
    else:
        space = ActionAngleSpace.canonical(periodic=[("r", "alpha")])
        params = QuantizationParams(space, tuple(cfg.lambdas), cfg.kmax)
    op = hamiltonian_operator(H, params, description=args.hamiltonian)
    levels = spectrum(op)

    def global_mult(x):
        return next((m for v, m in levels if abs(x - v) <= 1e-9), 0)

    # basis is mode-major, so each Fourier mode k owns a contiguous block
    block = int(np.prod(params.grid_shape, dtype=int))
    dense = None if op.is_diagonal() else op.dense()
    rows = []
    for i, k in enumerate(range(-cfg.kmax, cfg.kmax + 1)):
        sl = slice(i * block, (i + 1) * block)
        if dense is None:
            vals = sorted(set(op.matrix.diagonal().real[sl]))
        else:
            vals = list(np.linalg.eigvalsh(dense[sl, sl]))
        rows.extend({"k": k, "value": float(v), "mult": global_mult(float(v))} for v in vals)
    if cfg.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["k", "eigenvalue", "multiplicity"])
        for row in rows:
            w.writerow([row["k"], repr(row["value"]), row["mult"]])
        _emit(cfg, buf.getvalue())
    else:
        doc = export.spectrum_document(op, levels, args.hamiltonian)
        doc["modes"] = rows
        _emit(cfg, export.dumps(doc, cfg.pretty))
    return EXIT_OK


def cmd_dirac(cfg: RunConfig, args) -> int:
    if args.space == "so3":
        space = So3Model.build(cfg.inertia).action_angle_space()
    else:
        space = ActionAngleSpace.canonical(periodic=[("J", "alpha")], noncompact=[("p", "q")])
    for n in args.ladder:
        if n < 3 or n % 2 == 0:
            raise ConfigError(f"ladder sizes must be odd and >= 3, got {n}")
    params = QuantizationParams(space, tuple(cfg.lambdas), cfg.kmax, ((cfg.grid_l, args.ladder[-1]),))
    conv = dirac_convergence(args.f, args.g, params, tuple(args.ladder))
    op_norms = [
        dirac_residual(args.f, args.g, params.replace(grid=((cfg.grid_l, n),))) for n in args.ladder
    ]
    passed = conv.passed(1.8)
    doc = {
        "f": args.f,
        "g": args.g,
        "space": args.space,
        "ladder": list(conv.grid_n),
        "spacing": list(conv.spacings),
        "residual": list(conv.residuals),
        "operator_norm": op_norms,
        "order": conv.order,
        "exact": conv.exact,
        "pass": passed,
    }
    if cfg.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["N", "h", "residual", "operator_norm"])
        for n, h, r, o in zip(conv.grid_n, conv.spacings, conv.residuals, op_norms):
            w.writerow([n, repr(h), repr(r), repr(o)])
        _emit(cfg, buf.getvalue())
    else:
        _emit(cfg, export.dumps(doc, cfg.pretty))
    return EXIT_OK if passed else EXIT_FAIL


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_USAGE
    try:
        cfg = resolve_config(args)
        if args.command == "verify":
            return cmd_verify(cfg)
        if args.command == "bracket":
            return cmd_bracket(cfg, args)
        if args.command == "spectrum":
            return cmd_spectrum(cfg, args)
        return cmd_dirac(cfg, args)
    except (
        ConfigError,
        ExprSyntaxError,
        UnknownIdentifierError,
        ChartMismatchError,
        DomainError,
        NotPolynomialError,
        UnsupportedObservableError,
    ) as exc:
        print(f"ncquant: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
