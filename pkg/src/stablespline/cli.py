"""Command-line front end: ``simulate``, ``verify``, ``entropy``, ``estimate``.

Exit codes: 0 success, 1 invalid input or configuration, 2 a verification
check failed.  Configuration comes from flags and an optional JSON file
(``--config``); flags win.  Environment variables are ignored.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .entropy import entropy_rate_curve
from .grid import TimeGrid, make_grid, uniform_grid
from .kernels import KernelSpec, gram
from .processes import sample_stable_spline, sample_white, sample_wiener
from .sysid import EstimationConfig, IODataset, SearchGrid, estimate_impulse_response
from .verify import format_table, run_suite, SUITES

EXIT_OK, EXIT_INVALID, EXIT_VERIFY_FAILED = 0, 1, 2


class CliError(Exception):
    """Invalid input; reported on one line and mapped to exit code 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError(message)


def fmt(x: float) -> str:
    """17 significant digits: round-trips every double."""
    return format(float(x), ".17g")


def read_columns(path: str | Path, required: Sequence[str]) -> dict[str, np.ndarray]:
    """Read the named numeric columns of a headed CSV, rejecting blank or NaN cells."""
    path = Path(path)
    try:
        handle = path.open(newline="")
    except OSError as exc:
        raise CliError(f"{path}: cannot open ({exc.strerror})") from None
    with handle:
        reader = csv.reader(handle)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise CliError(f"{path}: empty file") from None
        missing = [c for c in required if c not in header]
        if missing:
            raise CliError(f"{path}:1: missing column(s) {', '.join(missing)}")
        idx = [header.index(c) for c in required]
        rows = []
        for row in reader:
            line = reader.line_num
            if not row or all(not cell.strip() for cell in row):
                raise CliError(f"{path}:{line}: empty row")
            try:
                values = [float(row[i]) for i in idx]
            except (IndexError, ValueError):
                raise CliError(f"{path}:{line}: malformed row {row!r}") from None
            if not all(math.isfinite(v) for v in values):
                raise CliError(f"{path}:{line}: non-finite value in {row!r}")
            rows.append(values)
    if not rows:
        raise CliError(f"{path}: no data rows")
    data = np.array(rows)
    return {name: data[:, k] for k, name in enumerate(required)}


def parse_grid(spec: str) -> TimeGrid:
    """``uniform:n,Ts`` | ``list:t0,t1,...`` (or a bare list) | ``csv:path``."""
    kind, _, rest = spec.partition(":")
    if not rest:
        kind, rest = "list", spec
    try:
        if kind == "uniform":
            n, ts = rest.split(",")
            return uniform_grid(int(n), float(ts))
        if kind == "list":
            return make_grid([float(v) for v in rest.split(",")])
        if kind == "csv":
            return make_grid(read_columns(rest, ["t"])["t"])
    except ValueError as exc:
        raise CliError(f"bad grid {spec!r}: {exc}") from None
    raise CliError(f"unknown grid kind {kind!r}; use uniform:, list: or csv:")


def parse_logspace(spec: str) -> tuple:
    """``lo,hi,num`` -> log-spaced tuple."""
    try:
        lo, hi, num = spec.split(",")
        lo, hi, num = float(lo), float(hi), int(num)
    except ValueError:
        raise CliError(f"bad search grid {spec!r}; expected lo,hi,num") from None
    if lo <= 0 or hi < lo or num < 1:
        raise CliError(f"bad search grid {spec!r}; need 0 < lo <= hi and num >= 1")
    return tuple(np.logspace(np.log10(lo), np.log10(hi), num))


def _positive(kind):
    def convert(text):
        try:
            value = kind(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"invalid value {text!r}") from None
        if not value > 0 or (kind is float and not math.isfinite(value)):
            raise argparse.ArgumentTypeError(f"must be positive, got {text!r}")
        return value
    return convert


def _seed(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid seed {text!r}") from None
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def write_csv(path: str | Path, header: Sequence[str] | None, rows) -> None:
    with Path(path).open("w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        if header is not None:
            writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])


def _svg_figure():
    import matplotlib

    matplotlib.use("Agg")
    matplotlib.rcParams["svg.hashsalt"] = "stablespline"
    import matplotlib.pyplot as plt

    return plt


def _save_svg(fig, path):
    fig.savefig(path, format="svg", metadata={"Date": None})


def cmd_simulate(args) -> int:
    grid = parse_grid(args.grid)
    if args.process == "white":
        paths = sample_white(grid, args.lam, args.seed, args.paths, args.workers)
        spec = KernelSpec.white(args.lam)
    elif args.process == "wiener":
        paths = sample_wiener(grid, args.lam, args.seed, args.paths, args.workers)
        spec = KernelSpec.wiener(args.lam)
    else:
        paths = sample_stable_spline(grid, args.beta, args.lam, args.seed, args.paths, args.workers)
        spec = KernelSpec.tc(args.beta, args.lam)
    header = ["t"] + [f"path_{k}" for k in range(paths.n_paths)]
    rows = ([t, *col] for t, col in zip(grid.times, paths.values.T))
    write_csv(args.out, header, rows)
    if args.emit_gram:
        write_csv(args.emit_gram, None, gram(spec, grid).entries)
    if args.svg:
        plt = _svg_figure()
        fig, ax = plt.subplots(figsize=(6, 3.5))
        ax.plot(grid.times, paths.values[: min(20, paths.n_paths)].T, lw=0.8)
        ax.set_xlabel("t")
        ax.set_title(f"{args.process} sample paths")
        _save_svg(fig, args.svg)
        plt.close(fig)
    print(f"wrote {paths.n_paths} {args.process} paths on {len(grid)} points to {args.out}")
    return EXIT_OK


def _curve_rows(reports, family):
    for r in reports:
        yield [family, r.n, r.joint_entropy, r.rate, r.reference_rate, r.log_increment_sum]


_CURVE_HEADER = ["family", "n", "joint_entropy", "rate", "reference_rate", "log_increment_sum"]


def cmd_verify(args) -> int:
    results = run_suite(args.suite, args.seed, args.paths)
    print(format_table(results))
    failed = [r for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} checks passed")
    if args.curves or args.svg:
        grid = uniform_grid(args.curve_n + 1, 1.0)
        curves = {
            "white": entropy_rate_curve(KernelSpec.white(args.lam), grid, args.curve_n),
            "wiener": entropy_rate_curve(KernelSpec.wiener(args.lam), grid, args.curve_n),
            "tc": entropy_rate_curve(KernelSpec.tc(args.beta, args.lam), grid, args.curve_n),
        }
        if args.curves:
            rows = [row for fam, reps in curves.items() for row in _curve_rows(reps, fam)]
            write_csv(args.curves, _CURVE_HEADER, rows)
        if args.svg:
            _plot_curves(curves, args.svg)
    return EXIT_VERIFY_FAILED if failed else EXIT_OK


def _plot_curves(curves, path):
    plt = _svg_figure()
    fig, ax = plt.subplots(figsize=(6, 3.5))
    for fam, reps in curves.items():
        ax.plot([r.n for r in reps], [r.rate for r in reps], label=fam)
    ax.set_xlabel("n")
    ax.set_ylabel("H_n / n  [nats]")
    ax.legend()
    _save_svg(fig, path)
    plt.close(fig)


def cmd_entropy(args) -> int:
    grid = parse_grid(args.grid)
    if args.kernel == "tc":
        spec = KernelSpec.tc(args.beta, args.lam)
    elif args.kernel == "wiener":
        spec = KernelSpec.wiener(args.lam)
    else:
        spec = KernelSpec.white(args.sigma2)
    reports = entropy_rate_curve(spec, grid, args.n_max)
    if args.out:
        write_csv(args.out, _CURVE_HEADER, _curve_rows(reports, args.kernel))
    if args.svg:
        _plot_curves({args.kernel: reports}, args.svg)
    last = reports[-1]
    print(f"kernel={args.kernel} n={last.n} joint_entropy={fmt(last.joint_entropy)} "
          f"rate={fmt(last.rate)} reference_rate={fmt(last.reference_rate)}")
    return EXIT_OK


def cmd_estimate(args) -> int:
    cols = read_columns(args.data, ["t", "u", "y"])
    try:
        data = IODataset.from_arrays(cols["t"], cols["u"], cols["y"])
    except ValueError as exc:
        raise CliError(f"{args.data}: {exc}") from None
    search = SearchGrid(
        beta=parse_logspace(args.beta_grid),
        lam=parse_logspace(args.lambda_grid),
        sigma2=parse_logspace(args.sigma2_grid),
    )
    result = estimate_impulse_response(data, EstimationConfig(m=args.m, search=search))
    rows = ([k, t, mu, sd] for k, (t, mu, sd) in
            enumerate(zip(result.lags, result.f_mean, result.f_std)))
    write_csv(args.out, ["k", "t", "f_mean", "f_std"], rows)
    diag_path = args.diagnostics or str(Path(args.out).with_suffix(".json"))
    diagnostics = dict(result.diagnostics)
    diagnostics["config"] = {
        "data": str(args.data),
        "m": len(result.f_mean),
        "beta_grid": args.beta_grid,
        "lambda_grid": args.lambda_grid,
        "sigma2_grid": args.sigma2_grid,
    }
    Path(diag_path).write_text(json.dumps(diagnostics, indent=2, sort_keys=True) + "\n")
    if args.svg:
        plt = _svg_figure()
        fig, ax = plt.subplots(figsize=(6, 3.5))
        ax.fill_between(result.lags, result.f_mean - 2 * result.f_std,
                        result.f_mean + 2 * result.f_std, alpha=0.3, label="±2 std")
        ax.plot(result.lags, result.f_mean, label="posterior mean")
        ax.set_xlabel("t")
        ax.legend()
        _save_svg(fig, args.svg)
        plt.close(fig)
    print(f"beta={fmt(result.beta)} lambda={fmt(result.lam)} sigma2={fmt(result.sigma2)} "
          f"log_evidence={fmt(result.log_evidence)}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="stablespline", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("--config", help="JSON file of flag defaults (flags override it)")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sim = sub.add_parser("simulate", help="sample process paths to CSV")
    sim.add_argument("--process", choices=["white", "wiener", "stable_spline"], default="wiener")
    sim.add_argument("--grid", default="uniform:10,1", help="uniform:n,Ts | list:t0,... | csv:path")
    sim.add_argument("--lambda", dest="lam", type=_positive(float), default=1.0)
    sim.add_argument("--beta", type=_positive(float), default=1.0)
    sim.add_argument("--paths", type=_positive(int), default=1000)
    sim.add_argument("--seed", type=_seed, default=0)
    sim.add_argument("--workers", type=_positive(int), default=1)
    sim.add_argument("--out", required=True)
    sim.add_argument("--emit-gram", help="also write the process covariance (Gram) CSV")
    sim.add_argument("--svg")
    sim.set_defaults(func=cmd_simulate)

    ver = sub.add_parser("verify", help="run the maximum-entropy property suite")
    ver.add_argument("--suite", choices=sorted(SUITES), default="all")
    ver.add_argument("--seed", type=_seed, default=0)
    ver.add_argument("--paths", type=_positive(int), default=None,
                     help="Monte Carlo paths (default: per-check sizes)")
    ver.add_argument("--curves", help="write entropy-rate curves CSV here")
    ver.add_argument("--curve-n", type=_positive(int), default=100)
    ver.add_argument("--lambda", dest="lam", type=_positive(float), default=1.0)
    ver.add_argument("--beta", type=_positive(float), default=0.1)
    ver.add_argument("--svg")
    ver.set_defaults(func=cmd_verify)

    ent = sub.add_parser("entropy", help="entropy-rate report for a kernel on a grid")
    ent.add_argument("--kernel", choices=["tc", "wiener", "white"], default="wiener")
    ent.add_argument("--grid", default="uniform:11,1")
    ent.add_argument("--lambda", dest="lam", type=_positive(float), default=1.0)
    ent.add_argument("--beta", type=_positive(float), default=1.0)
    ent.add_argument("--sigma2", type=_positive(float), default=1.0)
    ent.add_argument("--n-max", type=_positive(int), default=None)
    ent.add_argument("--out")
    ent.add_argument("--svg")
    ent.set_defaults(func=cmd_entropy)

    est = sub.add_parser("estimate", help="GP impulse-response estimate from t,u,y CSV")
    est.add_argument("--data", required=True)
    est.add_argument("--m", type=_positive(int), default=None)
    est.add_argument("--out", required=True)
    est.add_argument("--diagnostics", help="JSON path (default: --out with .json suffix)")
    est.add_argument("--beta-grid", default="0.05,2,20")
    est.add_argument("--lambda-grid", default="1e-4,1e2,15")
    est.add_argument("--sigma2-grid", default="1e-4,1e2,15")
    est.add_argument("--svg")
    est.set_defaults(func=cmd_estimate)
    return p


def _load_config(path: str, parser: argparse.ArgumentParser, command: str) -> dict:
    try:
        config = json.loads(Path(path).read_text())
    except OSError as exc:
        raise CliError(f"{path}: cannot read config ({exc.strerror})") from None
    except json.JSONDecodeError as exc:
        raise CliError(f"{path}:{exc.lineno}: invalid JSON ({exc.msg})") from None
    if not isinstance(config, dict):
        raise CliError(f"{path}: config must be a JSON object")
    sub = parser._subparsers._group_actions[0].choices[command]
    known = {a.dest: a for a in sub._actions if a.dest != "help"}
    out = {}
    for key, value in config.items():
        dest = {"lambda": "lam"}.get(key, key.replace("-", "_"))
        if dest not in known or dest == "func":
            raise CliError(f"{path}: unknown option {key!r} for {command}")
        action = known[dest]
        if action.type is not None and value is not None:
            try:
                value = action.type(str(value))
            except argparse.ArgumentTypeError as exc:
                raise CliError(f"{path}: {key}: {exc}") from None
        if action.choices is not None and value not in action.choices:
            raise CliError(f"{path}: {key}: must be one of {sorted(action.choices)}")
        out[dest] = value
    return out


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.config:
            defaults = _load_config(args.config, parser, args.command)
            sub = parser._subparsers._group_actions[0].choices[args.command]
            sub.set_defaults(**defaults)
            args = parser.parse_args(argv)
        return args.func(args)
    except (CliError, ValueError) as exc:
        print(f"stablespline: error: {exc}", file=sys.stderr)
        return EXIT_INVALID


def main() -> None:
    sys.exit(run())
