"""Command-line entry point: ``mqsdeco <subcommand> [options]``.

Every option can also come from a JSON object passed with ``--config``;
explicit flags win over the file. CSV goes to ``--out`` or stdout. On
failure a JSON object ``{"error": ..., "message": ...}`` is written to
stderr and the exit status is 2 (bad input or truncation) or 3 (an
internal cross-check failed).
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import experiments as ex
from .errors import (
    DegenerateStateError,
    InvalidStateError,
    OracleMismatchError,
    TruncationError,
)
from .fock import TruncationPolicy

EXIT_INPUT = 2
EXIT_ORACLE = 3

DEFAULTS = {
    "alpha": 3.0,
    "phi": None,  # pi/2 for cats, 0 for the amplifier
    "g": [0.8],
    "k": [0],
    "R": [0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9],
    "T": [1.0, 0.9, 0.5, 0.2],
    "basis": "equatorial",
    "epsilon_tail": 1e-12,
    "n_cap": 256,
    "oracle_tol": 1e-6,
    "drop_budget": 1e-9,
    "workers": 1,
    "seed": 0,
    "out": None,
    "input": None,
    "x_column": "x",
    "d_column": "D",
}


class ConfigError(ValueError):
    pass


class _JsonErrorParser(argparse.ArgumentParser):
    # usage errors follow the same JSON-on-stderr contract as runtime errors
    def error(self, message):
        sys.stderr.write(json.dumps({"error": "UsageError", "message": f"{self.prog}: {message}"}) + "\n")
        sys.exit(EXIT_INPUT)


def parse_grid(text) -> list[float]:
    """``"0.1,0.2"`` or ``"linspace:start:stop:num"``; lists pass through."""
    if isinstance(text, (list, tuple)):
        return [float(v) for v in text]
    if isinstance(text, (int, float)):
        return [float(text)]
    text = str(text).strip()
    if text.startswith("linspace:"):
        try:
            _, start, stop, num = text.split(":")
            return [float(v) for v in np.linspace(float(start), float(stop), int(num))]
        except ValueError as exc:
            raise ConfigError(f"bad linspace grid {text!r}") from exc
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad grid {text!r}") from exc


def _common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="JSON file with option values")
    p.add_argument("--out", help="CSV output path (default: stdout)")
    p.add_argument("--epsilon-tail", dest="epsilon_tail", type=float)
    p.add_argument("--n-cap", dest="n_cap", type=int)
    p.add_argument("--seed", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = _JsonErrorParser(prog="mqsdeco", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("universal-curve", help="cat visibility, closed form vs numeric")
    _common(p)
    p.add_argument("--alpha", type=float)
    p.add_argument("--phi", type=float)
    p.add_argument("--R", help="reflectivity grid")
    p.add_argument("--oracle-tol", dest="oracle_tol", type=float)
    p.add_argument("--workers", type=int)

    p = sub.add_parser("cat-dist", help="photon-number distributions of the lossy even cat")
    _common(p)
    p.add_argument("--alpha", type=float)
    p.add_argument("--phi", type=float)
    p.add_argument("--R", help="reflectivity grid")

    p = sub.add_parser("qiopa-dist", help="joint distributions of an amplified qubit after loss")
    _common(p)
    p.add_argument("--g", type=float)
    p.add_argument("--T", help="transmittivity grid")
    p.add_argument("--basis", choices=["equatorial", "HV"])
    p.add_argument("--phi", type=float)

    p = sub.add_parser("qiopa-vis", help="macrostate visibility curves")
    _common(p)
    p.add_argument("--g", help="comma-separated gains")
    p.add_argument("--R", help="reflectivity grid")
    p.add_argument("--workers", type=int)

    p = sub.add_parser("ofilter-vis", help="filtered macrostate visibility")
    _common(p)
    p.add_argument("--g", type=float)
    p.add_argument("--k", help="comma-separated thresholds")
    p.add_argument("--R", help="reflectivity grid")
    p.add_argument("--drop-budget", dest="drop_budget", type=float)

    p = sub.add_parser("diagnostics", help="slope and inflection report for a curve CSV")
    p.add_argument("--config", help="JSON file with option values")
    p.add_argument("--input", help="curve CSV produced by another subcommand")
    p.add_argument("--x-column", dest="x_column")
    p.add_argument("--d-column", dest="d_column")
    p.add_argument("--out", help="JSON report path (default: stdout)")
    return parser


def resolve(args: argparse.Namespace) -> dict:
    """Merge explicit flags over the ``--config`` file over built-in defaults."""
    opts = dict(DEFAULTS)
    if args.config:
        try:
            with open(args.config) as fh:
                loaded = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config!r}: {exc}") from exc
        if not isinstance(loaded, dict):
            raise ConfigError("config file must hold a JSON object")
        unknown = set(loaded) - set(DEFAULTS)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        opts.update(loaded)
    for key, value in vars(args).items():
        if value is not None and key in DEFAULTS:
            opts[key] = value
    return opts


def _policy(o: dict) -> TruncationPolicy:
    return TruncationPolicy(float(o["epsilon_tail"]), int(o["n_cap"]))


def run(args: argparse.Namespace, o: dict) -> str:
    cmd = args.command
    cat_phi = math.pi / 2 if o["phi"] is None else float(o["phi"])
    if cmd == "universal-curve":
        cfg = ex.SweepConfig(
            family="cat",
            R=parse_grid(o["R"]),
            alpha=float(o["alpha"]),
            phi=cat_phi,
            truncation=_policy(o),
            seed=int(o["seed"]),
            oracle_tol=float(o["oracle_tol"]),
            workers=int(o["workers"]),
        )
        rows = ex.run_universal_curve(cfg)
        return ex.write_csv(rows, ex.HEADERS[cmd], o["out"])
    if cmd == "cat-dist":
        grid = ex.SweepConfig(family="cat", R=parse_grid(o["R"])).R
        rows = ex.run_cat_distributions(float(o["alpha"]), grid, cat_phi, _policy(o))
        return ex.write_csv(rows, ex.HEADERS["distribution"], o["out"])
    if cmd == "qiopa-dist":
        g = parse_grid(o["g"])
        if len(g) != 1:
            raise ConfigError("qiopa-dist takes a single gain")
        T = ex.SweepConfig(family="qiopa", R=parse_grid(o["T"])).R
        phi = 0.0 if o["phi"] is None else float(o["phi"])
        rows = ex.run_qiopa_distributions(g[0], T, o["basis"], phi, _policy(o))
        return ex.write_csv(rows, ex.HEADERS["distribution"], o["out"])
    if cmd == "qiopa-vis":
        cfg = ex.SweepConfig(family="qiopa", R=parse_grid(o["R"]), g=parse_grid(o["g"]), workers=int(o["workers"]))
        rows = ex.run_qiopa_visibility(cfg.g, cfg.R, _policy(o), cfg.workers)
        return ex.write_csv(rows, ex.HEADERS[cmd], o["out"])
    if cmd == "ofilter-vis":
        g = parse_grid(o["g"])
        if len(g) != 1:
            raise ConfigError("ofilter-vis takes a single gain")
        cfg = ex.SweepConfig(family="qiopa_filtered", R=parse_grid(o["R"]), g=g, k=[int(v) for v in parse_grid(o["k"])])
        rows = ex.run_ofilter_visibility(cfg.g[0], cfg.k, cfg.R, _policy(o), float(o["drop_budget"]))
        return ex.write_csv(rows, ex.HEADERS[cmd], o["out"])
    if cmd == "diagnostics":
        if not o["input"]:
            raise ConfigError("diagnostics needs --input")
        try:
            curves = ex.read_curves_csv(o["input"], o["x_column"], o["d_column"])
        except (OSError, KeyError, ValueError) as exc:
            raise ConfigError(f"cannot read curve from {o['input']!r}: {exc}") from exc
        report = [{"group": group, **ex.slope_diagnostics(x, d)} for group, x, d in curves]
        text = json.dumps({"curves": report}, indent=2) + "\n"
        if o["out"]:
            with open(o["out"], "w") as fh:
                fh.write(text)
        return text
    raise ConfigError(f"unknown command {cmd!r}")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        opts = resolve(args)
        text = run(args, opts)
    except OracleMismatchError as exc:
        _report(exc)
        return EXIT_ORACLE
    except (ValueError, TruncationError, InvalidStateError, DegenerateStateError) as exc:
        _report(exc)
        return EXIT_INPUT
    if not opts["out"]:
        sys.stdout.write(text)
    return 0


def _report(exc: Exception):
    sys.stderr.write(json.dumps({"error": type(exc).__name__, "message": str(exc)}) + "\n")


if __name__ == "__main__":
    sys.exit(main())
