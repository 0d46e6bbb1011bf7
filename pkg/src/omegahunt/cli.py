"""Command-line interface.

Subcommands: sieve, count, delta, circle, scan, kernel, resonator,
resonance, extremal, hunt.  Every run writes its result to stdout (or
--out FILE) through the deterministic serializers and emits exactly one
run manifest as a JSON line on stderr (also to --manifest FILE when
given).  Exit codes: 0 success, 1 validated runtime error, 2 usage error.

An optional JSON config file (--config) supplies defaults per option name;
explicit flags win.  Numeric positions (--x, --y) are parsed as exact
decimals, so floors near integers are decided exactly.
"""

from __future__ import annotations

import argparse
import math
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .errors import DomainError, OmegaHuntError


class UsageError(Exception):
    """A required option is missing after config-default resolution."""
from .error_terms import delta_exact, p_exact, residual_scan, voronoi_delta, voronoi_p
from .extremal import count_below, exponent_fit, sum_table
from .hunter import WitnessStore, hunt
from .kernel import SectorialKernel, choose_alpha, sector_check
from .resonator import FrequencySet, expand
from .serialize import canonical_json, content_hash, emit_csv, emit_json, file_sha256
from .sieve import WEIGHT_SPECS, build_table, count_weighted, to_fraction
from .verifier import (
    ResonanceInstance,
    TargetSum,
    circle_target,
    divisor_target,
    random_instance,
    resonant_positions_by_weight,
    verify_proposition,
)


@dataclass
class RunManifest:
    """One per CLI run: what ran, against which inputs, producing what."""

    command: list
    config_hash: str
    version: str = __version__
    started: str = ""
    finished: str = ""
    inputs: dict = field(default_factory=dict)
    outputs: dict = field(default_factory=dict)

    def emit(self, stream, extra_path: Optional[str] = None) -> None:
        payload = {
            "command": self.command,
            "config_hash": self.config_hash,
            "version": self.version,
            "started": self.started,
            "finished": self.finished,
            "inputs": self.inputs,
            "outputs": self.outputs,
        }
        line = canonical_json(payload)
        print(line, file=stream)
        if extra_path:
            Path(extra_path).write_text(line + "\n", encoding="utf-8")


def _utc_now() -> str:
    return time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())


def _write_output(data: bytes, out_path: Optional[str], manifest: RunManifest) -> None:
    if out_path:
        Path(out_path).write_bytes(data)
        manifest.outputs[out_path] = file_sha256(out_path)
    else:
        sys.stdout.buffer.write(data)
        sys.stdout.buffer.flush()
        import hashlib

        manifest.outputs["stdout"] = hashlib.sha256(data).hexdigest()


def _register_input(path: Optional[str], manifest: RunManifest) -> None:
    if path and Path(path).exists():
        manifest.inputs[path] = file_sha256(path)


def _parse_exact(text: str) -> Fraction:
    try:
        return to_fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise DomainError(f"not an exact number: {text!r}") from exc


def _parse_frequency(text: str):
    text = text.strip()
    if "/" in text:
        return Fraction(text)
    try:
        return Fraction(text)  # integers and exact decimals stay exact
    except ValueError:
        return float(text)


# ---------------------------------------------------------------- commands


def cmd_sieve(args, manifest):
    table = build_table(args.limit)
    rows = (
        (int(n), int(table.d[n]), int(table.r[n]))
        for n in range(1, table.limit + 1)
    )
    _write_output(emit_csv(("n", "d", "r"), rows), args.out, manifest)
    return 0


def cmd_count(args, manifest):
    if args.x is None:
        raise UsageError("count requires --x")
    spec = WEIGHT_SPECS[args.kind]
    table = build_table(args.limit)
    value = count_weighted(spec, _parse_exact(args.x), table)
    _write_output(emit_json({"kind": args.kind, "x": args.x, "count": value}), args.out, manifest)
    return 0


def _error_term_command(kind, args, manifest):
    if args.x is None:
        raise UsageError(f"{kind} requires --x (flag or config)")
    exact_fn = delta_exact if kind == "divisor" else p_exact
    if args.voronoi:
        if args.terms is None:
            raise DomainError("--voronoi requires --terms N")
        table = build_table(max(args.terms, 1))
        x = float(_parse_exact(args.x))
        fn = voronoi_delta if kind == "divisor" else voronoi_p
        value = fn(x, args.terms, table)
    else:
        value = exact_fn(_parse_exact(args.x))
    # a bare float is still a valid single JSON document
    _write_output(emit_json(value), args.out, manifest)
    return 0


def cmd_delta(args, manifest):
    return _error_term_command("divisor", args, manifest)


def cmd_circle(args, manifest):
    return _error_term_command("circle", args, manifest)


def cmd_scan(args, manifest):
    _register_input(args.samples, manifest)
    xs = []
    with open(args.samples, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.split(",")[0].strip()
            if not line or line.lower() == "x":
                continue
            xs.append(float(line))
    table = build_table(args.terms)
    result = residual_scan(args.kind, xs, args.terms, table)
    payload = {
        "kind": args.kind,
        "terms": args.terms,
        "max_abs_residual": result.max_abs_residual,
        "max_scaled_residual": result.max_scaled_residual,
        "samples": [
            {
                "x": s.x,
                "exact": s.exact_value,
                "series": s.series_value,
                "residual": s.residual,
            }
            for s in result.samples
        ],
    }
    _write_output(emit_json(payload), args.out, manifest)
    return 0


def cmd_kernel(args, manifest):
    if args.action != "check":
        raise DomainError(f"unknown kernel action {args.action!r}")
    alpha = args.alpha if args.alpha is not None else choose_alpha(args.beta, args.delta)
    kernel = SectorialKernel(alpha=alpha, beta=args.beta, delta=args.delta)
    grid = np.linspace(args.grid_min, args.grid_max, args.points)
    report = sector_check(kernel, grid)
    payload = {
        "alpha": kernel.alpha,
        "beta": kernel.beta,
        "delta": kernel.delta,
        "matched": kernel.matched,
        "min_margin": report.min_margin,
        "min_real": report.min_real,
        "pass": report.passed,
        "grid_size": report.grid_size,
    }
    _write_output(emit_json(payload), args.out, manifest)
    return 0


def cmd_resonator(args, manifest):
    if args.action != "expand":
        raise DomainError(f"unknown resonator action {args.action!r}")
    _register_input(args.freqs, manifest)
    freqs = []
    with open(args.freqs, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                freqs.append(_parse_frequency(line))
    fs = FrequencySet(frequencies=tuple(freqs), r=float(args.r))
    exp = expand(fs, args.degree, merge_tol=args.merge_tol)
    rows = (
        (float(k), float(c), int(dep))
        for k, c, dep in zip(exp.keys, exp.coeffs, exp.max_depths)
    )
    _write_output(emit_csv(("value", "coefficient", "max_degree"), rows), args.out, manifest)
    return 0


def _instance_from_config(cfg: dict) -> ResonanceInstance:
    kind = cfg.get("kind", "custom")
    if kind in ("divisor", "circle"):
        n_terms = int(cfg.get("n_terms", 50))
        table = build_table(max(n_terms, 1))
        target = (divisor_target if kind == "divisor" else circle_target)(n_terms, table)
    else:
        rows = cfg["support"]
        target = TargetSum(
            indices=tuple(int(r[0]) for r in rows),
            weights=tuple(float(r[1]) for r in rows),
            frequencies=tuple(_parse_frequency(str(r[2])) for r in rows),
        )
    if "resonant" in cfg:
        resonant = tuple(int(i) for i in cfg["resonant"])
    else:
        resonant = resonant_positions_by_weight(target, int(cfg.get("resonant_count", 3)))
    kernel = SectorialKernel.for_angle(float(cfg["beta"]), float(cfg["delta"]))
    return ResonanceInstance(
        target=target,
        resonant=resonant,
        kernel=kernel,
        r=float(cfg.get("r", 1.0 / 3.0)),
        T=float(cfg.get("T", 10.0)),
    )


def _report_payload(rep) -> dict:
    payload = {
        "I1": rep.I1,
        "I2": rep.I2,
        "rhs": rep.rhs,
        "margin": rep.margin,
        "J1_bound": rep.j1_bound,
        "quadrature_error_estimate": rep.quadrature_error_estimate,
        "pass": rep.passed,
        "sector_min_margin": rep.sector.min_margin,
    }
    if rep.spectral_i1 is not None:
        payload.update(
            spectral_I1=rep.spectral_i1,
            spectral_I2=rep.spectral_i2,
            spectral_slack_I1=rep.spectral_slack_i1,
            spectral_slack_I2=rep.spectral_slack_i2,
        )
    return payload


def cmd_resonance(args, manifest):
    if args.action != "verify":
        raise DomainError(f"unknown resonance action {args.action!r}")
    if args.random is not None:
        rng = np.random.default_rng(args.seed)
        reports = []
        for _ in range(args.random):
            inst = random_instance(rng)
            reports.append(_report_payload(verify_proposition(inst, spectral=args.spectral)))
        payload = {"instances": reports, "all_pass": all(r["pass"] for r in reports)}
    elif args.instance is not None:
        import json

        _register_input(args.instance, manifest)
        cfg = json.loads(Path(args.instance).read_text(encoding="utf-8"))
        inst = _instance_from_config(cfg)
        payload = _report_payload(verify_proposition(inst, spectral=args.spectral))
    else:
        raise UsageError("resonance verify needs --config FILE or --random K")
    _write_output(emit_json(payload), args.out, manifest)
    return 0


def cmd_extremal(args, manifest):
    table = build_table(args.limit)
    if args.action == "sum":
        if args.m is None:
            raise UsageError("extremal sum requires --m")
        st = sum_table(args.kind, [args.m], table, strict=args.strict)
        M, value, n_M, y_M = st.entries[0]
        payload = {
            "kind": args.kind,
            "M": M,
            "sum": value,
            "n_M": n_M,
            "y_M": y_M,
            "certified": st.certified[0],
        }
    elif args.action == "count":
        if args.y is None:
            raise UsageError("extremal count requires --y")
        payload = {
            "kind": args.kind,
            "y": args.y,
            "count": count_below(args.kind, _parse_exact(args.y), table, strict=args.strict),
        }
    elif args.action == "fit":
        grid = np.logspace(math.log10(args.ymin), math.log10(args.ymax), args.points)
        fit = exponent_fit(args.kind, grid, table)
        payload = {
            "kind": args.kind,
            "slope": fit.slope,
            "intercept": fit.intercept,
            "r_squared": fit.r_squared,
            "grid": [float(y) for y in grid],
            "counts": list(fit.counts),
        }
    else:
        raise DomainError(f"unknown extremal action {args.action!r}")
    _write_output(emit_json(payload), args.out, manifest)
    return 0


def cmd_hunt(args, manifest):
    table = build_table(max(args.terms, 1))
    records = hunt(
        args.kind,
        (float(args.xmin), float(args.xmax)),
        args.budget,
        args.terms,
        table,
        strategy=args.strategy,
        seed=args.seed,
        record_time=args.record_time,
    )
    store = WitnessStore(args.store)
    ids = [store.append(rec) for rec in records]
    if store.path.exists():
        manifest.outputs[str(store.path)] = file_sha256(store.path)
    payload = {
        "kind": args.kind,
        "records": len(records),
        "ids": ids,
        "best_normalized": store.best_normalized(args.kind),
        "store": str(store.path),
    }
    _write_output(emit_json(payload), args.out, manifest)
    return 0


# ------------------------------------------------------------------ parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="omegahunt",
        description="Exact divisor/circle error terms, resonance certification, witness hunting.",
    )
    parser.add_argument("--version", action="version", version=f"omegahunt {__version__}")
    parser.add_argument("--config", help="JSON file with per-option defaults (flags win)")
    parser.add_argument("--manifest", help="also write the run manifest to this path")
    parser.add_argument(
        "--threads",
        type=int,
        default=1,
        help="reserved; all computations currently run single-threaded",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sieve", help="write an n,d,r table as CSV")
    p.add_argument("--limit", type=int, required=True)
    p.add_argument("--out")
    p.set_defaults(fn=cmd_sieve)

    p = sub.add_parser("count", help="count n with n * w(n)^(-4/3) <= x")
    p.add_argument("--kind", choices=("divisor", "circle"), required=True)
    p.add_argument("--x")
    p.add_argument("--limit", type=int, default=10**5)
    p.add_argument("--out")
    p.set_defaults(fn=cmd_count)

    for name, help_text in (
        ("delta", "divisor error term at x (exact or series)"),
        ("circle", "circle error term at x (exact or series)"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--x")
        mode = p.add_mutually_exclusive_group()
        mode.add_argument("--exact", action="store_true", default=True)
        mode.add_argument("--voronoi", action="store_true", default=False)
        p.add_argument("--terms", type=int)
        p.add_argument("--out")
        p.set_defaults(fn=cmd_delta if name == "delta" else cmd_circle)

    p = sub.add_parser("scan", help="exact-vs-series residuals over sample points")
    p.add_argument("--kind", choices=("divisor", "circle"), required=True)
    p.add_argument("--terms", type=int, required=True)
    p.add_argument("--samples", required=True, help="CSV with one x per line")
    p.add_argument("--out")
    p.set_defaults(fn=cmd_scan)

    p = sub.add_parser("kernel", help="sector checks for the Gamma kernel")
    p.add_argument("action", choices=("check",))
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--alpha", type=float)
    p.add_argument("--grid-min", type=float, default=-1000.0)
    p.add_argument("--grid-max", type=float, default=1000.0)
    p.add_argument("--points", type=int, default=10**4)
    p.add_argument("--out")
    p.set_defaults(fn=cmd_kernel)

    p = sub.add_parser("resonator", help="expand the product resonator")
    p.add_argument("action", choices=("expand",))
    p.add_argument("--freqs", required=True, help="file with one frequency per line")
    p.add_argument("--r", required=True)
    p.add_argument("--degree", type=int, required=True)
    p.add_argument("--merge-tol", type=float, default=1e-9)
    p.add_argument("--out")
    p.set_defaults(fn=cmd_resonator)

    p = sub.add_parser("resonance", help="certify the resonance inequality")
    p.add_argument("action", choices=("verify",))
    # the instance file is this subcommand's own --config; the global
    # defaults file is the --config before the subcommand
    p.add_argument("--config", dest="instance", help="JSON instance description")
    p.add_argument("--random", type=int, help="verify K random instances")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--spectral", action="store_true", help="add the spectral cross-check")
    p.add_argument("--out")
    p.set_defaults(fn=cmd_resonance)

    p = sub.add_parser("extremal", help="order statistics of the two sequences")
    p.add_argument("action", choices=("sum", "count", "fit"))
    p.add_argument("--kind", choices=("divisor", "circle"), required=True)
    p.add_argument("--m", type=int)
    p.add_argument("--y")
    p.add_argument("--ymin", type=float, default=100.0)
    p.add_argument("--ymax", type=float, default=10**5)
    p.add_argument("--points", type=int, default=12)
    p.add_argument("--limit", type=int, default=10**6)
    p.add_argument("--strict", action="store_true", help="require completeness certificates")
    p.add_argument("--out")
    p.set_defaults(fn=cmd_extremal)

    p = sub.add_parser("hunt", help="search for sign-correct large values")
    p.add_argument("--kind", choices=("divisor", "circle"), required=True)
    p.add_argument("--xmin", type=float, required=True)
    p.add_argument("--xmax", type=float, required=True)
    p.add_argument("--budget", type=int, required=True)
    p.add_argument("--terms", type=int, required=True)
    p.add_argument("--strategy", choices=("grid", "resonator-guided", "hybrid"), default="grid")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--store", required=True, help="JSONL witness store path")
    p.add_argument("--record-time", help="fixed timestamp string for byte-stable stores")
    p.add_argument("--out")
    p.set_defaults(fn=cmd_hunt)

    return parser


def _apply_config_defaults(parser, argv, args):
    if not args.config:
        return args
    import json

    cfg = json.loads(Path(args.config).read_text(encoding="utf-8"))
    if not isinstance(cfg, dict):
        raise DomainError("--config must hold a JSON object of option defaults")
    explicit = {a.lstrip("-").split("=")[0].replace("-", "_") for a in argv if a.startswith("--")}
    for key, value in cfg.items():
        attr = key.replace("-", "_")
        if attr in explicit or not hasattr(args, attr):
            continue
        setattr(args, attr, value)
    return args


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    manifest = RunManifest(command=["omegahunt"] + argv, config_hash="", started=_utc_now())
    try:
        args = _apply_config_defaults(parser, argv, args)
        if args.config:
            _register_input(args.config, manifest)
        if args.threads != 1:
            print(
                "note: --threads > 1 requested; computations run single-threaded",
                file=sys.stderr,
            )
        resolved = {
            k: v
            for k, v in sorted(vars(args).items())
            if k not in ("fn", "manifest") and isinstance(v, (str, int, float, bool, type(None)))
        }
        manifest.config_hash = content_hash(resolved)
        code = args.fn(args, manifest)
        manifest.finished = _utc_now()
        manifest.emit(sys.stderr, args.manifest)
        return code
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return 2
    except OmegaHuntError as exc:
        print(f"error: {exc}", file=sys.stderr)
        manifest.finished = _utc_now()
        manifest.emit(sys.stderr, args.manifest if hasattr(args, "manifest") else None)
        return 1


if __name__ == "__main__":
    sys.exit(main())
