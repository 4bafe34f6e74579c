"""Command-line entry point.

Exit codes: 0 success, 2 configuration error, 3 infeasible target,
4 numerical invariant violation (or a failed monotonicity check in a sweep).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from .design import InfeasibleTargetError
from .lattice import InvariantViolation
from .pipeline import PRESETS, RunConfig, get_preset, load_config, run_pipeline, write_outputs

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INFEASIBLE = 3
EXIT_INVARIANT = 4

OUT_ENV = "QNDLATTICE_OUT"
MONOTONE_RANGE = (1, 20)
MONOTONE_TOL = 1e-6


class _ArgumentError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _ArgumentError(message)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="qndlattice", description="Design and simulate QND pulse sequences on a spin lattice.")
    ap.add_argument("--config", help="flat 'key = value' config file")
    ap.add_argument("--preset", choices=sorted(PRESETS), help="built-in parameter set")
    ap.add_argument("--d", help="optical depth per pulse, a positive number or 'inf'")
    ap.add_argument("--out", help=f"output directory (default: ${OUT_ENV} or ./out)")
    ap.add_argument("--target-file", help="tabulated target, one 'dr value' row per separation")
    ap.add_argument("--order-policy", help="ascending_p, descending_p or descending_coupling")
    ap.add_argument("--sweep", help="comma-separated optical depths, e.g. inf,300,99,33")
    return ap


def parse_depth(text: str) -> float:
    try:
        d = float(text)
    except ValueError:
        raise ValueError(f"optical depth must be a number or 'inf', got {text!r}") from None
    if not d > 0:
        raise ValueError(f"optical depth must be > 0, got {text!r}")
    return d


def resolve_config(args) -> RunConfig:
    cfg = get_preset(args.preset) if args.preset else RunConfig()
    if args.config:
        path = Path(args.config)
        if not path.is_file():
            raise ValueError(f"config file {path} is not readable")
        cfg = load_config(path, base=cfg)
    updates = {}
    if args.d is not None:
        updates["d"] = parse_depth(args.d)
    if args.target_file is not None:
        if not Path(args.target_file).is_file():
            raise ValueError(f"target file {args.target_file} is not readable")
        updates.update(target="tabulated", target_file=args.target_file)
    if args.order_policy is not None:
        updates["order_policy"] = args.order_policy
    out = args.out or os.environ.get(OUT_ENV)
    if out:
        updates["out"] = out
    return replace(cfg, **updates)


def _execute(cfg: RunConfig, out_dir: str) -> tuple[int, str, dict | None, list | None]:
    """Run one member; returns (code, message, summary, correlation)."""
    try:
        result = run_pipeline(cfg)
        write_outputs(result, out_dir)
    except InfeasibleTargetError as exc:
        return EXIT_INFEASIBLE, f"infeasible target: {exc}", None, None
    except InvariantViolation as exc:
        return EXIT_INVARIANT, f"invariant violation: {exc}", None, None
    except (ValueError, OSError) as exc:
        return EXIT_CONFIG, f"config error: {exc}", None, None
    return EXIT_OK, f"wrote {out_dir}", result.summary, result.report.correlation.tolist()


def _depth_tag(d: float) -> str:
    return "inf" if math.isinf(d) else f"{d:g}"


def monotonicity(correlations: dict[float, np.ndarray], dr_range=MONOTONE_RANGE, tol=MONOTONE_TOL) -> dict:
    """Check that ``|C(dr)|`` does not grow as ``d`` decreases."""
    depths = sorted(correlations, reverse=True)
    lo, hi = dr_range
    violations = []
    for big, small in zip(depths, depths[1:]):
        a = np.abs(np.asarray(correlations[big])[lo:hi + 1])
        b = np.abs(np.asarray(correlations[small])[lo:hi + 1])
        for i in np.flatnonzero(b > a + tol):
            violations.append({"delta_r": int(lo + i), "d_high": _depth_tag(big), "d_low": _depth_tag(small),
                               "excess": float(b[i] - a[i])})
    return {"status": "pass" if not violations else "fail", "delta_r_range": list(dr_range),
            "tolerance": tol, "depths": [_depth_tag(d) for d in depths], "violations": violations}


def sweep(cfg: RunConfig, depths: list[float]) -> int:
    if not depths:
        print("config error: --sweep needs at least one optical depth", file=sys.stderr)
        return EXIT_CONFIG
    if len(set(depths)) != len(depths):
        print("config error: --sweep lists an optical depth twice", file=sys.stderr)
        return EXIT_CONFIG
    if len(depths) == 1:
        return _single(replace(cfg, d=depths[0]))

    root = Path(cfg.out)
    members = [(replace(cfg, d=d), str(root / f"d_{_depth_tag(d)}")) for d in depths]
    with ProcessPoolExecutor(max_workers=min(len(members), os.cpu_count() or 1)) as pool:
        results = list(pool.map(_execute, *zip(*members)))
    for (member, _), (code, msg, _, _) in zip(members, results):
        print(f"d={_depth_tag(member.d)}: {msg}", file=sys.stderr if code else sys.stdout)
    failed = [code for code, *_ in results if code]
    if failed:
        return failed[0]

    corr = {m.d: np.asarray(c) for (m, _), (_, _, _, c) in zip(members, results)}
    order = sorted(corr, reverse=True)
    buf = io.StringIO()
    buf.write("# qndlattice sweep\n")
    buf.write(f"# config_hash: {replace(cfg, d=math.inf).hash()}\n")
    for (m, _), (_, _, summary, _) in zip(members, results):
        buf.write(f"# d={_depth_tag(m.d)} config_hash: {summary['config_hash']}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["delta_r"] + [f"C_d={_depth_tag(d)}" for d in order])
    for dr in range(len(corr[order[0]])):
        writer.writerow([dr] + [repr(float(corr[d][dr])) for d in order])
    root.mkdir(parents=True, exist_ok=True)
    (root / "sweep_correlation.csv").write_text(buf.getvalue())

    report = monotonicity(corr)
    fits = {_depth_tag(m.d): s for (m, _), (_, _, s, _) in zip(members, results)}
    (root / "sweep_fits.json").write_text(json.dumps(fits, indent=2, sort_keys=True) + "\n")
    (root / "sweep_report.json").write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    print(f"monotonicity in d: {report['status']}")
    if report["status"] != "pass":
        for v in report["violations"][:10]:
            print(f"  |C({v['delta_r']})| grows from d={v['d_high']} to d={v['d_low']} by {v['excess']:.3g}",
                  file=sys.stderr)
        return EXIT_INVARIANT
    return EXIT_OK


def _single(cfg: RunConfig) -> int:
    code, msg, summary, _ = _execute(cfg, cfg.out)
    if code:
        print(msg, file=sys.stderr)
        return code
    fit = summary.get("correlation_fit")
    if fit:
        name = "xi" if fit["law"] == "exponential" else "zeta"
        print(f"{name} = {fit['parameter']:.4f}  r^2 = {fit['r_squared']:.5f}")
    print(msg)
    return EXIT_OK


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        cfg = resolve_config(args)
        depths = None
        if args.sweep is not None:
            depths = [parse_depth(t) for t in args.sweep.split(",") if t.strip()]
    except _ArgumentError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ValueError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if depths is not None:
        return sweep(cfg, depths)
    return _single(cfg)


if __name__ == "__main__":
    sys.exit(main())
