"""Command-line entry point.

Every output file starts with a ``#`` line holding the fully resolved
configuration as JSON, including an ``argv`` list that reproduces it.
"""
from __future__ import annotations

import argparse
import json
import os
import re
import sys
from dataclasses import asdict

import numpy as np

from . import __version__
from .errors import WalkError
from .tables import fmt, write_table

_ANGLE = re.compile(r"^\s*([+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)?\s*\*?\s*pi\s*$")


class UsageError(Exception):
    pass


def parse_angle(s: str) -> float:
    """Radians, or a multiple of pi written ``0.58pi`` / ``pi`` / ``-pi``."""
    text = str(s).strip().lower()
    m = _ANGLE.match(text)
    if m:
        coef = m.group(1)
        if coef in (None, "", "+"):
            c = 1.0
        elif coef == "-":
            c = -1.0
        else:
            c = float(coef)
        return c * np.pi
    if text in ("-pi",):
        return -np.pi
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid angle {s!r}") from None


def format_angle(x: float) -> str:
    """Canonical text: ``<c>pi`` when x/pi has at most 6 decimals,
    otherwise radians in full precision."""
    if x == 0:
        return "0pi"
    c = float(x) / np.pi
    r = round(c, 6)
    if r != 0 and abs(c - r) <= 1e-12 * abs(c):
        return f"{r:.6f}".rstrip("0").rstrip(".") + "pi"
    return fmt(float(x))


def _float_list(s: str) -> list[float]:
    return [float(v) for v in s.replace(";", ",").split(",") if v.strip()]


def _angle_pair(s: str) -> tuple[float, float]:
    parts = [p for p in s.split(",") if p.strip()]
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected 'lo,hi', got {s!r}")
    return parse_angle(parts[0]), parse_angle(parts[1])


def _add_walk_params(sp, theta1=True, L_default=None):
    if theta1:
        sp.add_argument("--theta1", type=parse_angle, required=True)
    sp.add_argument("--theta2", type=parse_angle, required=True)
    g = sp.add_mutually_exclusive_group()
    g.add_argument("--gamma-exp", type=float, help="e^gamma (e.g. 0.82)")
    g.add_argument("--gamma", type=float, help="gamma itself")
    sp.add_argument("--L", type=int, default=L_default)


def _gamma(args) -> float:
    if args.gamma is not None:
        return float(args.gamma)
    if args.gamma_exp is not None:
        if args.gamma_exp <= 0:
            raise UsageError("--gamma-exp must be positive")
        return float(np.log(args.gamma_exp))
    return 0.0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="nbwalk", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("walk", help="evolve a localized walker")
    _add_walk_params(sp)
    sp.add_argument("--steps", type=int, required=True)
    sp.add_argument("--delta", type=float, default=0.0)
    sp.add_argument("--out", default="walk")

    sp = sub.add_parser("spectrum", help="quasienergy spectra for several deltas")
    _add_walk_params(sp, L_default=128)
    sp.add_argument("--delta", type=_float_list, default=[0.0, 1.0])
    sp.add_argument("--backend", choices=["native", "lapack"], default="native")
    sp.add_argument("--out", default="spectrum.csv")

    sp = sub.add_parser("gbz", help="GBZ contours for several deltas")
    _add_walk_params(sp, L_default=128)
    sp.add_argument("--delta", type=_float_list, default=[0.5])
    sp.add_argument("--backend", choices=["native", "lapack"], default="native")
    sp.add_argument("--out", default="gbz.csv")

    sp = sub.add_parser("invariant", help="winding number with delta trace")
    _add_walk_params(sp, L_default=128)
    sp.add_argument("--deltas", type=_float_list, default=None,
                    help="decreasing deltas (default: crossover-scaled schedule)")
    sp.add_argument("--scheme", choices=["wilson", "derivative"], default="wilson")
    sp.add_argument("--side", choices=["inside", "outside"], default="inside")
    sp.add_argument("--backend", choices=["native", "lapack"], default="native")
    sp.add_argument("--out", default="invariant.csv")

    sp = sub.add_parser("phases", help="phase-diagram grid")
    sp.add_argument("--grid", type=int, default=64)
    g = sp.add_mutually_exclusive_group()
    g.add_argument("--gamma-exp", type=float)
    g.add_argument("--gamma", type=float)
    sp.add_argument("--L", type=int, default=128)
    sp.add_argument("--theta1-range", type=_angle_pair, default=(0.0, 2 * np.pi))
    sp.add_argument("--theta2-range", type=_angle_pair, default=(0.0, 2 * np.pi))
    sp.add_argument("--scheme", choices=["wilson", "derivative"], default="wilson")
    sp.add_argument("--backend", choices=["native", "lapack"], default="native")
    sp.add_argument("--workers", type=int, default=None)
    sp.add_argument("--out", default="phases")

    for name, helptext in (("moments", "moment sweep over theta1"),
                           ("expsim", "photon-counting moment sweep")):
        sp = sub.add_parser(name, help=helptext)
        _add_walk_params(sp, theta1=False)
        sp.add_argument("--steps", type=int, default=80 if name == "moments" else 7)
        sp.add_argument("--l", type=float, default=0.1)
        sp.add_argument("--theta1-start", type=parse_angle, default=0.0)
        sp.add_argument("--theta1-stop", type=parse_angle, default=np.pi)
        sp.add_argument("--theta1-step", type=parse_angle, default=0.01 * np.pi)
        sp.add_argument("--sensitivity", type=float, default=5.0)
        if name == "expsim":
            sp.add_argument("--photons", type=float, default=1e5)
            sp.add_argument("--outcoupling", type=float, default=0.05)
            sp.add_argument("--seed", type=int, default=2024)
            sp.add_argument("--basis", choices=["detected", "injected"], default="detected")
            sp.add_argument("--out", default="expsim")
        else:
            sp.add_argument("--out", default="moments.csv")
    return ap


def _canonical_argv(args) -> list[str]:
    out = [args.command]
    for key, val in sorted(vars(args).items()):
        if key == "command" or val is None:
            continue
        flag = "--" + key.replace("_", "-")
        if key.startswith("theta") and not key.endswith("range"):
            out += [flag, format_angle(val)]
        elif key.endswith("range"):
            out += [flag, ",".join(format_angle(v) for v in val)]
        elif isinstance(val, list):
            out += [flag, ",".join(fmt(v) for v in val)]
        else:
            out += [flag, fmt(val)]
    return out


def _meta(args, **extra) -> dict:
    cfg = {k: (list(v) if isinstance(v, tuple) else v) for k, v in vars(args).items()}
    meta = {"tool": "nbwalk", "version": __version__, "config": cfg,
            "argv": _canonical_argv(args)}
    meta.update(extra)
    return json.loads(json.dumps(meta, default=_jsonable))


def _jsonable(o):
    if hasattr(o, "tolist"):
        return o.tolist()
    if isinstance(o, complex):
        return [o.real, o.imag]
    return str(o)


def _check_writable(path):
    d = os.path.dirname(os.path.abspath(path)) or "."
    if not os.path.isdir(d) or not os.access(d, os.W_OK):
        raise UsageError(f"cannot write output to {path}")


def _theta1_grid(args):
    n = int(np.floor((args.theta1_stop - args.theta1_start) / args.theta1_step + 1e-9)) + 1
    if n < 1:
        raise UsageError("empty theta1 grid")
    return args.theta1_start + args.theta1_step * np.arange(n)


# ------------------------------------------------------------ commands


def _cmd_walk(args):
    from .walk import WalkParams, build_step_operator, evolve, localized_state, position_distribution

    N = args.steps
    if N < 0:
        raise UsageError("--steps must be >= 0")
    L = args.L if args.L is not None else 2 * N + 3
    if args.delta == 0.0 and L < 2 * N + 3:
        raise UsageError(f"open chain needs L >= 2N+3 = {2 * N + 3}")
    args.L = L
    p = WalkParams(args.theta1, args.theta2, _gamma(args), args.delta, L)
    start = L // 2
    states = evolve(build_step_operator(p), localized_state(L, start), N)
    meta = _meta(args, origin=start)
    for path in (args.out + "_time.csv", args.out + "_final.csv"):
        _check_writable(path)
    rows = []
    for t, psi in enumerate(states):
        d = position_distribution(psi)
        rows += [(t, m - start, pm, d.norm_before) for m, pm in enumerate(d.probs)]
    write_table(args.out + "_time.csv", ["step", "position", "probability", "norm_before"], rows, meta)
    d = position_distribution(states[-1])
    write_table(args.out + "_final.csv", ["position", "probability"],
                ((m - start, pm) for m, pm in enumerate(d.probs)), meta)
    return 0


def _cmd_spectrum(args):
    from .spectrum import floquet_gap, gbc_spectrum, write_csv
    from .walk import WalkParams

    _check_writable(args.out)
    res = []
    for d in args.delta:
        p = WalkParams(args.theta1, args.theta2, _gamma(args), d, args.L)
        s = gbc_spectrum(p, backend=args.backend)
        res.append(s)
        print(f"delta={fmt(d)} gap={fmt(floquet_gap(s))} residual_max={fmt(s.residual_max)}")
    write_csv(args.out, res, _meta(args))
    return 0


def _cmd_gbz(args):
    from .gbz import build_contours, obc_circle, write_csv
    from .walk import WalkParams

    _check_writable(args.out)
    contours = []
    for d in args.delta:
        p = WalkParams(args.theta1, args.theta2, _gamma(args), d, args.L)
        if d == 0.0:
            contours.append(obc_circle(p, 2 * args.L))
        else:
            contours.extend(build_contours(p, backend=args.backend))
    for c in contours:
        print(f"delta={fmt(c.delta)} side={c.side} points={c.betas.size} "
              f"radius_fit={fmt(c.radius_fit)} radius_spread={fmt(c.radius_spread)}")
    write_csv(args.out, contours, _meta(args))
    return 0


def _cmd_invariant(args):
    from .invariant import obc_gap, winding_number, write_csv
    from .walk import WalkParams

    _check_writable(args.out)
    p = WalkParams(args.theta1, args.theta2, _gamma(args), 0.0, args.L)
    r = winding_number(p, args.deltas, args.scheme, args.side, backend=args.backend)
    gap = obc_gap(p, backend=args.backend)
    meta = _meta(args)
    write_csv(args.out, [(p, r, gap)], meta)
    trace_path = os.path.splitext(args.out)[0] + "_trace.csv"
    rows = [(t["delta"], t["wilson"].real, t["wilson"].imag, t["derivative"].real,
             t["derivative"].imag, t["nodes"], t["unresolved"]) for t in r.trace]
    write_table(trace_path, ["delta", "wilson_re", "wilson_im", "derivative_re", "derivative_im",
                             "nodes", "unresolved"], rows, meta)
    print(f"v={fmt(r.v)} v_quantized={r.v_quantized} converged={r.converged} gap={fmt(gap)}")
    return 0


def _cmd_phases(args):
    from .phases import (ClassifyOptions, boundary_segments, phase_grid, write_boundaries,
                         write_plot_data)

    csv_path = args.out + ".csv"
    for path in (csv_path, args.out + "_plot.dat", args.out + "_boundaries.dat"):
        _check_writable(path)
    opts = ClassifyOptions(L=args.L, scheme=args.scheme, backend=args.backend)
    grid = phase_grid(args.theta1_range, args.theta2_range, args.grid, _gamma(args), opts,
                      out_csv=csv_path, workers=args.workers)
    write_plot_data(args.out + "_plot.dat", grid)
    write_boundaries(args.out + "_boundaries.dat", boundary_segments(grid))
    counts = {}
    for row in grid:
        for pt in row:
            counts[pt.phase_class] = counts.get(pt.phase_class, 0) + 1
    print(" ".join(f"{k}={v}" for k, v in sorted(counts.items())))
    return 0


def _cmd_moments(args):
    from .moments import sweep_moments, write_csv
    from .walk import WalkParams

    _check_writable(args.out)
    grid = _theta1_grid(args)
    p = WalkParams(float(grid[0]), args.theta2, _gamma(args), 0.0, 2 * args.steps + 3)
    s = sweep_moments(p, grid, args.l, args.steps, args.sensitivity)
    write_csv(args.out, s, _meta(args))
    print("kinks:", " ".join(format_angle(k) for k in s.kinks) or "none")
    return 0


def _cmd_expsim(args):
    from .expsim import ExperimentConfig, metadata, noisy_sweep, write_counts_csv
    from .moments import write_csv
    from .walk import WalkParams

    paths = [args.out + "_counts.csv", args.out + "_moments.csv", args.out + "_run.json"]
    for path in paths:
        _check_writable(path)
    cfg = ExperimentConfig(args.photons, args.outcoupling, args.seed, args.basis)
    grid = _theta1_grid(args)
    p = WalkParams(float(grid[0]), args.theta2, _gamma(args), 0.0, 2 * args.steps + 3)
    run = noisy_sweep(p, grid, cfg, args.steps, args.l, args.sensitivity)
    series, counts = run
    meta = _meta(args, experiment=metadata(cfg, p, args.steps),
                 noise_floor=run.noise_floor, low_confidence=run.low_confidence)
    write_counts_csv(paths[0], grid, counts, meta)
    write_csv(paths[1], series, meta)
    with open(paths[2], "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
    print("kinks:", " ".join(format_angle(k) for k in series.kinks) or "none")
    if run.low_confidence:
        print("low confidence: shot noise comparable to curvature")
    return 0


_COMMANDS = {
    "walk": _cmd_walk,
    "spectrum": _cmd_spectrum,
    "gbz": _cmd_gbz,
    "invariant": _cmd_invariant,
    "phases": _cmd_phases,
    "moments": _cmd_moments,
    "expsim": _cmd_expsim,
}


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except WalkError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
