"""Command-line driver: ``dynot transport | hue-transfer | eval``."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

from . import io
from .color import (
    display_scale,
    hue_transfer_hsv,
    hsv_to_rgb,
    normalize_masses,
)
from .errors import DynotError, IoError
from .grid import BC
from .solver import SolverParams, TransportProblem, evaluate_solution, pdhg_solve

log = logging.getLogger("dynot")

FRAME_EXT = {"png": ".png", "ppm": ".ppm", "tensor": ".dten"}
DIAG_FIELDS = ["iter", "objective", "constraint_residual", "coupling_residual", "primal_change"]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _fmt(x) -> str:
    return x if isinstance(x, (int, str)) else format(float(x), ".17g")


def parse_bc(spec: str | None, ndim: int, default: list[BC]) -> list[BC]:
    """Parse ``"0=neumann,2=periodic"`` on top of per-axis defaults."""
    bcs = list(default)
    if not spec:
        return bcs
    for item in spec.split(","):
        try:
            axis, value = item.split("=")
            axis = int(axis)
            bc = BC(value.strip().lower())
        except ValueError as exc:
            raise UsageError(f"bad --bc entry {item!r}; expected AXIS=neumann|periodic") from exc
        if not 0 <= axis < ndim:
            raise UsageError(f"--bc axis {axis} out of range for {ndim}-D input")
        bcs[axis] = bc
    return bcs


def _load_input(path, mode):
    suffix = Path(path).suffix.lower()
    if not Path(path).exists():
        raise IoError(f"input not found: {path}")
    if suffix == ".dten":
        return io.load_tensor(path)
    if mode == "signal":
        raise UsageError(f"{path}: signal mode takes .dten tensor inputs")
    return io.load_image(path)


def _params(args) -> SolverParams:
    return SolverParams(tau=args.tau, sigma=args.sigma, theta=args.theta,
                        max_iter=args.iters, report_every=args.report_every)


def write_diagnostics(history, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(DIAG_FIELDS)
        for d in history:
            writer.writerow([_fmt(getattr(d, k)) for k in DIAG_FIELDS])


def _write_frame(frame, path, fmt):
    if fmt == "tensor":
        io.save_tensor(frame, path)
    else:
        io.save_image(frame, path)


def cmd_transport(args) -> int:
    a = _load_input(args.a, args.mode)
    b = _load_input(args.b, args.mode)
    if a.shape != b.shape:
        raise UsageError(f"input shapes differ: {a.shape} vs {b.shape}")
    if not 1 <= a.ndim <= 4:
        raise UsageError(f"inputs must have 1 to 4 axes, got {a.ndim}")
    fmt = args.frames or ("png" if args.mode == "rgb" else "tensor")
    if args.mode == "rgb":
        if a.ndim != 3 or a.shape[2] != 3:
            raise UsageError(f"rgb mode needs (height, width, 3) inputs, got {a.shape}")
        default = [BC.NEUMANN, BC.NEUMANN, BC.PERIODIC]
    else:
        if fmt != "tensor":
            raise UsageError("signal mode writes tensor frames only")
        default = [BC.NEUMANN] * a.ndim
    bcs = parse_bc(args.bc, a.ndim, default)
    params = _params(args)
    f0, f1, s0, s1 = normalize_masses(a, b)
    problem = TransportProblem.create(f0, f1, args.steps, bcs)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    log.info("transport %s grid, %d steps, %d iterations", "x".join(map(str, a.shape)),
             args.steps, args.iters)
    result = pdhg_solve(problem, params)
    for d in result.history:
        log.info("iter %d objective %.6g constraint %.3g coupling %.3g", d.iter,
                 d.objective, d.constraint_residual, d.coupling_residual)

    frames = result.frames()
    for k in range(args.steps + 1):
        if k == 0:
            frame = a
        elif k == args.steps:
            frame = b
        else:
            frame = frames[..., k] / display_scale(k / args.steps, s0, s1)
        _write_frame(frame, out / f"frame_{k:03d}{FRAME_EXT[fmt]}", fmt)
    write_diagnostics(result.history, out / "diagnostics.csv")
    io.save_tensor(result.f, out / "state_f.dten")
    for i, comp in enumerate(result.m):
        io.save_tensor(comp, out / f"state_m{i}.dten")
    io.save_tensor(result.u, out / "state_u.dten")
    io.save_tensor(result.v, out / "state_v.dten")
    run = {
        "command": "transport",
        "inputs": [str(Path(args.a).resolve()), str(Path(args.b).resolve())],
        "mode": args.mode,
        "steps": args.steps,
        "bc": [bc.value for bc in bcs],
        "frames": fmt,
        "params": vars(params),
    }
    (out / "run.json").write_text(json.dumps(run, indent=2) + "\n")
    return 0


def cmd_hue_transfer(args) -> int:
    a = _load_input(args.a, "rgb")
    b = _load_input(args.b, "rgb")
    fmt = args.frames
    if fmt == "tensor":
        raise UsageError("hue-transfer writes png or ppm frames")
    params = _params(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    frames, hists = hue_transfer_hsv(a, b, args.bins, args.steps, params)
    for k, fr in enumerate(frames):
        io.save_image(hsv_to_rgb(fr), out / f"frame_{k:03d}{FRAME_EXT[fmt]}")
    with open(out / "histograms.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["frame"] + [f"bin_{j}" for j in range(args.bins)])
        for k, h in enumerate(hists):
            writer.writerow([k] + [_fmt(x) for x in h])
    return 0


def cmd_eval(args) -> int:
    out = Path(args.dir)
    try:
        run = json.loads((out / "run.json").read_text())
    except OSError as exc:
        raise IoError(f"cannot read run description in {out}: {exc}") from exc
    if run.get("command") != "transport":
        raise UsageError(f"{out} does not hold a transport run")
    a = _load_input(run["inputs"][0], run["mode"])
    b = _load_input(run["inputs"][1], run["mode"])
    f0, f1, _, _ = normalize_masses(a, b)
    problem = TransportProblem.create(f0, f1, run["steps"], [BC(x) for x in run["bc"]])
    f = io.load_tensor(out / "state_f.dten")
    m = [io.load_tensor(out / f"state_m{i}.dten") for i in range(problem.grid.ndim)]
    u = io.load_tensor(out / "state_u.dten")
    v = io.load_tensor(out / "state_v.dten")
    diag = evaluate_solution(m, f, problem, u=u, v=v, iteration=run["params"]["max_iter"])
    rows = [DIAG_FIELDS, [_fmt(getattr(diag, k)) for k in DIAG_FIELDS]]
    with open(out / "eval.csv", "w", newline="") as fh:
        csv.writer(fh).writerows(rows)
    csv.writer(sys.stdout).writerows(rows)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="dynot", description="Dynamic optimal transport between densities.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log solver progress")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def solver_flags(p, iters=2000, steps=32):
        p.add_argument("--steps", type=int, default=steps, help="time steps P")
        p.add_argument("--iters", type=int, default=iters, help="iterations")
        p.add_argument("--tau", type=float, default=0.95)
        p.add_argument("--sigma", type=float, default=0.95)
        p.add_argument("--theta", type=float, default=1.0)
        p.add_argument("--report-every", type=int, default=10)
        p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("transport", help="transport one density into another")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("--mode", choices=["signal", "rgb"], default="signal")
    p.add_argument("--bc", help="per-axis boundary conditions, e.g. 0=neumann,2=periodic")
    p.add_argument("--frames", choices=sorted(FRAME_EXT))
    solver_flags(p)
    p.set_defaults(func=cmd_transport)

    p = sub.add_parser("hue-transfer", help="transport the hue histogram of image a into b's")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("--bins", type=int, default=256)
    p.add_argument("--frames", choices=["png", "ppm"], default="png")
    solver_flags(p, steps=8)
    p.set_defaults(func=cmd_hue_transfer)

    p = sub.add_parser("eval", help="recompute diagnostics of a saved transport run")
    p.add_argument("dir")
    p.set_defaults(func=cmd_eval)
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(name)s: %(message)s", stream=sys.stderr)
        if args.command != "eval" and args.steps < 2:
            raise UsageError("--steps must be at least 2")
        return args.func(args)
    except (IoError, OSError) as exc:
        print(f"dynot: {exc}", file=sys.stderr)
        return 2
    except (UsageError, DynotError, ValueError) as exc:
        print(f"dynot: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
