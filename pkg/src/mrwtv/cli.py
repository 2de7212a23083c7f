"""Command-line interface (``mrwtv``)."""

from __future__ import annotations

import argparse
import logging
import os
import sys
from fractions import Fraction
from pathlib import Path

from . import io as fio
from .geometry import cheeger, curvature, is_calibrable, lambda_ratio, mass, perimeter
from .l1 import minimizer_thresholds, solve_l1
from .l2 import multiscale, solve_rof, verify_l2_optimality
from .mincut import solve_geometric
from .numeric import to_fraction, to_json_number
from .space import SpaceError, validate

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_VERIFY = 3
EXIT_USAGE = 64

log = logging.getLogger("mrwtv")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


class UsageError(Exception):
    pass


def _add_space_args(p: argparse.ArgumentParser) -> None:
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--edges", help="edge list (x<TAB>y<TAB>w)")
    g.add_argument("--grid", help="kernel-grid config (JSON)")
    g.add_argument("--points", help="point cloud (id<TAB>coords...<TAB>mass); needs --eps")
    g.add_argument("--space", help="serialized space (JSON)")
    p.add_argument("--eps", help="ball radius for --points")
    p.add_argument("--float", dest="force_float", action="store_true", help="use floating point even for rational input")


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--json", action="store_true", help="emit JSON on stdout")
    p.add_argument("--out", help="also write the JSON result to this file")
    p.add_argument("--seed", type=int, default=0, help="seed recorded in the output (no command draws random numbers)")
    p.add_argument("--jobs", type=int, default=1, help="accepted for compatibility; solves run sequentially")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mrwtv", description="Total-variation decompositions on finite random walk spaces.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("validate", help="check stochasticity, detailed balance and ergodicity")
    _add_space_args(p)
    _add_common(p)
    p.add_argument("--save", help="write the space as JSON")

    p = sub.add_parser("analyze", help="perimeter, ratio, Cheeger constant and curvature of a set")
    _add_space_args(p)
    _add_common(p)
    p.add_argument("--set", required=True, dest="set_path")

    p = sub.add_parser("geo-solve", help="minimize P(A) + lambda nu(A sym-diff F)")
    _add_space_args(p)
    _add_common(p)
    p.add_argument("--set", required=True, dest="set_path")
    p.add_argument("--lambda", required=True, dest="lam")
    p.add_argument("--maximal", action="store_true", help="return the largest minimizer")

    p = sub.add_parser("decompose", help="L^1 or L^2 decomposition of a signal")
    _add_space_args(p)
    _add_common(p)
    p.add_argument("--p", type=int, choices=(1, 2), required=True)
    p.add_argument("--lambda", dest="lam")
    p.add_argument("--signal", required=True)
    p.add_argument("--multiscale", help="comma-separated increasing lambdas (p=2 only)")

    p = sub.add_parser("thresholds", help="thresholding parameters of an indicator datum")
    _add_space_args(p)
    _add_common(p)
    p.add_argument("--set", required=True, dest="set_path")

    p = sub.add_parser("flow", help="implicit total-variation flow")
    _add_space_args(p)
    _add_common(p)
    p.add_argument("--fidelity", choices=("l1", "l2"), required=True)
    p.add_argument("--lambda", required=True, dest="lam")
    p.add_argument("--dt", required=True, type=float)
    p.add_argument("--T", required=True, type=float)
    p.add_argument("--v0", required=True)
    p.add_argument("--signal", required=True)
    p.add_argument("--stride", type=int, default=1)
    p.add_argument("--trajectory", help="write the trajectory CSV here (default: stdout when not --json)")

    p = sub.add_parser("repro", help="rerun an embedded worked example")
    p.add_argument("example", choices=("chain6", "grid"))
    _add_common(p)
    p.add_argument("--w23", help="override the weight of edge 2-3 (chain6 self-test)")
    p.add_argument("--gap", type=int, default=1, help="gap between the two rectangles (grid)")
    p.add_argument("--size", type=int, default=20, help="window side length (grid)")
    return parser


def _load_space(args):
    exact = not args.force_float
    if args.edges:
        return fio.load_edge_space(args.edges, exact)
    if args.grid:
        return fio.load_grid_config(args.grid)
    if args.points:
        if args.eps is None:
            raise UsageError("--points needs --eps")
        return fio.load_point_cloud(args.points, float(args.eps))
    space = fio.load_space(args.space)
    return space.as_float() if args.force_float else space


def _num(text: str, exact: bool):
    return to_fraction(text) if exact else float(Fraction(text))


def _emit(args, payload: dict, text: str | None = None) -> None:
    payload = {"schema": fio.SCHEMA, **payload}
    rendered = fio.dumps(payload)
    if args.out:
        Path(args.out).write_text(rendered + "\n", encoding="utf-8")
    if args.json:
        sys.stdout.write(rendered + "\n")
    elif text is not None:
        sys.stdout.write(text + "\n")
    else:
        sys.stdout.write(rendered + "\n")


def _vec(space, u):
    return [to_json_number(v, space.exact) for v in u]


def _val(space, v):
    return to_json_number(v, space.exact)


def cmd_validate(args) -> int:
    space = _load_space(args)
    rep = validate(space)
    if args.save:
        fio.save_space(space, args.save)
    d = rep.as_dict()
    d["worst_pair"] = [space.states[i] for i in rep.worst_pair] if rep.worst_pair else None
    text = (f"states={rep.n} ergodic={str(rep.ergodic).lower()} row_residual={float(rep.row_residual):.3e} "
            f"balance_residual={float(rep.balance_residual):.3e} ok={str(rep.ok).lower()}")
    for note in rep.notes:
        text += f"\nnote: {note}"
    _emit(args, {"command": "validate", "report": d}, text)
    return EXIT_OK if rep.ok else EXIT_INVALID


def cmd_analyze(args) -> int:
    space = _load_space(args)
    omega = fio.read_set(args.set_path, space)
    h = cheeger(space, omega)
    payload = {
        "command": "analyze",
        "perimeter": _val(space, perimeter(space, omega)),
        "ratio": _val(space, lambda_ratio(space, omega)),
        "cheeger": {"value": _val(space, h.value), "set": space.labels(h.set)},
        "calibrable": is_calibrable(space, omega),
        "curvature": dict(zip(space.states, _vec(space, curvature(space, omega)))),
    }
    _emit(args, payload)
    return EXIT_OK


def cmd_geo_solve(args) -> int:
    space = _load_space(args)
    F = fio.read_set(args.set_path, space)
    lam = _num(args.lam, space.exact)
    sol = solve_geometric(space, F, lam, "maximal" if args.maximal else "minimal")
    _emit(args, {"command": "geo-solve", "set": space.labels(sol.set), "energy": _val(space, sol.energy),
                 "unique": sol.unique})
    return EXIT_OK


def cmd_decompose(args) -> int:
    space = _load_space(args)
    f = fio.read_function(args.signal, space)
    if args.multiscale:
        if args.p != 2:
            raise UsageError("--multiscale is only available with --p 2")
        schedule = [_num(t, space.exact) for t in args.multiscale.split(",") if t.strip()]
        stages = multiscale(space, f, schedule)
        ok = all(s.certificate is not None for s in stages)
        payload = {
            "command": "decompose",
            "p": 2,
            "states": list(space.states),
            "stages": [{"lambda": _val(space, s.lam), "u": _vec(space, s.u), "energy": _val(space, s.energy),
                        "certificate_ok": s.certificate is not None} for s in stages],
            "v": _vec(space, stages[-1].v),
            "certificate_ok": ok,
        }
        _emit(args, payload)
        return EXIT_OK if ok else EXIT_VERIFY
    if args.lam is None:
        raise UsageError("--lambda is required")
    lam = _num(args.lam, space.exact)
    if args.p == 2:
        res = solve_rof(space, f, lam)
        ver = verify_l2_optimality(space, f, res.u, lam)
        ok = ver.ok
        payload = {
            "command": "decompose", "p": 2, "lambda": _val(space, lam), "states": list(space.states),
            "u": _vec(space, res.u), "v": _vec(space, res.v), "energy": _val(space, res.energy),
            "mean_in": _val(space, mass(space, f) / space.total_measure),
            "mean_out": _val(space, mass(space, res.u) / space.total_measure),
            "certificate_ok": ok,
        }
    else:
        res = solve_l1(space, f, lam)
        ok = bool(res.diagnostics.get("certificate_ok"))
        payload = {
            "command": "decompose", "p": 1, "lambda": _val(space, lam), "states": list(space.states),
            "u": _vec(space, res.u), "u_min": _vec(space, res.minimal_u), "u_max": _vec(space, res.maximal_u),
            "energy": _val(space, res.energy), "unique": res.unique, "certificate_ok": ok,
        }
    _emit(args, payload)
    return EXIT_OK if ok else EXIT_VERIFY


def cmd_thresholds(args) -> int:
    space = _load_space(args)
    omega = fio.read_set(args.set_path, space)
    rep = minimizer_thresholds(space, omega)
    payload = {
        "command": "thresholds",
        "lambda_omega": _val(space, rep.lambda_omega),
        "lambda0": _val(space, rep.lambda0),
        "lambda1": _val(space, rep.lambda1),
        "lambda_star": _val(space, rep.lambda_star),
        "lambda_ratio": _val(space, rep.lambda_ratio),
        "lambda_ratio_complement": _val(space, rep.lambda_ratio_complement),
        "cheeger": _val(space, rep.cheeger),
        "eigenpair": rep.eigenpair,
        "witnesses": {k: space.labels(v) for k, v in rep.witnesses.items()},
        "chain_ok": rep.chain_ok,
        "flags": list(rep.flags),
    }
    _emit(args, payload)
    return EXIT_OK if rep.chain_ok else EXIT_VERIFY


def cmd_flow(args) -> int:
    from .flow import decay_report, simulate

    space = _load_space(args)
    f = fio.read_function(args.signal, space)
    v0 = fio.read_function(args.v0, space)
    lam = float(Fraction(args.lam))
    if args.fidelity == "l2":
        target = solve_rof(space.as_float(), f, lam, certify=False).u
    else:
        target = solve_l1(space.as_float(), f, lam, certify=False).minimal_u
    traj = simulate(space, v0, f, lam, args.T, args.dt, args.fidelity, stride=args.stride, target=target)
    rep = decay_report(traj)
    rows = ["t," + ",".join(space.states)]
    for t, s in zip(traj.times, traj.states):
        rows.append(fio.format_value(float(t)) + "," + ",".join(fio.format_value(float(v)) for v in s))
    csv_text = "\n".join(rows) + "\n"
    if args.trajectory:
        Path(args.trajectory).write_text(csv_text, encoding="utf-8")
    energy = [float(e) for e in traj.energy]
    monotone = all(b <= a + 1e-12 * max(1.0, abs(a)) for a, b in zip(energy, energy[1:]))
    payload = {
        "command": "flow",
        "fidelity": args.fidelity,
        "steps": traj.steps,
        "energy_series": energy,
        "mass_series": [float(m) for m in traj.mass],
        "distance_series": rep.distances,
        "decay_ratios": rep.ratios,
        "decay_bound": rep.bound if args.fidelity == "l2" else None,
        "energy_monotone": monotone,
        "decay_ok": rep.ok,
    }
    if args.json or args.trajectory:
        _emit(args, payload)
    else:
        sys.stdout.write(csv_text)
        if args.out:
            Path(args.out).write_text(fio.dumps({"schema": fio.SCHEMA, **payload}) + "\n", encoding="utf-8")
    return EXIT_OK if (rep.ok and monotone) else EXIT_VERIFY


def cmd_repro(args) -> int:
    from .repro import repro_chain6, repro_grid

    if args.example == "chain6":
        weights = {(2, 3): Fraction(args.w23)} if args.w23 else None
        rep = repro_chain6(weights)
        _emit(args, {"command": "repro", **rep.as_dict()}, rep.render())
        if not rep.ok:
            for c in rep.checks:
                if not c.ok:
                    sys.stderr.write(f"- {c.name}: expected {c.expected}\n+ {c.name}: got {c.got}\n")
        return EXIT_OK if rep.ok else EXIT_VERIFY
    sweep = repro_grid(size=args.size, gap=args.gap)
    text = "\n".join(
        [f"grid {sweep.size}x{sweep.size}, two 3x5 rectangles, gap {sweep.gap}"]
        + [f"lambda={str(lam):>7}  |A|={k:>4}  components={c}  unique={u}" for lam, k, c, u in sweep.rows]
        + [f"bridging lambdas: {', '.join(str(l) for l in sweep.bridging) or 'none'}",
           "ALL CHECKS PASS" if sweep.ok else "CHECKS FAILED"]
    )
    payload = {
        "command": "repro", "title": "grid bridging", "ok": sweep.ok,
        "bridging": [to_json_number(l, True) for l in sweep.bridging],
        "large_lambda_returns_omega": sweep.large_ok, "small_lambda_returns_empty": sweep.small_ok,
    }
    _emit(args, payload, text)
    return EXIT_OK if sweep.ok else EXIT_VERIFY


COMMANDS = {
    "validate": cmd_validate,
    "analyze": cmd_analyze,
    "geo-solve": cmd_geo_solve,
    "decompose": cmd_decompose,
    "thresholds": cmd_thresholds,
    "flow": cmd_flow,
    "repro": cmd_repro,
}


def run(argv=None) -> int:
    level = os.environ.get("MRWTV_LOG", "error").upper()
    logging.basicConfig(level=getattr(logging, level, logging.ERROR), stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        sys.stderr.write(f"mrwtv: {exc}\n")
        return EXIT_USAGE
    except (SpaceError, ValueError, OSError) as exc:
        sys.stderr.write(f"mrwtv: {exc}\n")
        return EXIT_INVALID


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
