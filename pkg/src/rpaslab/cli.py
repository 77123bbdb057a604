"""Command-line interface.

Subcommands: trim, simulate, sweep, aggregate, curves, blockage, rcp,
plot.  Standard output stays machine-parseable (CSV or a bare number);
progress and diagnostics go to standard error.  Exit codes: 0 success,
1 usage or configuration error, 2 mission failure (simulate only).
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ConfigError, ConvergenceError

OUT_DIR_ENV = "RPASLAB_OUT_DIR"


class _Parser(argparse.ArgumentParser):
    # usage errors exit 1 (argparse default is 2, which is reserved for
    # mission failure)
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _default_out_dir() -> Path:
    return Path(os.environ.get(OUT_DIR_ENV, "."))


def _version_string() -> str:
    from .params import AircraftParams

    try:
        phash = AircraftParams.load().version_hash
    except ConfigError:
        phash = "unavailable"
    return f"rpaslab {__version__} (aircraft data {phash})"


def _add_common_run_flags(sp):
    sp.add_argument("--params", help="aircraft parameter JSON (default: packaged)")
    sp.add_argument("--gains", help="controller gain/config JSON (default: packaged)")


def _build_parser() -> _Parser:
    parser = _Parser(prog="rpaslab", description=__doc__)
    parser.add_argument("--version", action="version", version=_version_string())
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("trim", help="solve a wings-level trim point")
    sp.add_argument("--vt", type=float, default=540.0, help="airspeed, ft/s")
    sp.add_argument("--alt", type=float, default=4000.0, help="altitude, ft")
    _add_common_run_flags(sp)

    sp = sub.add_parser("simulate", help="run one mission")
    sp.add_argument("scenario", help="scenario JSON path")
    sp.add_argument("--pa", type=float, default=1.0, help="availability in (0, 1]")
    sp.add_argument("--eps", type=float, default=0.0, help="one-way latency, s")
    sp.add_argument("--seed", type=int, default=0, help="link realization seed")
    sp.add_argument(
        "--loss-policy",
        choices=["failsafe-reference", "zero-control"],
        default="failsafe-reference",
    )
    sp.add_argument("--throttle-on-loss", choices=["hold-last", "zero"], default="hold-last")
    sp.add_argument("--traj-out", help="write the trajectory CSV here")
    _add_common_run_flags(sp)

    sp = sub.add_parser("sweep", help="Monte Carlo sweep over (availability, latency)")
    sp.add_argument("scenario", help="scenario JSON path")
    sp.add_argument("--samples", type=int, required=True)
    sp.add_argument("--base-seed", type=int, default=0)
    sp.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    sp.add_argument(
        "--loss-policy",
        choices=["failsafe-reference", "zero-control"],
        default="failsafe-reference",
    )
    sp.add_argument("--throttle-on-loss", choices=["hold-last", "zero"], default="hold-last")
    sp.add_argument("--out", help="records CSV path (default: standard output)")
    _add_common_run_flags(sp)

    sp = sub.add_parser("aggregate", help="bin records into the success/time surface")
    sp.add_argument("records", help="records CSV from `sweep`")
    sp.add_argument("--pa-bins", type=int, default=10)
    sp.add_argument("--eps-bins", type=int, default=10)
    sp.add_argument("--out", help="surface CSV path (default: standard output)")

    sp = sub.add_parser("curves", help="success rate versus communicability")
    sp.add_argument("records", help="records CSV from `sweep`")
    sp.add_argument("--size-bits", type=float, default=448.0, help="message size, bits")
    sp.add_argument("--bitrate", type=float, default=2400.0, help="link bitrate, bits/s")
    sp.add_argument(
        "--eps-intervals",
        default="0,0.02,0.04,0.06,0.08,0.1",
        help="comma-separated latency interval edges",
    )
    sp.add_argument("--pcomm-bins", type=int, default=20)
    sp.add_argument("--out", help="curves CSV path (default: standard output)")

    sp = sub.add_parser("blockage", help="deterministic latency sweep at fixed availability")
    sp.add_argument("scenario", help="scenario JSON path")
    sp.add_argument("--eps-start", type=float, default=0.0)
    sp.add_argument("--eps-stop", type=float, default=0.1)
    sp.add_argument("--eps-step", type=float, default=1e-3)
    sp.add_argument("--pa", type=float, default=1.0)
    sp.add_argument("--out", help="blockage CSV path (default: standard output)")
    _add_common_run_flags(sp)

    sp = sub.add_parser("rcp", help="communication-performance calculators")
    rcp_sub = sp.add_subparsers(dest="metric", required=True)
    m = rcp_sub.add_parser("availability", help="on-state probability at time t")
    m.add_argument("--lon", type=float, required=True, help="off-to-on rate, 1/s")
    m.add_argument("--loff", type=float, required=True, help="on-to-off rate, 1/s")
    m.add_argument("--t", type=float, required=True, help="time, s")
    m = rcp_sub.add_parser("steady", help="long-run availability")
    m.add_argument("--lon", type=float, required=True)
    m.add_argument("--loff", type=float, required=True)
    m = rcp_sub.add_parser("continuity", help="probability an on period lasts tau seconds")
    m.add_argument("--loff", type=float, required=True)
    m.add_argument("--tau", type=float, required=True)
    m = rcp_sub.add_parser("communicability", help="random-time message success probability")
    m.add_argument("--pa", type=float, required=True)
    m.add_argument("--tau", type=float, required=True, help="message duration, s")
    m.add_argument("--eps", type=float, required=True, help="one-way latency, s")
    m = rcp_sub.add_parser("tau-msg", help="message duration from size and bitrate")
    m.add_argument("--bits", type=float, required=True)
    m.add_argument("--bitrate", type=float, required=True)

    sp = sub.add_parser("plot", help="render figures from product CSVs")
    plot_sub = sp.add_subparsers(dest="kind", required=True)
    for kind, help_text in (
        ("surface", "heatmap and contours from a surface CSV"),
        ("curves", "communicability curves figure"),
        ("blockage", "latency sweep figure with flagged bands"),
        ("trajectory", "single-run trajectory figure"),
    ):
        m = plot_sub.add_parser(kind, help=help_text)
        m.add_argument("input", help="input CSV")
        m.add_argument("--out-dir", help=f"output directory (default: ${OUT_DIR_ENV} or .)")

    return parser


def _open_out(out: str | None):
    if out is None:
        return sys.stdout, False
    return open(out, "w", newline=""), True


def _cmd_trim(args) -> int:
    from .dynamics import trim, trim_residual_norm
    from .params import AircraftParams

    params = AircraftParams.load(args.params)
    state, cmd = trim(args.vt, args.alt, params)
    residual = trim_residual_norm(state, cmd, params)
    print("vt_fps,alt_ft,alpha_rad,theta_rad,power_pct,throttle,elevator_rad,residual")
    print(
        f"{args.vt:.6g},{args.alt:.6g},{state.alpha:.12g},{state.theta:.12g},"
        f"{state.power:.12g},{cmd.throttle:.12g},{cmd.elevator:.12g},{residual:.3e}"
    )
    return 0


def _load_run_bits(args):
    from .channel import LossPolicy
    from .mission import MissionContext, ScenarioConfig
    from .params import AircraftParams

    scenario = ScenarioConfig.load(args.scenario)
    params = AircraftParams.load(args.params)
    ctx = MissionContext.prepare(scenario, params, args.gains)
    policy = LossPolicy.parse(args.loss_policy, args.throttle_on_loss)
    return scenario, ctx, policy


def _cmd_simulate(args) -> int:
    from .mission import RunConfig, RunRecord, export_trajectory, run_mission

    scenario, ctx, policy = _load_run_bits(args)
    run = RunConfig(p_a=args.pa, epsilon=args.eps, seed=args.seed, loss_policy=policy)
    result = run_mission(ctx, run, capture_trajectory=args.traj_out is not None)
    if args.traj_out:
        export_trajectory(result, args.traj_out)
        print(f"trajectory written to {args.traj_out}", file=sys.stderr)
    print(RunRecord.CSV_HEADER)
    print(result.record.csv_row())
    return 0 if result.record.success else 2


def _cmd_sweep(args) -> int:
    from .channel import LossPolicy
    from .mission import ScenarioConfig
    from .montecarlo import SweepConfig, run_sweep, write_records_csv
    from .params import AircraftParams

    scenario = ScenarioConfig.load(args.scenario)
    params = AircraftParams.load(args.params)
    sweep = SweepConfig(
        n_samples=args.samples,
        base_seed=args.base_seed,
        worker_count=args.workers,
        loss_policy=LossPolicy.parse(args.loss_policy, args.throttle_on_loss),
    )
    records = run_sweep(scenario, sweep, params, args.gains, progress=True)
    fh, close = _open_out(args.out)
    try:
        write_records_csv(records, fh)
    finally:
        if close:
            fh.close()
    return 0


def _cmd_aggregate(args) -> int:
    from .montecarlo import build_surface, read_records_csv

    records = read_records_csv(args.records)
    if not records:
        print("aggregate: records file is empty", file=sys.stderr)
        return 1
    grid = build_surface(records, args.pa_bins, args.eps_bins)
    fh, close = _open_out(args.out)
    try:
        grid.write_csv(fh)
    finally:
        if close:
            fh.close()
    return 0


def _cmd_curves(args) -> int:
    from .montecarlo import communicability_curves, read_records_csv, write_curves_csv
    from .rcp import MessageSpec

    records = read_records_csv(args.records)
    if not records:
        print("curves: records file is empty", file=sys.stderr)
        return 1
    edges = [float(v) for v in args.eps_intervals.split(",")]
    if len(edges) < 2:
        print("curves: need at least two interval edges", file=sys.stderr)
        return 1
    intervals = list(zip(edges[:-1], edges[1:]))
    msg = MessageSpec(size_bits=args.size_bits, bitrate=args.bitrate)
    print(f"curves: message duration {msg.tau_msg:.6f} s", file=sys.stderr)
    points = communicability_curves(records, msg, intervals, args.pcomm_bins)
    fh, close = _open_out(args.out)
    try:
        write_curves_csv(points, fh)
    finally:
        if close:
            fh.close()
    return 0


def _cmd_blockage(args) -> int:
    from .mission import ScenarioConfig
    from .montecarlo import latency_blockage_sweep
    from .params import AircraftParams

    scenario = ScenarioConfig.load(args.scenario)
    params = AircraftParams.load(args.params)
    n = int(round((args.eps_stop - args.eps_start) / args.eps_step)) + 1
    grid = np.round(args.eps_start + np.arange(n) * args.eps_step, 9)
    report = latency_blockage_sweep(
        scenario, grid, params, args.gains, p_a=args.pa, progress=True
    )
    fh, close = _open_out(args.out)
    try:
        report.write_csv(fh)
    finally:
        if close:
            fh.close()
    return 0


def _cmd_rcp(args) -> int:
    from . import rcp

    if args.metric == "availability":
        value = rcp.availability_at(rcp.RcpRates(args.lon, args.loff), args.t)
    elif args.metric == "steady":
        value = rcp.steady_state_availability(rcp.RcpRates(args.lon, args.loff))
    elif args.metric == "continuity":
        value = rcp.continuity(rcp.RcpRates(lambda_on=1.0, lambda_off=args.loff), args.tau)
    elif args.metric == "communicability":
        value = rcp.communicability_from_duration(args.pa, args.tau, args.eps)
    else:  # tau-msg
        value = rcp.message_duration(args.bits, args.bitrate)
    print(f"{value:.12g}")
    return 0


def _cmd_plot(args) -> int:
    from . import plots

    out_dir = Path(args.out_dir) if args.out_dir else _default_out_dir()
    fn = {
        "surface": plots.plot_surface,
        "curves": plots.plot_curves,
        "blockage": plots.plot_blockage,
        "trajectory": plots.plot_trajectory,
    }[args.kind]
    for path in fn(args.input, out_dir):
        print(path)
    return 0


_COMMANDS = {
    "trim": _cmd_trim,
    "simulate": _cmd_simulate,
    "sweep": _cmd_sweep,
    "aggregate": _cmd_aggregate,
    "curves": _cmd_curves,
    "blockage": _cmd_blockage,
    "rcp": _cmd_rcp,
    "plot": _cmd_plot,
}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 1
    try:
        return _COMMANDS[args.command](args)
    except (ConfigError, ConvergenceError, ValueError, OSError) as exc:
        print(f"rpaslab {args.command}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
