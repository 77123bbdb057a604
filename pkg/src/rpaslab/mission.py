"""Single-run mission executor.

Wires the plant, the cascaded controller, and the link channel into one
closed loop and reduces the outcome to a RunRecord.  A mission flies an
ordered waypoint list; it succeeds when the last waypoint is captured
(slant range below the threshold) and otherwise terminates with a named
failure mode.  Runs are deterministic functions of (scenario, run
config).
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import channel, control, kernels
from .dynamics import AircraftState, CommandVector, trim
from .errors import ConfigError
from .params import AircraftParams

SUPPORTED_SCHEMA = 1

FAILURE_MODES = {
    kernels.STATUS_TIMEOUT: "timeout",
    kernels.STATUS_GROUND: "ground-impact",
    kernels.STATUS_SINGULARITY: "attitude-singularity",
    kernels.STATUS_ENVELOPE: "envelope-exit",
    kernels.STATUS_NUMERIC: "numeric-divergence",
}

TRAJECTORY_COLUMNS = [
    "time_s", "x_e", "y_e", "h", "Vt", "alpha", "beta", "phi", "theta", "psi",
    "p", "q", "r", "pow", "de", "da", "dr", "dt_cmd", "Nz", "ps", "Nyr",
    "link_state", "waypoint_index",
]

DONE = "Done"


def packaged_scenario_path(name: str) -> Path:
    """Path of one of the shipped scenario files ("scenario1"/"scenario2")."""
    from importlib import resources

    return Path(resources.files("rpaslab").joinpath(f"data/{name}.json"))


@dataclass(frozen=True)
class ScenarioConfig:
    """A waypoint mission definition."""

    name: str
    waypoints: np.ndarray            # (n, 3) NED ft
    capture_radius: float            # ft
    initial_vt: float                # ft/s
    initial_alt: float               # ft
    initial_position: np.ndarray     # (2,) north/east ft
    initial_heading: float           # rad
    cruise_vt: float                 # ft/s
    dt: float                        # s
    time_limit: float                # s
    bounds_north: tuple[float, float]
    bounds_east: tuple[float, float]

    def __post_init__(self):
        wps = np.asarray(self.waypoints, dtype=float)
        if wps.ndim != 2 or wps.shape[1] != 3 or wps.shape[0] < 1:
            raise ConfigError("scenario needs at least one NED waypoint triple")
        if not np.all(np.isfinite(wps)):
            raise ConfigError("waypoints must be finite")
        n_lo, n_hi = self.bounds_north
        e_lo, e_hi = self.bounds_east
        inside = (
            (wps[:, 0] >= n_lo) & (wps[:, 0] <= n_hi)
            & (wps[:, 1] >= e_lo) & (wps[:, 1] <= e_hi)
        )
        if not np.all(inside):
            raise ConfigError("all waypoints must lie inside the airspace bounds")
        if self.capture_radius <= 0.0:
            raise ConfigError("capture radius must be positive")
        if self.dt <= 0.0 or self.time_limit <= 0.0:
            raise ConfigError("dt and time_limit must be positive")
        object.__setattr__(self, "waypoints", np.ascontiguousarray(wps))

    @property
    def n_steps(self) -> int:
        return int(round(self.time_limit / self.dt))

    @classmethod
    def load(cls, path: str | Path) -> "ScenarioConfig":
        p = Path(path)
        try:
            raw = json.loads(p.read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read scenario file {p}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"scenario file {p} is not valid JSON: {exc}") from exc
        if raw.get("schema_version") != SUPPORTED_SCHEMA:
            raise ConfigError(f"scenario file {p}: unsupported schema_version")
        try:
            init = raw["initial"]
            bounds = raw["airspace_bounds_ft"]
            return cls(
                name=raw.get("name", p.stem),
                waypoints=np.asarray(raw["waypoints_ned_ft"], dtype=float),
                capture_radius=float(raw["capture_radius_ft"]),
                initial_vt=float(init["vt_fps"]),
                initial_alt=float(init["alt_ft"]),
                initial_position=np.asarray(init["position_ft"], dtype=float),
                initial_heading=float(init["heading_rad"]),
                cruise_vt=float(raw["cruise_vt_fps"]),
                dt=float(raw["dt_s"]),
                time_limit=float(raw["time_limit_s"]),
                bounds_north=tuple(bounds["north"]),
                bounds_east=tuple(bounds["east"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"scenario file {p}: {exc!r}") from exc


@dataclass(frozen=True)
class RunConfig:
    """Stochastic-channel parameters of a single run."""

    p_a: float
    epsilon: float
    seed: int
    loss_policy: channel.LossPolicy = field(default_factory=channel.LossPolicy)

    def __post_init__(self):
        if not 0.0 < self.p_a <= 1.0:
            raise ConfigError(f"availability must be in (0, 1], got {self.p_a}")
        if self.epsilon < 0.0:
            raise ConfigError(f"latency must be non-negative, got {self.epsilon}")


@dataclass(frozen=True)
class RunRecord:
    """Outcome of a single mission run."""

    run_id: int
    p_a: float
    epsilon: float
    seed: int
    success: bool
    completion_time: float | None
    failure_mode: str | None
    waypoints_reached: int

    CSV_HEADER = "run_id,p_a,epsilon,seed,success,completion_time_s,failure_mode,waypoints_reached"

    def csv_row(self) -> str:
        ct = f"{self.completion_time:.6f}" if self.completion_time is not None else ""
        fm = self.failure_mode or ""
        return (
            f"{self.run_id},{self.p_a:.3f},{self.epsilon:.3f},{self.seed},"
            f"{'true' if self.success else 'false'},{ct},{fm},{self.waypoints_reached}"
        )

    @classmethod
    def from_csv_row(cls, row: list[str]) -> "RunRecord":
        return cls(
            run_id=int(row[0]),
            p_a=float(row[1]),
            epsilon=float(row[2]),
            seed=int(row[3]),
            success=row[4] == "true",
            completion_time=float(row[5]) if row[5] else None,
            failure_mode=row[6] or None,
            waypoints_reached=int(row[7]),
        )


def waypoint_manager(
    state: AircraftState, scenario: ScenarioConfig, current_index: int
) -> tuple[np.ndarray | str, int]:
    """Advance the active waypoint on capture.

    Returns the active waypoint (or DONE after the last capture) and the
    possibly advanced index.  Capture requires the slant range strictly
    below the threshold; at most one waypoint advances per call.
    """
    n = scenario.waypoints.shape[0]
    if not 0 <= current_index <= n:
        raise ValueError(f"waypoint index {current_index} out of range")
    if current_index == n:
        return DONE, current_index
    _, slant, _ = control.waypoint_guidance(state, scenario.waypoints[current_index])
    if slant < scenario.capture_radius:
        current_index += 1
        if current_index == n:
            return DONE, current_index
    return scenario.waypoints[current_index], current_index


def done_reference(state: AircraftState, throttle_trim: float) -> control.ReferenceVector:
    """Level-flight hold used once the mission reaches Done."""
    return control.ReferenceVector(nz=0.0, ps=0.0, nyr=0.0, throttle=throttle_trim)


@dataclass(frozen=True)
class MissionContext:
    """Per-(scenario, aircraft, gains) immutable setup shared across runs.

    Building a context solves the trim point and synthesizes controller
    gains once; contexts are read-only and safe to share between
    concurrent runs.
    """

    scenario: ScenarioConfig
    params: AircraftParams
    controller: control.Controller
    x0: np.ndarray

    @classmethod
    def prepare(
        cls,
        scenario: ScenarioConfig,
        params: AircraftParams | None = None,
        gains_path: str | Path | None = None,
    ) -> "MissionContext":
        params = params if params is not None else AircraftParams.load()
        trim_state, trim_cmd = trim(scenario.initial_vt, scenario.initial_alt, params)
        ctrl = control.load_controller(params, trim_state, trim_cmd, gains_path)
        x0 = trim_state.to_array()
        x0[5] = scenario.initial_heading
        x0[9] = scenario.initial_position[0]
        x0[10] = scenario.initial_position[1]
        x0.setflags(write=False)
        return cls(scenario=scenario, params=params, controller=ctrl, x0=x0)


@dataclass
class MissionResult:
    record: RunRecord
    trajectory: np.ndarray | None = None  # (rows, 23) when capture was enabled


def run_mission(
    ctx: MissionContext,
    run: RunConfig,
    run_id: int = 0,
    capture_trajectory: bool = False,
    schedule: channel.LinkSchedule | None = None,
) -> MissionResult:
    """Execute one mission run to termination.

    The link schedule is presampled for the whole horizon (or injected
    for tests), discretized to the step grid, and the remote command
    stream is shifted by the round-trip delay.  All mid-run anomalies
    terminate the run with a failure mode; this function only raises for
    configuration errors detected before the loop.
    """
    sc = ctx.scenario
    n_steps = sc.n_steps
    if schedule is None:
        schedule = channel.sample_link_schedule(run.p_a, sc.time_limit + 1.0, run.seed)
    mask = channel.make_mask(schedule, sc.dt, n_steps + 1)
    depth = channel.delay_depth(run.epsilon, sc.dt)

    capture = 1 if capture_trajectory else 0
    traj = (
        np.empty((n_steps + 2, kernels.TRAJ_COLS)) if capture_trajectory else np.empty((1, 1))
    )

    ctrl = ctx.controller
    status, t_end, wp_reached, rows = kernels.mission_loop(
        ctx.x0,
        ctrl.trim_cmd.to_array(),
        ctrl.alpha_trim,
        *ctx.params.arrays(),
        ctrl.gains.k_long,
        ctrl.gains.k_lat,
        ctrl.autopilot.to_array(),
        sc.waypoints,
        sc.capture_radius,
        sc.cruise_vt,
        sc.dt,
        n_steps,
        mask,
        depth,
        kernels.MODE_ZERO
        if run.loss_policy.mode is channel.LossMode.ZERO_CONTROL
        else kernels.MODE_FAILSAFE,
        kernels.THR_ZERO
        if run.loss_policy.throttle is channel.ThrottleOnLoss.ZERO
        else kernels.THR_HOLD_LAST,
        capture,
        traj,
    )

    success = status == kernels.STATUS_SUCCESS
    record = RunRecord(
        run_id=run_id,
        p_a=run.p_a,
        epsilon=run.epsilon,
        seed=run.seed,
        success=success,
        completion_time=float(t_end) if success else None,
        failure_mode=None if success else FAILURE_MODES[status],
        waypoints_reached=int(wp_reached),
    )
    return MissionResult(
        record=record, trajectory=traj[:rows] if capture_trajectory else None
    )


def export_trajectory(result: MissionResult, path: str | Path) -> None:
    """Write the captured trajectory as CSV."""
    if result.trajectory is None:
        raise ValueError("run was executed without trajectory capture")
    try:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(TRAJECTORY_COLUMNS)
            for row in result.trajectory:
                writer.writerow([f"{v:.10g}" for v in row[:21]] + [int(row[21]), int(row[22])])
    except OSError as exc:
        raise ConfigError(f"cannot write trajectory to {path}: {exc}") from exc
