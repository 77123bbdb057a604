"""Cascaded flight controller.

Outer loop (autopilot): PD laws that turn waypoint geometry into a
reference vector [normal load factor, stability-axis roll rate,
side-accel-plus-yaw-rate, throttle].  Inner loop: two decoupled
state-feedback regulators with tracking-error integrals, one
longitudinal (elevator) and one lateral (aileron+rudder), with gains
synthesized by solving the continuous algebraic Riccati equation on the
linearized subsystems about trim.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.linalg import solve_continuous_are

from . import kernels
from .dynamics import AircraftState, CommandVector
from .errors import ConfigError, ConvergenceError
from .params import AircraftParams

SUPPORTED_SCHEMA = 1


@dataclass(frozen=True)
class ReferenceVector:
    """Autopilot output consumed by the inner loop."""

    nz: float = 0.0        # normal load factor above 1 g, in g
    ps: float = 0.0        # stability-axis roll rate, rad/s
    nyr: float = 0.0       # side accel (g) + yaw rate (rad/s) blend; 0 in standard ops
    throttle: float = 0.0  # fraction 0..1


@dataclass(frozen=True)
class AutopilotGains:
    k_psi_p: float
    k_psi_d: float
    k_phi_p: float
    k_phi_d: float
    k_z_p: float
    k_z_d: float
    k_vt: float
    phi_max: float
    nz_limit: float
    integrator_limits: tuple[float, float, float]

    def __post_init__(self):
        if min(self.k_psi_p, self.k_phi_p, self.k_z_p, self.k_vt) <= 0.0:
            raise ConfigError("proportional autopilot gains must be positive")
        if min(self.k_psi_d, self.k_phi_d, self.k_z_d) < 0.0:
            raise ConfigError("derivative autopilot gains must be non-negative")
        if not 0.0 < self.phi_max < math.pi / 2:
            raise ConfigError("bank limit must be in (0, pi/2) rad")
        if self.nz_limit <= 0.0 or min(self.integrator_limits) <= 0.0:
            raise ConfigError("nz limit and integrator limits must be positive")

    def to_array(self) -> np.ndarray:
        arr = np.zeros(kernels.N_AP)
        arr[kernels.AP_KPSI_P] = self.k_psi_p
        arr[kernels.AP_KPSI_D] = self.k_psi_d
        arr[kernels.AP_KPHI_P] = self.k_phi_p
        arr[kernels.AP_KPHI_D] = self.k_phi_d
        arr[kernels.AP_KZ_P] = self.k_z_p
        arr[kernels.AP_KZ_D] = self.k_z_d
        arr[kernels.AP_KVT] = self.k_vt
        arr[kernels.AP_PHI_MAX] = self.phi_max
        arr[kernels.AP_NZ_LIMIT] = self.nz_limit
        arr[kernels.AP_INT_NZ] = self.integrator_limits[0]
        arr[kernels.AP_INT_PS] = self.integrator_limits[1]
        arr[kernels.AP_INT_NYR] = self.integrator_limits[2]
        return arr


@dataclass(frozen=True)
class LinearModel:
    """Small-signal plant about trim.

    Longitudinal subsystem: states [alpha, q], input elevator.
    Lateral subsystem: states [beta, p, r], inputs [aileron, rudder].
    Measurement rows give the load-factor outputs used by the tracking
    integrals (with direct feedthrough terms).
    """

    a_long: np.ndarray
    b_long: np.ndarray
    a_lat: np.ndarray
    b_lat: np.ndarray
    nz_x: np.ndarray
    nz_u: float
    ny_x: np.ndarray
    ny_u: np.ndarray
    alpha_trim: float

    def augmented_longitudinal(self) -> tuple[np.ndarray, np.ndarray]:
        """3-state system [alpha, q, integral of nz error] for gain synthesis."""
        a = np.zeros((3, 3))
        a[:2, :2] = self.a_long
        a[2, :2] = self.nz_x
        b = np.zeros((3, 1))
        b[:2, 0] = self.b_long[:, 0]
        b[2, 0] = self.nz_u
        return a, b

    def augmented_lateral(self) -> tuple[np.ndarray, np.ndarray]:
        """5-state system [beta, p, r, int e_ps, int e_nyr]."""
        ca = math.cos(self.alpha_trim)
        sa = math.sin(self.alpha_trim)
        ps_row = np.array([0.0, ca, sa])
        nyr_row = self.ny_x + np.array([0.0, 0.0, 1.0])
        a = np.zeros((5, 5))
        a[:3, :3] = self.a_lat
        a[3, :3] = ps_row
        a[4, :3] = nyr_row
        b = np.zeros((5, 2))
        b[:3, :] = self.b_lat
        b[4, :] = self.ny_u
        return a, b


@dataclass(frozen=True)
class GainSet:
    """Inner-loop feedback gains plus their certified stability margins."""

    k_long: np.ndarray
    k_lat: np.ndarray
    long_eigenvalues: np.ndarray = field(repr=False)
    lat_eigenvalues: np.ndarray = field(repr=False)

    @property
    def slowest_eigenvalue(self) -> float:
        """Largest closed-loop real part over both loops (most negative is best)."""
        return float(
            max(self.long_eigenvalues.real.max(), self.lat_eigenvalues.real.max())
        )


@dataclass(frozen=True)
class GainSynthesisConfig:
    """State and control penalty matrices for the two regulators."""

    q_long: np.ndarray
    r_long: np.ndarray
    q_lat: np.ndarray
    r_lat: np.ndarray

    def __post_init__(self):
        for name, m, strict in (
            ("q_long", self.q_long, False),
            ("r_long", self.r_long, True),
            ("q_lat", self.q_lat, False),
            ("r_lat", self.r_lat, True),
        ):
            m = np.asarray(m, dtype=float)
            if m.ndim != 2 or m.shape[0] != m.shape[1]:
                raise ConfigError(f"{name} must be square")
            if not np.allclose(m, m.T, atol=1e-12):
                raise ConfigError(f"{name} must be symmetric")
            eig = np.linalg.eigvalsh(m)
            if strict and eig.min() <= 0.0:
                raise ConfigError(f"{name} must be positive definite")
            if not strict and eig.min() < -1e-12:
                raise ConfigError(f"{name} must be positive semidefinite")


def waypoint_guidance(
    state: AircraftState, waypoint: np.ndarray, psi_cmd_prev: float | None = None
) -> tuple[float, float, np.ndarray]:
    """Heading command and slant range to a NED waypoint.

    Heading zero lies along +north (the x axis); the command is the
    quadrant-correct bearing of the waypoint.  A horizontally coincident
    waypoint holds the previous command (or the current heading).
    """
    wp = np.asarray(waypoint, dtype=float)
    if wp.shape != (3,) or not np.all(np.isfinite(wp)):
        raise ValueError("waypoint must be a finite NED triple")
    prev = state.psi if psi_cmd_prev is None else psi_cmd_prev
    psi_cmd, slant = kernels.guidance(state.to_array(), wp[0], wp[1], wp[2], prev)
    deltas = wp - np.array([state.x_e, state.y_e, state.z_e])
    return float(psi_cmd), float(slant), deltas


def autopilot_references(
    state: AircraftState,
    psi_cmd: float,
    h_cmd: float,
    vt_cmd: float,
    gains: AutopilotGains,
    throttle_trim: float,
) -> ReferenceVector:
    """PD reference laws for heading/roll, altitude, and airspeed."""
    nz, ps, nyr, thr = kernels.reference_laws(
        state.to_array(), psi_cmd, h_cmd, vt_cmd, throttle_trim, gains.to_array()
    )
    return ReferenceVector(nz=float(nz), ps=float(ps), nyr=float(nyr), throttle=float(thr))


def llc_command(
    state: AircraftState,
    ref: ReferenceVector,
    gains: GainSet,
    integrators: np.ndarray,
    dt: float,
    trim_cmd: CommandVector,
    alpha_trim: float,
    params: AircraftParams,
    integrator_limits: tuple[float, float, float] | None = None,
) -> tuple[CommandVector, np.ndarray]:
    """Inner-loop command and the advanced tracking integrals.

    The integrals move by dt times the tracking error of the achieved
    load factors (measured with the command this call produces), with
    anti-windup freezing and magnitude clamping.
    """
    x = state.to_array()
    out_u = np.empty(4)
    out_unsat = np.empty(4)
    kernels.surface_commands(
        x, ref.throttle, integrators, gains.k_long, gains.k_lat,
        alpha_trim, trim_cmd.to_array(), params.limits, out_u, out_unsat,
    )
    deriv = np.empty(13)
    nz, ny = kernels.state_derivative(x, out_u, *params.arrays()[:7], deriv)
    ps = state.p * math.cos(state.alpha) + state.r * math.sin(state.alpha)
    nyr = ny + state.r
    new_integ = np.asarray(integrators, dtype=float).copy()
    ap = np.zeros(kernels.N_AP)
    lims3 = integrator_limits if integrator_limits is not None else DEFAULT_INTEGRATOR_LIMITS
    ap[kernels.AP_INT_NZ] = lims3[0]
    ap[kernels.AP_INT_PS] = lims3[1]
    ap[kernels.AP_INT_NYR] = lims3[2]
    kernels.advance_integrators(
        new_integ, nz - ref.nz, ps - ref.ps, nyr - ref.nyr, dt,
        out_unsat, gains.k_long, gains.k_lat, params.limits, ap,
    )
    return CommandVector.from_array(out_u), new_integ


def _wind_axis_state(vt, alpha, beta, phi, theta, alt, p, q, r, power):
    cb = math.cos(beta)
    return np.array(
        [
            vt * math.cos(alpha) * cb, vt * math.sin(beta), vt * math.sin(alpha) * cb,
            phi, theta, 0.0,
            p, q, r,
            0.0, 0.0, -alt,
            power,
        ]
    )


def linearize(
    trim_state: AircraftState, trim_cmd: CommandVector, params: AircraftParams
) -> LinearModel:
    """Central-difference small-signal model about trim.

    Longitudinal dynamics are reduced to the short-period pair (alpha, q)
    at fixed airspeed and pitch attitude; lateral dynamics to
    (beta, p, r) at wings level.  Measurement rows for the load factors
    are differenced the same way.
    """
    vt = trim_state.vt
    alt = trim_state.altitude
    alpha0 = trim_state.alpha
    theta0 = trim_state.theta
    power0 = trim_state.power
    u0 = trim_cmd.to_array()
    arrays = params.arrays()[:7]
    deriv = np.empty(13)

    def long_rates(alpha, q, de):
        x = _wind_axis_state(vt, alpha, 0.0, 0.0, theta0, alt, 0.0, q, 0.0, power0)
        uc = np.array([u0[0], de, 0.0, 0.0])
        nz, _ = kernels.state_derivative(x, uc, *arrays, deriv)
        udot, wdot = deriv[0], deriv[2]
        u_b, w_b = x[0], x[2]
        alphadot = (u_b * wdot - w_b * udot) / (u_b * u_b + w_b * w_b)
        return np.array([alphadot, deriv[7]]), float(nz)

    def lat_rates(beta, p, r, da, dr):
        x = _wind_axis_state(vt, alpha0, beta, 0.0, theta0, alt, p, 0.0, r, power0)
        uc = np.array([u0[0], u0[1], da, dr])
        _, ny = kernels.state_derivative(x, uc, *arrays, deriv)
        udot, vdot, wdot = deriv[0], deriv[1], deriv[2]
        u_b, v_b, w_b = x[0], x[1], x[2]
        vtdot = (u_b * udot + v_b * vdot + w_b * wdot) / vt
        betadot = (vdot * vt - v_b * vtdot) / (vt * vt * math.cos(beta))
        return np.array([betadot, deriv[6], deriv[8]]), float(ny)

    def central_diff(f, nominal, idx, n_out):
        h = 1e-6 * (1.0 + abs(nominal[idx]))
        hi = list(nominal)
        lo = list(nominal)
        hi[idx] += h
        lo[idx] -= h
        return (np.asarray(f(*hi)[0]) - np.asarray(f(*lo)[0])) / (2 * h), (
            f(*hi)[1] - f(*lo)[1]
        ) / (2 * h)

    nom_long = (alpha0, 0.0, u0[1])
    a_long = np.zeros((2, 2))
    b_long = np.zeros((2, 1))
    nz_x = np.zeros(2)
    for j in range(2):
        a_long[:, j], nz_x[j] = central_diff(long_rates, nom_long, j, 2)
    b_long[:, 0], nz_u = central_diff(long_rates, nom_long, 2, 2)

    nom_lat = (0.0, 0.0, 0.0, 0.0, 0.0)
    a_lat = np.zeros((3, 3))
    b_lat = np.zeros((3, 2))
    ny_x = np.zeros(3)
    ny_u = np.zeros(2)
    for j in range(3):
        a_lat[:, j], ny_x[j] = central_diff(lat_rates, nom_lat, j, 3)
    for j in range(2):
        b_lat[:, j], ny_u[j] = central_diff(lat_rates, nom_lat, 3 + j, 3)

    model = LinearModel(
        a_long=a_long, b_long=b_long, a_lat=a_lat, b_lat=b_lat,
        nz_x=nz_x, nz_u=float(nz_u), ny_x=ny_x, ny_u=ny_u, alpha_trim=alpha0,
    )
    for m in (a_long, b_long, a_lat, b_lat):
        if not np.all(np.isfinite(m)):
            raise ConfigError("linearization produced non-finite entries")
    return model


def synthesize_gains(a: np.ndarray, b: np.ndarray, q: np.ndarray, r: np.ndarray) -> np.ndarray:
    """Optimal state-feedback gain K = R^-1 B^T P from the Riccati solution.

    Raises ConvergenceError if no stabilizing solution exists or the
    closed loop fails the Hurwitz check.
    """
    a = np.atleast_2d(np.asarray(a, dtype=float))
    b = np.atleast_2d(np.asarray(b, dtype=float))
    q = np.atleast_2d(np.asarray(q, dtype=float))
    r = np.atleast_2d(np.asarray(r, dtype=float))
    try:
        p = solve_continuous_are(a, b, q, r)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError(f"Riccati solve failed: {exc}") from exc
    k = np.linalg.solve(r, b.T @ p)
    eig = np.linalg.eigvals(a - b @ k)
    if eig.real.max() >= 0.0:
        raise ConvergenceError(
            f"synthesized gains are not stabilizing (max Re eig = {eig.real.max():.3e})"
        )
    return k


def build_gain_set(model: LinearModel, cfg: GainSynthesisConfig) -> GainSet:
    """Synthesize both inner-loop gain matrices and certify stability."""
    a3, b3 = model.augmented_longitudinal()
    a5, b5 = model.augmented_lateral()
    k_long = synthesize_gains(a3, b3, cfg.q_long, cfg.r_long)[0]
    k_lat = synthesize_gains(a5, b5, cfg.q_lat, cfg.r_lat)
    return GainSet(
        k_long=np.ascontiguousarray(k_long),
        k_lat=np.ascontiguousarray(k_lat),
        long_eigenvalues=np.linalg.eigvals(a3 - b3 @ k_long.reshape(1, 3)),
        lat_eigenvalues=np.linalg.eigvals(a5 - b5 @ k_lat),
    )


def verify_gain_set(model: LinearModel, k_long: np.ndarray, k_lat: np.ndarray) -> GainSet:
    """Wrap externally supplied gains after checking the Hurwitz property."""
    k_long = np.asarray(k_long, dtype=float).reshape(3)
    k_lat = np.asarray(k_lat, dtype=float).reshape(2, 5)
    a3, b3 = model.augmented_longitudinal()
    a5, b5 = model.augmented_lateral()
    eig_long = np.linalg.eigvals(a3 - b3 @ k_long.reshape(1, 3))
    eig_lat = np.linalg.eigvals(a5 - b5 @ k_lat)
    if eig_long.real.max() >= 0.0 or eig_lat.real.max() >= 0.0:
        raise ConfigError(
            "supplied gain matrices do not stabilize the linearized plant "
            f"(max Re eig: long {eig_long.real.max():.3e}, lat {eig_lat.real.max():.3e})"
        )
    return GainSet(
        k_long=np.ascontiguousarray(k_long),
        k_lat=np.ascontiguousarray(k_lat),
        long_eigenvalues=eig_long,
        lat_eigenvalues=eig_lat,
    )


DEFAULT_INTEGRATOR_LIMITS = (2.0, 2.0, 2.0)


def default_gains_path() -> Path:
    from importlib import resources

    return Path(resources.files("rpaslab").joinpath("data/gains.json"))


@dataclass(frozen=True)
class Controller:
    """Everything the mission loop needs: outer gains, inner gains, trim."""

    autopilot: AutopilotGains
    gains: GainSet
    trim_state: AircraftState
    trim_cmd: CommandVector

    @property
    def alpha_trim(self) -> float:
        return self.trim_state.alpha


def load_controller(
    params: AircraftParams,
    trim_state: AircraftState,
    trim_cmd: CommandVector,
    gains_path: str | Path | None = None,
) -> Controller:
    """Build the full controller from a gain/config file.

    The file supplies the autopilot gains and either Riccati penalty
    matrices (gains are synthesized here) or precomputed gain matrices
    (accepted only if they pass the Hurwitz check on the linearized
    plant).
    """
    path = Path(gains_path) if gains_path is not None else default_gains_path()
    try:
        raw = json.loads(path.read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read gains file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"gains file {path} is not valid JSON: {exc}") from exc
    if raw.get("schema_version") != SUPPORTED_SCHEMA:
        raise ConfigError(f"gains file {path}: unsupported schema_version")

    ap = raw["autopilot"]
    try:
        autopilot = AutopilotGains(
            k_psi_p=ap["k_psi_p"],
            k_psi_d=ap["k_psi_d"],
            k_phi_p=ap["k_phi_p"],
            k_phi_d=ap["k_phi_d"],
            k_z_p=ap["k_z_p"],
            k_z_d=ap["k_z_d"],
            k_vt=ap["k_vt"],
            phi_max=ap["phi_max_deg"] * math.pi / 180.0,
            nz_limit=ap["nz_limit_g"],
            integrator_limits=tuple(ap.get("integrator_limits", DEFAULT_INTEGRATOR_LIMITS)),
        )
    except KeyError as exc:
        raise ConfigError(f"gains file {path}: missing autopilot key {exc}") from exc

    model = linearize(trim_state, trim_cmd, params)
    llc = raw["llc"]
    if "k_long" in llc or "k_lat" in llc:
        if not ("k_long" in llc and "k_lat" in llc):
            raise ConfigError(f"gains file {path}: k_long and k_lat must come together")
        gains = verify_gain_set(model, np.asarray(llc["k_long"]), np.asarray(llc["k_lat"]))
    else:
        try:
            cfg = GainSynthesisConfig(
                q_long=np.diag(llc["q_long"]),
                r_long=np.diag(llc["r_long"]),
                q_lat=np.diag(llc["q_lat"]),
                r_lat=np.diag(llc["r_lat"]),
            )
        except KeyError as exc:
            raise ConfigError(f"gains file {path}: missing llc key {exc}") from exc
        gains = build_gain_set(model, cfg)

    return Controller(
        autopilot=autopilot, gains=gains, trim_state=trim_state, trim_cmd=trim_cmd
    )
