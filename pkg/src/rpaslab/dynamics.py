"""Nonlinear 13-state flight plant: public API over the compiled kernels.

The canonical state uses body-axis velocities; wind-axis quantities
(airspeed, angle of attack, sideslip) are derived accessors.  All angles
are radians, lengths feet, forces lbf, consistent with the parameter
data file.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import root

from . import kernels
from .errors import ConvergenceError
from .params import (
    AircraftParams,
    L_THETA_GUARD,
    S_AREA,
    S_CHORD,
    S_G,
    S_MASS,
    S_SPAN,
    S_XCG,
    S_XCGR,
    compute_inertia_coefficients,
)

TRIM_RESIDUAL_TOL = 1e-6


@dataclass
class AircraftState:
    """The thirteen simulation states."""

    u: float = 0.0
    v: float = 0.0
    w: float = 0.0
    phi: float = 0.0
    theta: float = 0.0
    psi: float = 0.0
    p: float = 0.0
    q: float = 0.0
    r: float = 0.0
    x_e: float = 0.0
    y_e: float = 0.0
    z_e: float = 0.0
    power: float = 0.0

    @property
    def vt(self) -> float:
        return math.sqrt(self.u**2 + self.v**2 + self.w**2)

    @property
    def alpha(self) -> float:
        return math.atan2(self.w, self.u)

    @property
    def beta(self) -> float:
        return math.asin(max(-1.0, min(1.0, self.v / self.vt)))

    @property
    def altitude(self) -> float:
        return -self.z_e

    def to_array(self) -> np.ndarray:
        return np.array(
            [
                self.u, self.v, self.w,
                self.phi, self.theta, self.psi,
                self.p, self.q, self.r,
                self.x_e, self.y_e, self.z_e,
                self.power,
            ]
        )

    @classmethod
    def from_array(cls, x: np.ndarray) -> "AircraftState":
        return cls(*(float(v) for v in x))


@dataclass
class CommandVector:
    """Throttle fraction plus surface deflections (rad)."""

    throttle: float = 0.0
    elevator: float = 0.0
    aileron: float = 0.0
    rudder: float = 0.0

    def to_array(self) -> np.ndarray:
        return np.array([self.throttle, self.elevator, self.aileron, self.rudder])

    @classmethod
    def from_array(cls, u: np.ndarray) -> "CommandVector":
        return cls(*(float(v) for v in u))


def inertia_coefficients(params: AircraftParams) -> np.ndarray:
    """The nine rotational-dynamics coefficients from the inertia tensor."""
    inertia = params.raw["inertia_slugft2"]
    return compute_inertia_coefficients(
        inertia["ixx"], inertia["iyy"], inertia["izz"], inertia["ixz"]
    )


def aero_coefficients(
    alpha: float,
    beta: float,
    p: float,
    q: float,
    r: float,
    de: float,
    da: float,
    dr: float,
    vt: float,
    params: AircraftParams,
) -> np.ndarray:
    """Total aerodynamic coefficients (Cx, Cy, Cz, Cl, Cm, Cn).

    Valid inside the polynomial envelope; callers that step the plant are
    responsible for flagging envelope exits.
    """
    if vt <= 0.0:
        raise ValueError(f"airspeed must be positive, got {vt}")
    out = kernels.aero_coefficients(
        alpha, beta, de, da, dr, p, q, r, vt, params.scalars, params.poly
    )
    return np.array(out)


def in_envelope(alpha: float, beta: float, params: AircraftParams) -> bool:
    lims = params.limits
    return bool(lims[3] <= alpha <= lims[4] and abs(beta) <= lims[5])


def forces_moments(
    state: AircraftState, controls: CommandVector, params: AircraftParams
) -> tuple[np.ndarray, np.ndarray]:
    """Body-axis force (X+T, Y, Z incl. gravity) and moment (L, M, N) totals."""
    vt = state.vt
    if vt <= 0.0:
        raise ValueError("airspeed must be positive")
    mach, qbar = kernels.air_data(vt, state.altitude, params.atmosphere)
    cx, cy, cz, cl, cm, cn = kernels.aero_coefficients(
        state.alpha, state.beta,
        controls.elevator, controls.aileron, controls.rudder,
        state.p, state.q, state.r, vt, params.scalars, params.poly,
    )
    thrust = kernels.engine_thrust(
        state.power, state.altitude, mach, params.scalars,
        params.thrust_idle, params.thrust_mil, params.thrust_max,
    )
    s = params.scalars
    qs = qbar * s[S_AREA]
    mg = s[S_MASS] * s[S_G]
    grav = mg * np.array(
        [
            -math.sin(state.theta),
            math.cos(state.theta) * math.sin(state.phi),
            math.cos(state.theta) * math.cos(state.phi),
        ]
    )
    force = np.array([qs * cx + thrust, qs * cy, qs * cz]) + grav
    moment = qs * np.array([s[S_SPAN] * cl, s[S_CHORD] * cm, s[S_SPAN] * cn])
    return force, moment


def state_derivative(
    state: AircraftState, controls: CommandVector, params: AircraftParams
) -> np.ndarray:
    """Time derivative of the 13-state vector.

    Raises on the Euler pitch-singularity guard; inside the mission loop
    the same condition is recorded as a failure mode instead.
    """
    x = state.to_array()
    if not np.all(np.isfinite(x)):
        raise ValueError("state contains non-finite entries")
    if abs(state.theta) >= params.limits[L_THETA_GUARD]:
        raise ValueError(
            f"pitch angle {state.theta} rad violates the attitude-singularity guard"
        )
    out = np.empty(13)
    kernels.state_derivative(x, controls.to_array(), *params.arrays()[:7], out)
    return out


def measured_load_factors(
    state: AircraftState, controls: CommandVector, params: AircraftParams
) -> tuple[float, float]:
    """Normal and side load factor (g) at the accelerometer station."""
    out = np.empty(13)
    nz, ny = kernels.state_derivative(
        state.to_array(), controls.to_array(), *params.arrays()[:7], out
    )
    return float(nz), float(ny)


def rk4_step(
    state: AircraftState, controls: CommandVector, dt: float, params: AircraftParams
) -> AircraftState:
    """One fixed-step RK4 update with the command held over the step."""
    if dt <= 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    xout = np.empty(13)
    work = [np.empty(13) for _ in range(5)]
    kernels.rk4_step(
        state.to_array(), controls.to_array(), dt, *params.arrays()[:7], *work, xout
    )
    if not np.all(np.isfinite(xout)):
        raise ArithmeticError("integration produced non-finite state")
    return AircraftState.from_array(xout)


def _trim_residual(z: np.ndarray, vt: float, alt: float, params: AircraftParams) -> np.ndarray:
    alpha, de, power = z
    x = np.array(
        [
            vt * math.cos(alpha), 0.0, vt * math.sin(alpha),
            0.0, alpha, 0.0,
            0.0, 0.0, 0.0,
            0.0, 0.0, -alt,
            power,
        ]
    )
    throttle = kernels.inverse_gearing(power, params.scalars)
    uc = np.array([throttle, de, 0.0, 0.0])
    out = np.empty(13)
    kernels.state_derivative(x, uc, *params.arrays()[:7], out)
    return out[[0, 2, 7]]  # udot, wdot, qdot


def trim(
    vt: float,
    alt: float,
    params: AircraftParams,
    guess: tuple[float, float, float] = (0.03, -0.02, 10.0),
) -> tuple[AircraftState, CommandVector]:
    """Wings-level steady-state flight condition at (vt, alt).

    Solves for angle of attack, elevator, and engine power such that all
    dynamic state derivatives vanish; pitch equals the angle of attack so
    the climb rate is zero.  Raises ConvergenceError with the residual if
    the root-finder fails or the solution is out of envelope.
    """
    if vt <= 0.0 or alt <= 0.0:
        raise ValueError("trim targets must be positive")

    sol = root(
        _trim_residual, np.array(guess), args=(vt, alt, params), method="hybr",
        options={"xtol": 1e-13},
    )
    residual = np.abs(_trim_residual(sol.x, vt, alt, params)).max()
    if not sol.success or residual > TRIM_RESIDUAL_TOL:
        raise ConvergenceError(
            f"trim solve failed at vt={vt} ft/s, alt={alt} ft: "
            f"{sol.message} (max residual {residual:.3e})"
        )
    alpha, de, power = sol.x
    if not in_envelope(alpha, 0.0, params) or not 0.0 < power < 100.0:
        raise ConvergenceError(
            f"trim solution out of envelope: alpha={alpha:.4f} rad, power={power:.2f}%"
        )
    state = AircraftState(
        u=vt * math.cos(alpha), w=vt * math.sin(alpha), theta=alpha, z_e=-alt, power=power
    )
    cmd = CommandVector(
        throttle=float(kernels.inverse_gearing(power, params.scalars)), elevator=float(de)
    )
    return state, cmd


def trim_residual_norm(
    state: AircraftState, cmd: CommandVector, params: AircraftParams
) -> float:
    """Max magnitude over the ten non-navigation state derivatives."""
    deriv = state_derivative(state, cmd, params)
    return float(np.abs(deriv[[0, 1, 2, 3, 4, 5, 6, 7, 8, 12]]).max())


def euler_rotation(phi: float, theta: float, psi: float) -> np.ndarray:
    """Body-to-NED direction cosine matrix for the given Euler angles."""
    sph, cph = math.sin(phi), math.cos(phi)
    sth, cth = math.sin(theta), math.cos(theta)
    sps, cps = math.sin(psi), math.cos(psi)
    return np.array(
        [
            [cth * cps, sph * sth * cps - cph * sps, cph * sth * cps + sph * sps],
            [cth * sps, sph * sth * sps + cph * cps, cph * sth * sps - sph * cps],
            [-sth, sph * cth, cph * cth],
        ]
    )
