"""Aircraft parameter loading and packing.

Parameters live in a versioned JSON data file (mass/geometry/inertia,
polynomial aerodynamic coefficients, engine tables, envelope and actuator
limits).  ``AircraftParams`` validates the file and packs everything into
flat float64 arrays consumed by the compiled kernels.  Instances are
immutable after load and safe to share across runs.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import ConfigError

DEG = math.pi / 180.0

# scalar-array layout (see AircraftParams.scalars)
S_MASS, S_G, S_AREA, S_SPAN, S_CHORD = 0, 1, 2, 3, 4
S_XCG, S_XCGR, S_XA, S_KAPPA = 5, 6, 7, 8
S_GEAR_BREAK, S_GEAR_LO, S_GEAR_HI, S_GEAR_OFF = 9, 10, 11, 12
S_AB_POW, S_ALT_STEP, S_MACH_STEP = 13, 14, 15
N_SCALARS = 16

# limits-array layout
L_DE, L_DA, L_DR = 0, 1, 2
L_ALPHA_MIN, L_ALPHA_MAX, L_BETA_MAX = 3, 4, 5
L_THETA_GUARD, L_VT_MIN = 6, 7
N_LIMITS = 8

# polynomial block order and lengths; the packed array concatenates them
POLY_BLOCKS = (
    ("x_force", 7),
    ("x_force_q", 5),
    ("side_force", 3),
    ("side_force_p", 4),
    ("side_force_r", 4),
    ("z_force", 6),
    ("z_force_q", 5),
    ("roll", 8),
    ("roll_p", 4),
    ("roll_r", 5),
    ("roll_aileron", 7),
    ("roll_rudder", 7),
    ("pitch", 8),
    ("pitch_q", 6),
    ("yaw", 7),
    ("yaw_p", 5),
    ("yaw_r", 3),
    ("yaw_aileron", 10),
    ("yaw_rudder", 6),
)
POLY_LEN = sum(n for _, n in POLY_BLOCKS)

SUPPORTED_SCHEMA = 1


def default_params_path() -> Path:
    return Path(resources.files("rpaslab").joinpath("data/f16_params.json"))


def compute_inertia_coefficients(ixx: float, iyy: float, izz: float, ixz: float) -> np.ndarray:
    """The nine moment-equation coefficients derived from the inertia tensor."""
    gamma = ixx * izz - ixz * ixz
    if gamma <= 0.0:
        raise ConfigError(f"inertia tensor is not physical: ixx*izz - ixz^2 = {gamma} <= 0")
    return np.array(
        [
            ((iyy - izz) * izz - ixz * ixz) / gamma,
            ixz * (ixx - iyy + izz) / gamma,
            izz / gamma,
            ixz / gamma,
            (izz - ixx) / iyy,
            ixz / iyy,
            1.0 / iyy,
            ((ixx - iyy) * ixx - ixz * ixz) / gamma,
            ixx / gamma,
        ]
    )


def _require(cond: bool, msg: str):
    if not cond:
        raise ConfigError(msg)


@dataclass(frozen=True)
class AircraftParams:
    """Validated, kernel-ready aircraft parameter set."""

    raw: dict = field(repr=False)
    source: str
    version_hash: str
    scalars: np.ndarray = field(repr=False)
    inertia_coefs: np.ndarray = field(repr=False)
    atmosphere: np.ndarray = field(repr=False)
    poly: np.ndarray = field(repr=False)
    thrust_idle: np.ndarray = field(repr=False)
    thrust_mil: np.ndarray = field(repr=False)
    thrust_max: np.ndarray = field(repr=False)
    limits: np.ndarray = field(repr=False)

    @classmethod
    def load(cls, path: str | Path | None = None) -> "AircraftParams":
        p = Path(path) if path is not None else default_params_path()
        try:
            blob = p.read_bytes()
        except OSError as exc:
            raise ConfigError(f"cannot read parameter file {p}: {exc}") from exc
        try:
            raw = json.loads(blob)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"parameter file {p} is not valid JSON: {exc}") from exc
        if raw.get("schema_version") != SUPPORTED_SCHEMA:
            raise ConfigError(
                f"parameter file {p}: schema_version {raw.get('schema_version')!r} "
                f"not supported (expected {SUPPORTED_SCHEMA})"
            )
        version_hash = hashlib.sha256(blob).hexdigest()[:12]
        return cls.from_dict(raw, source=str(p), version_hash=version_hash)

    @classmethod
    def from_dict(cls, raw: dict, source: str = "<dict>", version_hash: str = "unversioned"):
        for key in ("mass_slug", "gravity_ftps2", "wing_area_ft2", "wing_span_ft", "mean_chord_ft"):
            _require(key in raw and raw[key] > 0.0, f"{key} must be present and positive")

        inertia = raw["inertia_slugft2"]
        ixx, iyy, izz, ixz = (inertia[k] for k in ("ixx", "iyy", "izz", "ixz"))
        _require(ixx > 0.0 and iyy > 0.0 and izz > 0.0, "principal inertias must be positive")
        _require(iyy * (ixx * izz - ixz * ixz) > 0.0, "inertia tensor must be positive definite")
        cfs = compute_inertia_coefficients(ixx, iyy, izz, ixz)

        eng = raw["engine"]
        _require(eng["power_lag_s"] > 0.0, "engine power_lag_s must be positive")
        alt_grid = np.asarray(eng["alt_grid_ft"], dtype=float)
        mach_grid = np.asarray(eng["mach_grid"], dtype=float)
        for name, grid in (("alt_grid_ft", alt_grid), ("mach_grid", mach_grid)):
            steps = np.diff(grid)
            _require(
                len(grid) >= 2 and np.allclose(steps, steps[0]) and steps[0] > 0.0,
                f"engine {name} must be a uniform increasing grid",
            )
        tables = {}
        for name in ("thrust_idle_lbf", "thrust_mil_lbf", "thrust_max_lbf"):
            tab = np.asarray(eng[name], dtype=float)
            _require(
                tab.shape == (len(alt_grid), len(mach_grid)),
                f"engine {name} must be shaped (n_alt, n_mach)",
            )
            tables[name] = np.ascontiguousarray(tab)

        gear = eng["gearing"]
        atm = raw["atmosphere"]
        atmosphere = np.array(
            [
                atm["rho0_slugft3"],
                atm["temp0_rankine"],
                atm["temp_lapse_per_ft"],
                atm["stratosphere_alt_ft"],
                atm["stratosphere_temp_rankine"],
                atm["gas_constant_ftlb_slugR"],
                atm["gamma"],
                atm["density_exponent"],
            ]
        )
        _require(np.all(atmosphere[np.r_[0, 1, 4, 5, 6, 7]] > 0.0), "atmosphere constants must be positive")

        poly_raw = raw["aero_poly"]
        chunks = []
        for name, n in POLY_BLOCKS:
            block = np.asarray(poly_raw[name], dtype=float)
            _require(block.shape == (n,), f"aero_poly.{name} must have {n} coefficients")
            _require(np.all(np.isfinite(block)), f"aero_poly.{name} contains non-finite values")
            chunks.append(block)
        poly = np.concatenate(chunks)

        env = raw["envelope"]
        act = raw["actuator_limits_deg"]
        _require(env["alpha_min_deg"] < env["alpha_max_deg"], "alpha envelope must be ordered")
        _require(0.0 < env["pitch_guard_deg"] < 90.0, "pitch guard must be in (0, 90) deg")
        limits = np.array(
            [
                act["elevator"] * DEG,
                act["aileron"] * DEG,
                act["rudder"] * DEG,
                env["alpha_min_deg"] * DEG,
                env["alpha_max_deg"] * DEG,
                env["beta_max_deg"] * DEG,
                env["pitch_guard_deg"] * DEG,
                env["min_airspeed_ftps"],
            ]
        )

        scalars = np.zeros(N_SCALARS)
        scalars[S_MASS] = raw["mass_slug"]
        scalars[S_G] = raw["gravity_ftps2"]
        scalars[S_AREA] = raw["wing_area_ft2"]
        scalars[S_SPAN] = raw["wing_span_ft"]
        scalars[S_CHORD] = raw["mean_chord_ft"]
        scalars[S_XCG] = raw["cg_chord_frac"]
        scalars[S_XCGR] = raw["cg_ref_chord_frac"]
        scalars[S_XA] = raw["accel_station_ft"]
        scalars[S_KAPPA] = eng["power_lag_s"]
        scalars[S_GEAR_BREAK] = gear["throttle_breakpoint"]
        scalars[S_GEAR_LO] = gear["slope_low"]
        scalars[S_GEAR_HI] = gear["slope_high"]
        scalars[S_GEAR_OFF] = gear["offset_high"]
        scalars[S_AB_POW] = eng["afterburner_power_pct"]
        scalars[S_ALT_STEP] = alt_grid[1] - alt_grid[0]
        scalars[S_MACH_STEP] = mach_grid[1] - mach_grid[0]

        obj = cls(
            raw=raw,
            source=source,
            version_hash=version_hash,
            scalars=scalars,
            inertia_coefs=cfs,
            atmosphere=atmosphere,
            poly=poly,
            thrust_idle=tables["thrust_idle_lbf"],
            thrust_mil=tables["thrust_mil_lbf"],
            thrust_max=tables["thrust_max_lbf"],
            limits=limits,
        )
        for arr in obj.arrays():
            arr.setflags(write=False)
        return obj

    def arrays(self) -> tuple[np.ndarray, ...]:
        """Kernel argument pack, in the order every kernel expects."""
        return (
            self.scalars,
            self.inertia_coefs,
            self.atmosphere,
            self.poly,
            self.thrust_idle,
            self.thrust_mil,
            self.thrust_max,
            self.limits,
        )

    @property
    def mass(self) -> float:
        return float(self.scalars[S_MASS])

    @property
    def gravity(self) -> float:
        return float(self.scalars[S_G])

    @property
    def actuator_limits(self) -> np.ndarray:
        """(elevator, aileron, rudder) saturation bounds in rad."""
        return self.limits[:3].copy()
