"""Stochastic command-link realization.

A link realization is an alternating sequence of on/off intervals drawn
from the two-state chain in :mod:`rpaslab.rcp` under the unit-sum
convention (rates lambda_on = p_a, lambda_off = 1 - p_a).  The schedule
starts in the on state.  Sampling is reproducible: a given
(p_a, horizon, seed) triple always yields the same realization, via a
counter-based generator and inverse-CDF exponential draws.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from enum import Enum

import numpy as np


class LossMode(Enum):
    """What command the aircraft applies while the link is down."""

    FAILSAFE_REFERENCE = "failsafe-reference"
    ZERO_CONTROL = "zero-control"


class ThrottleOnLoss(Enum):
    HOLD_LAST = "hold-last"
    ZERO = "zero"


@dataclass(frozen=True)
class LossPolicy:
    mode: LossMode = LossMode.FAILSAFE_REFERENCE
    throttle: ThrottleOnLoss = ThrottleOnLoss.HOLD_LAST

    @classmethod
    def parse(cls, mode: str, throttle: str = "hold-last") -> "LossPolicy":
        return cls(LossMode(mode), ThrottleOnLoss(throttle))


@dataclass(frozen=True)
class LinkSchedule:
    """Alternating on/off intervals covering at least ``horizon`` seconds.

    ``durations[i]`` is the length of interval i; even indices are on,
    odd are off.  ``boundaries`` holds the cumulative start times with a
    leading 0, so interval i spans [boundaries[i], boundaries[i+1]).
    """

    durations: np.ndarray
    horizon: float
    p_a: float
    seed: int

    def __post_init__(self):
        if np.any(self.durations <= 0.0):
            raise ValueError("interval durations must be positive")
        if float(self.durations.sum()) < self.horizon:
            raise ValueError("schedule does not cover the horizon")
        boundaries = np.concatenate(([0.0], np.cumsum(self.durations)))
        object.__setattr__(self, "_boundaries", boundaries)

    @property
    def boundaries(self) -> np.ndarray:
        return self._boundaries

    def intervals(self) -> list[tuple[str, float]]:
        """Interval list as (state, duration) pairs, on first."""
        return [
            ("on" if i % 2 == 0 else "off", float(d)) for i, d in enumerate(self.durations)
        ]

    def on_fraction(self) -> float:
        """Fraction of [0, horizon] spent in the on state."""
        b = self._boundaries
        clipped = np.minimum(b, self.horizon)
        on_time = float(np.sum(clipped[1::2] - clipped[0:-1:2]))
        return on_time / self.horizon


def _sample_exponentials(rng: np.random.Generator, rate: float, n: int) -> np.ndarray:
    """Exponential draws via inverse CDF, strictly positive."""
    u = rng.random(n)
    t = -np.log1p(-u) / rate
    # u == 0 has probability 2^-53 per draw but would yield a zero duration
    tiny = np.finfo(float).tiny
    return np.maximum(t, tiny)


def sample_link_schedule(p_a: float, horizon: float, seed: int) -> LinkSchedule:
    """Draw one link realization of at least ``horizon`` seconds.

    On durations ~ Exp(1 - p_a), off durations ~ Exp(p_a).  p_a = 1 is
    the lossless special case (one on interval); p_a = 0 is rejected
    because the link would never come up.
    """
    if not 0.0 < p_a <= 1.0:
        raise ValueError(f"availability must be in (0, 1], got {p_a}")
    if horizon <= 0.0:
        raise ValueError(f"horizon must be positive, got {horizon}")

    if p_a == 1.0:
        durations = np.array([horizon + 1.0])
        return LinkSchedule(durations, horizon, p_a, seed)

    rng = np.random.Generator(np.random.Philox(key=seed & 0xFFFFFFFFFFFFFFFF))
    rate_on = 1.0 - p_a   # ends an on interval
    rate_off = p_a        # ends an off interval
    mean_cycle = 1.0 / rate_on + 1.0 / rate_off

    chunks: list[np.ndarray] = []
    total = 0.0
    while total <= horizon:
        n_cycles = max(16, int((horizon - total) / mean_cycle * 1.2) + 16)
        on = _sample_exponentials(rng, rate_on, n_cycles)
        off = _sample_exponentials(rng, rate_off, n_cycles)
        block = np.empty(2 * n_cycles)
        block[0::2] = on
        block[1::2] = off
        chunks.append(block)
        total += float(block.sum())

    durations = np.concatenate(chunks)
    # trim to the first interval whose end strictly exceeds the horizon
    ends = np.cumsum(durations)
    last = int(np.searchsorted(ends, horizon, side="right"))
    return LinkSchedule(durations[: last + 1], horizon, p_a, seed)


def state_at(schedule: LinkSchedule, t: float) -> int:
    """Link state (1 on, 0 off) at time ``t``.

    A boundary instant belongs to the interval that starts there.
    """
    if not 0.0 <= t <= schedule.horizon:
        raise ValueError(f"t={t} outside schedule horizon [0, {schedule.horizon}]")
    idx = int(np.searchsorted(schedule.boundaries, t, side="right")) - 1
    return 1 - (idx % 2)


def make_mask(schedule: LinkSchedule, dt: float, n_steps: int) -> np.ndarray:
    """Discretized link states mask[k] = state at k*dt, as uint8."""
    if dt <= 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    if n_steps < 0:
        raise ValueError(f"n_steps must be non-negative, got {n_steps}")
    if n_steps > 0 and (n_steps - 1) * dt > schedule.horizon:
        raise ValueError("mask grid extends past the schedule horizon")
    t = np.arange(n_steps) * dt
    idx = np.searchsorted(schedule.boundaries, t, side="right") - 1
    return (1 - (idx % 2)).astype(np.uint8)


def dump_mask_csv(schedule: LinkSchedule, dt: float, n_steps: int, path) -> None:
    """Per-step link-state dump for debugging and plots."""
    mask = make_mask(schedule, dt, n_steps)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["step", "time_s", "link_state"])
        for k in range(n_steps):
            writer.writerow([k, f"{k * dt:.6f}", int(mask[k])])


def delay_depth(epsilon: float, dt: float) -> int:
    """Ring-buffer depth for a 2*epsilon round trip on a dt grid."""
    if epsilon < 0.0:
        raise ValueError(f"latency must be non-negative, got {epsilon}")
    if dt <= 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    return int(round(2.0 * epsilon / dt))


class DelayLine:
    """Fixed-depth shift of a command stream.

    Output at step k equals the input at step k - depth; the first
    ``depth`` outputs are the fill command (the trim command in a
    mission).  depth = 0 passes input through unchanged.  Instances hold
    per-run mutable state and must not be shared between runs.
    """

    def __init__(self, depth: int, fill: np.ndarray):
        if depth < 0:
            raise ValueError(f"depth must be non-negative, got {depth}")
        self.depth = depth
        self._fill = np.asarray(fill, dtype=float).copy()
        self._buf = np.tile(self._fill, (max(depth, 1), 1))
        self._head = 0

    def push(self, cmd: np.ndarray) -> np.ndarray:
        """Insert the newest command, return the one ``depth`` steps old."""
        if self.depth == 0:
            return np.asarray(cmd, dtype=float).copy()
        out = self._buf[self._head].copy()
        self._buf[self._head] = cmd
        self._head = (self._head + 1) % self.depth
        return out


def apply_link_policy(
    link_on: int,
    remote_delayed: np.ndarray,
    failsafe: np.ndarray,
    policy: LossPolicy,
) -> np.ndarray:
    """Select the command the aircraft actually applies this step.

    Link up: the delayed remote command.  Link down: either the onboard
    failsafe command (stabilizing references regulated to zero) or the
    literal all-zero command, per the policy mode.
    """
    if link_on:
        return np.asarray(remote_delayed, dtype=float)
    if policy.mode is LossMode.ZERO_CONTROL:
        return np.zeros_like(np.asarray(remote_delayed, dtype=float))
    return np.asarray(failsafe, dtype=float)
