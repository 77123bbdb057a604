"""Required-communication-performance metrics for an on/off service.

The communication service is a two-state continuous-time Markov chain:
sojourns in the available ("on") state are Exp(lambda_off), sojourns in
the unavailable ("off") state are Exp(lambda_on).  All functions are pure
and return probabilities in [0, 1]; out-of-range inputs raise ValueError
rather than being clamped.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from scipy.integrate import quad

UNIT_SUM_TOL = 1e-12


@dataclass(frozen=True)
class RcpRates:
    """Transition rates of the on/off service chain (1/s).

    ``lambda_on`` drives off->on, ``lambda_off`` drives on->off.  With
    ``unit_sum=True`` the rates are additionally required to satisfy
    lambda_on + lambda_off = 1, in which case the steady-state
    availability equals lambda_on directly.
    """

    lambda_on: float
    lambda_off: float
    unit_sum: bool = field(default=False)

    def __post_init__(self):
        if self.lambda_on < 0.0 or self.lambda_off < 0.0:
            raise ValueError("transition rates must be non-negative")
        if self.lambda_on + self.lambda_off <= 0.0:
            raise ValueError("at least one transition rate must be positive")
        if self.unit_sum and abs(self.lambda_on + self.lambda_off - 1.0) > UNIT_SUM_TOL:
            raise ValueError(
                f"unit-sum convention requires lambda_on + lambda_off = 1, "
                f"got {self.lambda_on + self.lambda_off!r}"
            )

    @classmethod
    def from_availability(cls, p_a: float) -> "RcpRates":
        """Unit-sum rates with steady-state availability ``p_a``."""
        if not 0.0 < p_a <= 1.0:
            raise ValueError(f"availability must be in (0, 1], got {p_a}")
        return cls(lambda_on=p_a, lambda_off=1.0 - p_a, unit_sum=True)

    @property
    def mean_on_s(self) -> float:
        return math.inf if self.lambda_off == 0.0 else 1.0 / self.lambda_off

    @property
    def mean_off_s(self) -> float:
        return math.inf if self.lambda_on == 0.0 else 1.0 / self.lambda_on


@dataclass(frozen=True)
class MessageSpec:
    """A message of ``size_bits`` sent over a ``bitrate`` bits/s link."""

    size_bits: float
    bitrate: float

    def __post_init__(self):
        if self.size_bits <= 0.0:
            raise ValueError(f"message size must be positive, got {self.size_bits}")
        if self.bitrate <= 0.0:
            raise ValueError(f"bitrate must be positive, got {self.bitrate}")

    @property
    def tau_msg(self) -> float:
        """Transmission duration in seconds."""
        return self.size_bits / self.bitrate


def message_duration(size_bits: float, bitrate: float) -> float:
    """Seconds needed to move ``size_bits`` at ``bitrate`` bits/s."""
    return MessageSpec(size_bits, bitrate).tau_msg


def availability_at(rates: RcpRates, t: float) -> float:
    """Probability the service is on at time ``t``, starting on at t=0.

    Solves d/dt P = lambda_on - (lambda_on + lambda_off) P with P(0) = 1:
    an exponential relaxation from 1 to the steady-state ratio.
    """
    if t < 0.0:
        raise ValueError(f"time must be non-negative, got {t}")
    total = rates.lambda_on + rates.lambda_off
    steady = rates.lambda_on / total
    return (1.0 - steady) * math.exp(-total * t) + steady


def steady_state_availability(rates: RcpRates) -> float:
    """Long-run fraction of time in the on state.

    Equals E[T_on] / (E[T_on] + E[T_off]).
    """
    return rates.lambda_on / (rates.lambda_on + rates.lambda_off)


def continuity(rates: RcpRates, tau: float) -> float:
    """Probability an on period, once started, lasts at least ``tau`` seconds.

    The on sojourn is exponential, so this is exp(-lambda_off * tau)
    regardless of how long the service has already been on.
    """
    if tau < 0.0:
        raise ValueError(f"duration must be non-negative, got {tau}")
    return math.exp(-rates.lambda_off * tau)


def communicability(p_a: float, msg: MessageSpec, epsilon: float) -> float:
    """Probability a message sent at a random time goes through.

    Combines availability, continuity, and transaction time: the service
    must be on at the send instant (probability ``p_a``) and stay on for
    the message duration plus the latency ``epsilon``.  Closed form:
    p_a * exp(-(1 - p_a) * (tau_msg + epsilon)).
    """
    return communicability_from_duration(p_a, msg.tau_msg, epsilon)


def communicability_from_duration(p_a: float, tau_msg: float, epsilon: float) -> float:
    """Communicability for an explicit message duration in seconds."""
    if not 0.0 <= p_a <= 1.0:
        raise ValueError(f"availability must be in [0, 1], got {p_a}")
    if tau_msg < 0.0:
        raise ValueError(f"message duration must be non-negative, got {tau_msg}")
    if epsilon < 0.0:
        raise ValueError(f"latency must be non-negative, got {epsilon}")
    return p_a * math.exp(-(1.0 - p_a) * (tau_msg + epsilon))


def communicability_numeric_oracle(
    p_a: float, tau_msg: float, epsilon: float, tail_rate_factor: float = 50.0
) -> float:
    """Communicability evaluated by quadrature instead of the closed form.

    Integrates the residual-life ratio directly: with f the exponential
    density of the time since the service last came up (rate 1 - p_a),
    the value is p_a * [integral over tau >= tau_msg+eps of
    (tau - (tau_msg+eps)) f(tau) dtau] / [integral of tau f(tau) dtau].
    Kept free of the closed form so it can serve as an independent test
    oracle.  The truncation horizon tail_rate_factor/(1-p_a) leaves tail
    mass below 1e-12.
    """
    if not 0.0 <= p_a <= 1.0:
        raise ValueError(f"availability must be in [0, 1], got {p_a}")
    if tau_msg < 0.0 or epsilon < 0.0:
        raise ValueError("message duration and latency must be non-negative")
    if p_a == 1.0:
        # Degenerate density (rate 0): the service is always on.
        return 1.0

    rate = 1.0 - p_a
    horizon = tail_rate_factor / rate
    deadline = tau_msg + epsilon

    def density(tau: float) -> float:
        return rate * math.exp(-rate * tau)

    num, num_err = quad(
        lambda tau: (tau - deadline) * density(tau),
        deadline,
        deadline + horizon,
        epsabs=1e-13,
        epsrel=1e-13,
        limit=200,
    )
    den, den_err = quad(
        lambda tau: tau * density(tau), 0.0, horizon, epsabs=1e-13, epsrel=1e-13, limit=200
    )
    if den <= 0.0 or num_err > 1e-10 or den_err > 1e-10:
        raise ArithmeticError(
            f"quadrature failed to converge (num_err={num_err}, den_err={den_err})"
        )
    return p_a * num / den
