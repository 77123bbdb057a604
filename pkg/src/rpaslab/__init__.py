"""Reliability lab for remotely piloted aircraft under command-link
loss and latency: flight simulation, communication-performance metrics,
and Monte Carlo mission envelopes."""

__version__ = "0.1.0"
