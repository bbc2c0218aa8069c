"""Numerical diagnostics for Weil-Petersson circle homeomorphisms."""

__version__ = "0.1.0"

from .circle_map import CircleMap, compose, derivative, identity, invert, log_derivative, mobius, rotation, sine_map
from .diagnostics import metric_d, metric_d_prime, wp_membership
from .fourier_core import FourierSeries, GridFunction, fourier_coefficients, sobolev_profile, sobolev_seminorm

__all__ = [
    "CircleMap", "FourierSeries", "GridFunction", "compose", "derivative", "fourier_coefficients",
    "identity", "invert", "log_derivative", "metric_d", "metric_d_prime", "mobius", "rotation",
    "sine_map", "sobolev_profile", "sobolev_seminorm", "wp_membership",
]
