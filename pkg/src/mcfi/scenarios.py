"""Canned problem setups: 1-D Gaussian-bump and 2-D strip inversions."""
from __future__ import annotations

import numpy as np
from scipy.ndimage import gaussian_filter1d

from .burgers import SolverConfig
from .errors import ConfigError
from .model import GaussianBumps1D, Grid, Strips2D

X_STAR_1D = np.array([0.25, -0.15, 0.05, 0.15])
X_CHECK_1D = np.array([0.90, -0.15, 0.05, 0.15])
# 1-based strip labels of the sampled 2-D gradient check
CHECK_STRIPS_2D = (36, 41, 63, 76, 80, 83, 91, 92, 93, 98)

PROFILE_SMOOTHING_STRIPS = 3.0


def ramp_profile(y):
    """Symmetric ramp: 1 at |y| = 0.8 rising to 2 at y = 0, 1 outside the band."""
    y = np.asarray(y, dtype=float)
    a = 1.0 + (0.8 - np.abs(y)) / 0.8
    return np.where(np.abs(y) > 0.8, 1.0, a)


def _multi_peak_half(y):
    y = np.asarray(y, dtype=float)
    return np.select(
        [y < 0.16, y < 0.32, y < 0.48, y < 0.64],
        [1.0 + (3.0 - 1.0) / 0.16 * y,
         3.0 - (3.0 - 0.6) / 0.16 * (y - 0.16),
         0.6 + (2.0 - 0.6) / 0.16 * (y - 0.32),
         2.0 - (2.0 - 0.6) / 0.16 * (y - 0.48)],
        0.6 + (1.0 - 0.6) / 0.16 * (y - 0.64))


def multi_peak_profile(y):
    """Piecewise-linear multi-peak target, mirrored about y = 0 (unsmoothed)."""
    y = np.asarray(y, dtype=float)
    return np.where(np.abs(y) > 0.8, 1.0, _multi_peak_half(np.abs(y)))


def strip_profile(name, design, smooth=None):
    """Per-strip alpha values of a named profile sampled at strip centres.

    The multi-peak target is Gaussian-smoothed over strip indices
    (three-strip width, edge values clamped); the ramp is used as is unless
    ``smooth`` says otherwise.
    """
    yc = design.strip_centers()
    if name == "ramp":
        vals = ramp_profile(yc)
        smooth = False if smooth is None else smooth
    elif name == "multi_peak":
        vals = multi_peak_profile(yc)
        smooth = True if smooth is None else smooth
    else:
        raise ConfigError(f"unknown profile {name!r}")
    if smooth:
        vals = gaussian_filter1d(vals, PROFILE_SMOOTHING_STRIPS, mode="nearest")
    return vals


def burgers1d(n=161, **config_overrides):
    return GaussianBumps1D(), Grid.line(n), SolverConfig.burgers1d(**config_overrides)


def burgers2d(n=201, **config_overrides):
    return Strips2D(), Grid.square(n), SolverConfig.burgers2d(**config_overrides)
