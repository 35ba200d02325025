"""Grids, trajectories, singular triplets and the design-to-alpha maps.

State vectors and design vectors are plain 1-D float arrays.  In 2-D the
state is the u-block followed by the v-block, each flattened row-major
(y outer, x inner), which is also the layout of every nodal field.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import DimensionError

X_EXTENT = (-1.0, 1.0)
Y_EXTENT = (-1.0, 1.0)


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Grid:
    """Uniform structured grid on [-1, 1] (1-D) or [-1, 1]^2 (2-D)."""

    dimension: int
    nx: int
    ny: int = 1

    def __post_init__(self):
        if self.dimension not in (1, 2):
            raise DimensionError(f"dimension must be 1 or 2, got {self.dimension}")
        if self.nx < 3 or (self.dimension == 2 and self.ny < 3):
            raise DimensionError("need at least 3 nodes per direction")
        if self.dimension == 1 and self.ny != 1:
            raise DimensionError("1-D grid must have ny == 1")

    @classmethod
    def line(cls, n=161):
        return cls(1, n)

    @classmethod
    def square(cls, n=201):
        return cls(2, n, n)

    @property
    def shape(self):
        """Array shape of one nodal field: (nx,) or (ny, nx)."""
        return (self.nx,) if self.dimension == 1 else (self.ny, self.nx)

    @property
    def n_nodes(self):
        return self.nx * self.ny

    @property
    def n_state(self):
        return self.n_nodes * self.dimension

    @property
    def x(self):
        return np.linspace(*X_EXTENT, self.nx)

    @property
    def y(self):
        if self.dimension == 1:
            raise DimensionError("1-D grid has no y coordinate")
        return np.linspace(*Y_EXTENT, self.ny)

    @property
    def dx(self):
        return (X_EXTENT[1] - X_EXTENT[0]) / (self.nx - 1)

    @property
    def dy(self):
        if self.dimension == 1:
            raise DimensionError("1-D grid has no y spacing")
        return (Y_EXTENT[1] - Y_EXTENT[0]) / (self.ny - 1)

    @property
    def spacings(self):
        """Spacings ordered like the array axes of a nodal field."""
        return (self.dx,) if self.dimension == 1 else (self.dy, self.dx)

    def node_coordinates(self):
        """Flattened (x, y) coordinates of every node; y is None in 1-D."""
        if self.dimension == 1:
            return self.x, None
        X, Y = np.meshgrid(self.x, self.y)
        return X.ravel(), Y.ravel()

    def split(self, state):
        """View a state vector as a list of per-component nodal arrays."""
        state = np.asarray(state)
        if state.shape != (self.n_state,):
            raise DimensionError(
                f"state has shape {state.shape}, grid expects ({self.n_state},)")
        return [c.reshape(self.shape) for c in np.split(state, self.dimension)]


@dataclass(frozen=True)
class Trajectory:
    """Forward-Euler trajectory.

    ``snapshots`` has shape (n_t, n_s); row k is u^(k+1).  ``dt_sequence[k]``
    is the step that advanced u^(k) to u^(k+1).
    """

    initial_state: np.ndarray
    snapshots: np.ndarray
    dt_sequence: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "initial_state", _frozen(self.initial_state))
        object.__setattr__(self, "snapshots", _frozen(self.snapshots))
        object.__setattr__(self, "dt_sequence", _frozen(self.dt_sequence))
        if self.snapshots.ndim != 2 or self.snapshots.shape[1] != self.initial_state.size:
            raise DimensionError("snapshots must have shape (n_t, n_s)")
        if self.snapshots.shape[0] != self.dt_sequence.size:
            raise DimensionError("snapshot count must equal dt_sequence length")

    @property
    def n_t(self):
        return self.snapshots.shape[0]

    @property
    def n_s(self):
        return self.initial_state.size

    @property
    def matrix(self):
        """Snapshot matrix U = [u^(1) ... u^(n_t)] of shape (n_s, n_t)."""
        return self.snapshots.T

    @property
    def times(self):
        return np.concatenate([[0.0], np.cumsum(self.dt_sequence)])

    def state(self, k):
        """u^(k) for k = 0..n_t."""
        return self.initial_state if k == 0 else self.snapshots[k - 1]


@dataclass(frozen=True)
class SingularTriplet:
    """One POD mode: spatial mode ``phi``, singular value ``sigma``, temporal
    coefficients ``v`` and its 0-based ``index`` in the ordering."""

    phi: np.ndarray
    sigma: float
    v: np.ndarray
    index: int = 0

    def __post_init__(self):
        object.__setattr__(self, "phi", _frozen(self.phi))
        object.__setattr__(self, "v", _frozen(self.v))
        object.__setattr__(self, "sigma", float(self.sigma))

    def flipped(self):
        return SingularTriplet(-self.phi, self.sigma, -self.v, self.index)


# -- design parametrizations --------------------------------------------------

@dataclass(frozen=True)
class GaussianBumps1D:
    """alpha(x) = baseline + sum_j x_j exp(-((x - c_j) / width)^2)."""

    centers: tuple = (-0.70, -0.15, 0.40, 0.75)
    width: float = 0.25
    baseline: float = 0.1
    lower: float = -0.35
    upper: float = 0.35

    @property
    def n_vars(self):
        return len(self.centers)

    @property
    def bounds(self):
        n = self.n_vars
        return np.full(n, self.lower), np.full(n, self.upper)

    def basis(self, grid):
        """Basis functions sampled on the grid, shape (n_nodes, n_vars)."""
        x = grid.x[:, None]
        c = np.asarray(self.centers)[None, :]
        return np.exp(-(((x - c) / self.width) ** 2))


@dataclass(frozen=True)
class Strips2D:
    """Piecewise-constant alpha on horizontal strips inside |y| <= band.

    Nodes with |y| > band take ``outside``.  A node lying exactly on the
    edge between two strips is assigned to the lower one.
    """

    n_strips: int = 100
    band: float = 0.8
    outside: float = 1.0
    lower: float = 0.1
    upper: float = 4.0

    @property
    def n_vars(self):
        return self.n_strips

    @property
    def bounds(self):
        n = self.n_vars
        return np.full(n, self.lower), np.full(n, self.upper)

    @property
    def strip_width(self):
        return 2.0 * self.band / self.n_strips

    def strip_edges(self):
        return np.linspace(-self.band, self.band, self.n_strips + 1)

    def strip_centers(self):
        e = self.strip_edges()
        return 0.5 * (e[:-1] + e[1:])

    def strip_index_of_y(self, y):
        """Strip index for each y (-1 outside the band)."""
        y = np.asarray(y, dtype=float)
        t = (y + self.band) / self.strip_width
        snapped = np.round(t)
        t = np.where(np.abs(t - snapped) < 1e-9, snapped, t)
        idx = np.ceil(t).astype(int) - 1
        idx = np.clip(idx, 0, self.n_strips - 1)
        inside = np.abs(y) <= self.band + 1e-12
        return np.where(inside, idx, -1)

    def node_strip_index(self, grid):
        if grid.dimension != 2:
            raise DimensionError("strip design needs a 2-D grid")
        rows = self.strip_index_of_y(grid.y)
        return np.repeat(rows, grid.nx)


DesignSpec = Union[GaussianBumps1D, Strips2D]


def _check_design(spec, x):
    x = np.asarray(x, dtype=float)
    if x.shape != (spec.n_vars,):
        raise DimensionError(f"design has shape {x.shape}, expected ({spec.n_vars},)")
    return x


def alpha_field_from_design(spec, x, grid):
    """Nodal advection multiplier alpha for design vector ``x``.

    Returns an array of length ``grid.n_nodes``.  Values outside the design
    bounds are allowed.
    """
    x = _check_design(spec, x)
    if isinstance(spec, GaussianBumps1D):
        if grid.dimension != 1:
            raise DimensionError("Gaussian-bump design needs a 1-D grid")
        return spec.baseline + spec.basis(grid) @ x
    idx = spec.node_strip_index(grid)
    alpha = np.full(grid.n_nodes, spec.outside)
    inside = idx >= 0
    alpha[inside] = x[idx[inside]]
    return alpha


def design_basis_transpose_apply(spec, nodal_gradient, grid):
    """Pull a nodal gradient back to design space (transpose of d alpha / dx)."""
    g = np.asarray(nodal_gradient, dtype=float)
    if g.shape != (grid.n_nodes,):
        raise DimensionError(f"nodal gradient has shape {g.shape}, expected ({grid.n_nodes},)")
    if isinstance(spec, GaussianBumps1D):
        return spec.basis(grid).T @ g
    idx = spec.node_strip_index(grid)
    inside = idx >= 0
    return np.bincount(idx[inside], weights=g[inside], minlength=spec.n_strips)
