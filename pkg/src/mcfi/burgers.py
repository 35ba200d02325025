"""Modified viscous Burgers equation: residual, forward Euler, linearizations.

The advection multiplier alpha scales the convective term,

    du/dt + alpha (u . grad) u = nu lap u,

discretized with tanh-blended one-sided differences for advection and
central second differences for diffusion.  Boundary nodes are frozen
(zero residual), so all stencils stay inside the grid.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, DivergenceError
from .model import Trajectory, alpha_field_from_design

logger = logging.getLogger(__name__)

DT_EPS = 1e-8


@dataclass(frozen=True)
class SolverConfig:
    """Time-stepping and physical parameters.

    ``dt_policy`` is ``"fixed"`` (dt = cfl * dx / max|u0| for every step) or
    ``"adaptive"`` (dt recomputed from the current state each step).
    """

    nu: float = 5e-4
    beta: float = 20.0
    cfl: float = 0.5
    t_end: float = 2.5
    dt_policy: str = "fixed"

    def __post_init__(self):
        if not self.nu > 0 or not self.beta > 0 or not self.t_end > 0:
            raise ValueError("nu, beta and t_end must be positive")
        if not 0 < self.cfl <= 1:
            raise ValueError("cfl must lie in (0, 1]")
        if self.dt_policy not in ("fixed", "adaptive"):
            raise ValueError(f"unknown dt policy {self.dt_policy!r}")

    @classmethod
    def burgers1d(cls, **kw):
        return cls(**{**dict(nu=5e-4, cfl=0.5, t_end=2.5, dt_policy="fixed"), **kw})

    @classmethod
    def burgers2d(cls, **kw):
        return cls(**{**dict(nu=1e-4, cfl=0.4, t_end=1.0, dt_policy="adaptive"), **kw})


def smooth_selector(w, beta):
    """Smooth upwind weight 0.5 * (1 + tanh(beta * w))."""
    return 0.5 * (1.0 + np.tanh(beta * np.asarray(w, dtype=float)))


def initial_condition(grid, dimension=None):
    """Two-pulse initial condition in 1-D, opposing Gaussian packets in 2-D."""
    dimension = grid.dimension if dimension is None else dimension
    if dimension != grid.dimension:
        raise DimensionError("grid dimension does not match requested dimension")
    if dimension == 1:
        x = grid.x
        return (np.exp(-(x + 0.7) ** 2 / 0.05)
                - 0.8 * np.exp(-(x - 0.7) ** 2 / 0.05)
                + 0.25 * np.sin(2 * np.pi * x))
    X, Y = np.meshgrid(grid.x, grid.y)
    r1 = r2 = 0.7
    u = (4.0 * np.exp(-((X + 0.9) ** 2 + (Y - 0.1) ** 2) / r1**2)
         - 4.0 * np.exp(-((X - 0.9) ** 2 + (Y + 0.1) ** 2) / r2**2))
    u /= np.max(np.abs(u))
    return np.concatenate([u.ravel(), np.zeros(grid.n_nodes)])


# -- stencil helpers ----------------------------------------------------------

def _interior(ndim):
    return (slice(1, -1),) * ndim


def _shifted(ndim, axis, s):
    """Interior slice shifted by ``s`` along ``axis``."""
    return tuple(slice(1 + s, (-1 + s) or None) if a == axis else slice(1, -1)
                 for a in range(ndim))


def _axes(grid):
    """(array axis, spacing, index of the advecting velocity component)."""
    if grid.dimension == 1:
        return [(0, grid.dx, 0)]
    return [(1, grid.dx, 0), (0, grid.dy, 1)]


def _one_sided(A, axis, h):
    nd = A.ndim
    c = A[_interior(nd)]
    bwd = (c - A[_shifted(nd, axis, -1)]) / h
    fwd = (A[_shifted(nd, axis, 1)] - c) / h
    return bwd, fwd


def _advection_terms(comps, grid, beta):
    """Blended convective bracket (u.grad)A on interior nodes, per component."""
    nd = grid.dimension
    I = _interior(nd)
    out = []
    for A in comps:
        adv = 0.0
        for axis, h, vc in _axes(grid):
            vel = comps[vc][I]
            w = smooth_selector(vel, beta)
            bwd, fwd = _one_sided(A, axis, h)
            adv = adv + vel * (w * bwd + (1.0 - w) * fwd)
        out.append(adv)
    return out


def _check_alpha(alpha, grid):
    alpha = np.asarray(alpha, dtype=float)
    if alpha.shape != (grid.n_nodes,):
        raise DimensionError(f"alpha has shape {alpha.shape}, expected ({grid.n_nodes},)")
    return alpha.reshape(grid.shape)


def spatial_residual(state, alpha, grid, config):
    """Semi-discrete right-hand side r_s(u) with zero rows on the boundary."""
    comps = grid.split(state)
    if not all(np.all(np.isfinite(c)) for c in comps):
        raise FloatingPointError("non-finite state passed to spatial_residual")
    a = _check_alpha(alpha, grid)
    nd = grid.dimension
    I = _interior(nd)
    advs = _advection_terms(comps, grid, config.beta)
    out = []
    for A, adv in zip(comps, advs):
        r = np.zeros(grid.shape)
        lap = 0.0
        for axis, h, _ in _axes(grid):
            lap = lap + (A[_shifted(nd, axis, 1)] - 2.0 * A[I] + A[_shifted(nd, axis, -1)]) / h**2
        r[I] = -a[I] * adv + config.nu * lap
        out.append(r.ravel())
    return np.concatenate(out)


def _transpose_products(state, alpha, grid, config, y, want_state=True, want_design=True):
    """Shared kernel for (d r_s/d u)^T y and (d r_s/d alpha)^T y."""
    comps = grid.split(state)
    ys = grid.split(y)
    nd = grid.dimension
    I = _interior(nd)
    beta = config.beta
    axes = _axes(grid)
    sel = {}
    for axis, h, vc in axes:
        vel = comps[vc][I]
        t = np.tanh(beta * vel)
        # (velocity, weight, weight derivative, 2w - 1)
        sel[axis] = (vel, 0.5 * (1.0 + t), 0.5 * beta * (1.0 - t * t), t)
    grads = [np.zeros(grid.shape) for _ in comps] if want_state else None
    design = np.zeros(grid.shape) if want_design else None
    a = _check_alpha(alpha, grid)[I] if want_state else None
    for ci, (A, Y) in enumerate(zip(comps, ys)):
        yI = Y[I]
        adv = 0.0
        if want_state:
            c = -a * yI
            G = grads[ci]
        for axis, h, vc in axes:
            vel, w, dw, t = sel[axis]
            bwd, fwd = _one_sided(A, axis, h)
            diff = bwd - fwd
            D = fwd + w * diff
            if want_design:
                adv = adv + vel * D
            if want_state:
                # velocity factor and selector weight both depend on the advecting component
                grads[vc][I] += c * (D + vel * dw * diff)
                cv = c * vel / h
                cw = cv * w
                d = (config.nu / h**2) * yI
                G[I] += cv * t - 2.0 * d
                G[_shifted(nd, axis, -1)] += d - cw
                G[_shifted(nd, axis, 1)] += d + cv - cw
        if want_design:
            design[I] -= adv * yI
    state_out = np.concatenate([g.ravel() for g in grads]) if want_state else None
    design_out = design.ravel() if want_design else None
    return state_out, design_out


def jacobian_transpose_product(state, alpha, grid, config, y):
    """(d r_s / d u)^T y at ``state``, including the selector-weight derivatives."""
    return _transpose_products(state, alpha, grid, config, y, want_design=False)[0]


def design_jacobian_transpose_product(state, grid, config, y):
    """(d r_s / d alpha_nodal)^T y: minus the convective bracket dotted with y."""
    return _transpose_products(state, None, grid, config, y, want_state=False)[1]


def transpose_products(state, alpha, grid, config, y):
    """Both transpose products at once; they share all stencil work."""
    return _transpose_products(state, alpha, grid, config, y)


def stable_dt(state, grid, config, initial_state=None):
    """CFL time step for ``state`` under the configured policy."""
    comps = grid.split(state if config.dt_policy == "adaptive" or initial_state is None
                       else initial_state)
    h = min(grid.spacings)
    if grid.dimension == 1:
        return config.cfl * h / np.max(np.abs(comps[0]))
    speed = np.max(np.abs(comps[0])) + np.max(np.abs(comps[1])) + DT_EPS
    return config.cfl * h / speed


def simulate(spec, x, grid, config, ic=None, dt_sequence=None):
    """March u^(i+1) = u^(i) + dt_i r_s(u^(i)) from ``ic`` to ``config.t_end``.

    When ``dt_sequence`` is given it is replayed verbatim instead of applying
    the CFL policy; gradient checks use this to hold the steps fixed.
    """
    alpha = alpha_field_from_design(spec, x, grid)
    return simulate_alpha(alpha, grid, config, ic=ic, dt_sequence=dt_sequence)


def simulate_alpha(alpha, grid, config, ic=None, dt_sequence=None):
    # blow-ups are detected explicitly below, so numpy's overflow chatter is muted
    with np.errstate(over="ignore", invalid="ignore"):
        return _march(alpha, grid, config, ic, dt_sequence)


def _march(alpha, grid, config, ic, dt_sequence):
    u = initial_condition(grid) if ic is None else np.array(ic, dtype=float)
    if u.shape != (grid.n_state,):
        raise DimensionError(f"initial condition has shape {u.shape}")
    u0 = u.copy()
    states = []
    if dt_sequence is not None:
        dts = [float(d) for d in dt_sequence]
        for k, dt in enumerate(dts):
            u = u + dt * spatial_residual(u, alpha, grid, config)
            if not np.all(np.isfinite(u)):
                raise DivergenceError(k + 1)
            states.append(u)
        return Trajectory(u0, np.array(states), np.array(dts))

    fixed_dt = None
    if config.dt_policy == "fixed":
        fixed_dt = stable_dt(u0, grid, config) if np.any(u0) else config.t_end
    t = 0.0
    dts = []
    tol = 1e-12 * config.t_end
    while t < config.t_end - tol:
        dt = fixed_dt if fixed_dt is not None else stable_dt(u, grid, config)
        if t + dt >= config.t_end - tol:
            dt = config.t_end - t
        u = u + dt * spatial_residual(u, alpha, grid, config)
        if not np.all(np.isfinite(u)):
            raise DivergenceError(len(dts) + 1)
        states.append(u)
        dts.append(dt)
        t += dt
    logger.debug("simulated %d steps to t=%.6g", len(dts), t)
    return Trajectory(u0, np.array(states), np.array(dts))
