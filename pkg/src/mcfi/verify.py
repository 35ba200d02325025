"""Finite-difference gradient checks and randomized transpose (dot-product) tests."""
from __future__ import annotations

import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import List

import numpy as np

from .burgers import (design_jacobian_transpose_product, jacobian_transpose_product,
                      spatial_residual)
from .errors import MCFIError
from .io import write_csv

logger = logging.getLogger(__name__)

H_FD = 1e-6


@dataclass
class GradCheckRow:
    index: int  # 0-based design component
    adjoint: float
    fd: float
    valid: bool = True

    @property
    def label(self):
        return self.index + 1

    @property
    def abs_diff(self):
        return abs(self.adjoint - self.fd)

    @property
    def rel_err(self):
        """|adjoint - fd| / |fd|; None when the FD value is zero or invalid."""
        if not self.valid or self.fd == 0.0:
            return None
        return self.abs_diff / abs(self.fd)


@dataclass
class GradCheckReport:
    rows: List[GradCheckRow]
    h_fd: float
    objective: str
    design: str
    adjoint_seconds: float = float("nan")
    fd_seconds: float = float("nan")
    forward_seconds: float = float("nan")

    @property
    def max_rel_error(self):
        errs = [r.rel_err for r in self.rows if r.rel_err is not None]
        return max(errs) if errs else 0.0

    @property
    def all_valid(self):
        return all(r.valid for r in self.rows)

    def to_csv(self, path, comments=()):
        # wall times stay out of the file so reruns are byte-identical
        meta = f"h_fd={self.h_fd!r} objective={self.objective} design={self.design}"
        rows = [(r.label, r.adjoint if r.valid else None, r.fd if r.valid else None,
                 r.abs_diff if r.valid else None, r.rel_err) for r in self.rows]
        write_csv(path, ["component", "adjoint", "fd", "abs_diff", "rel_err"], rows,
                  [*comments, meta])

    def summary(self):
        lines = [f"{'comp':>5} {'adjoint':>22} {'fd':>22} {'|diff|':>10} {'rel':>10}"]
        for r in self.rows:
            rel = "-" if r.rel_err is None else f"{r.rel_err:.3e}"
            lines.append(f"{r.label:>5} {r.adjoint:>22.16g} {r.fd:>22.16g} "
                         f"{r.abs_diff:>10.3e} {rel:>10}")
        lines.append(f"max relative error {self.max_rel_error:.3e}")
        lines.append(f"wall time: forward {self.forward_seconds:.3f} s, adjoint "
                     f"{self.adjoint_seconds:.3f} s, finite differences {self.fd_seconds:.3f} s")
        return "\n".join(lines)


def _perturbed_value(args):
    problem, x, i, h = args
    xp = np.array(x, dtype=float)
    xp[i] += h
    try:
        return problem.objective_value(xp)
    except (MCFIError, FloatingPointError) as exc:
        logger.warning("perturbed run for component %d failed: %s", i + 1, exc)
        return np.nan


def fd_gradient(problem, x, h=H_FD, components=None, f0=None, workers=1):
    """Forward-difference gradient [f(x + h e_i) - f(x)] / h.

    ``problem`` is anything with ``objective_value(x)``; pass a problem with
    frozen time steps to compare against the adjoint.  Components whose
    perturbed run fails come back as NaN.
    """
    x = np.asarray(x, dtype=float)
    if not h > 0:
        raise ValueError("h must be positive")
    comps = range(x.size) if components is None else list(components)
    if f0 is None:
        f0 = problem.objective_value(x)
    jobs = [(problem, x, i, h) for i in comps]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            values = list(ex.map(_perturbed_value, jobs))
    else:
        values = [_perturbed_value(j) for j in jobs]
    out = np.full(x.size, np.nan)
    for i, fv in zip(comps, values):
        out[i] = (fv - f0) / h
    return out


def grad_check(problem, x, components=None, h=H_FD, workers=1, adjoint=None):
    """Adjoint versus forward-difference gradient on the listed components.

    Time steps of the run at ``x`` are frozen for both gradients so that the
    comparison is between derivatives of the same discrete function.
    ``adjoint`` may replace the adjoint route with any callable x -> gradient.
    """
    x = np.asarray(x, dtype=float)
    if problem.dt_sequence is None:
        problem = problem.frozen_dt(x)
    t0 = time.perf_counter()
    ev = problem.evaluate(x)
    t_fwd = time.perf_counter() - t0

    t0 = time.perf_counter()
    if adjoint is None:
        from .adjoint import total_gradient
        g_adj = total_gradient(problem.design, x, ev.trajectory, ev.triplets, problem.objective,
                               problem.grid, problem.config, centered=ev.centered)
    else:
        g_adj = np.asarray(adjoint(x), dtype=float)
    t_adj = time.perf_counter() - t0

    comps = list(range(x.size)) if components is None else sorted(components)
    t0 = time.perf_counter()
    g_fd = fd_gradient(problem, x, h, comps, f0=ev.f, workers=workers)
    t_fd = time.perf_counter() - t0
    rows = [GradCheckRow(i, float(g_adj[i]), float(g_fd[i]), bool(np.isfinite(g_fd[i])))
            for i in comps]
    return GradCheckReport(rows, h, problem.objective.kind, type(problem.design).__name__,
                           t_adj, t_fd, t_fwd)


@dataclass
class LinearizationResult:
    passed: bool
    worst_rel_error: float
    trials: int
    skipped: int = 0
    errors: list = field(default_factory=list)


def _rel(a, b):
    scale = max(abs(a), abs(b))
    return None if scale == 0.0 else abs(a - b) / scale


def linearization_check(state, alpha, grid, config, trials=10, seed=0, eps=1e-6, tol=1e-6,
                        directions=None):
    """Randomized dot-product tests of both transpose products.

    For random v, y checks <J v, y> = <v, J^T y> with J v from central
    differences of the spatial residual, and likewise for the derivative
    with respect to the nodal alpha field.  ``directions`` may supply fixed
    (v_state, v_alpha, y) triples instead of random ones; all-zero pairs are
    counted as skipped.
    """
    rng = np.random.default_rng(seed)
    state = np.asarray(state, dtype=float)
    alpha = np.asarray(alpha, dtype=float)
    errs, skipped = [], 0
    for k in range(trials):
        if directions is not None:
            dv, da, y = (np.asarray(d, dtype=float) for d in directions[k])
        else:
            dv = rng.standard_normal(state.size)
            da = rng.standard_normal(alpha.size)
            y = rng.standard_normal(state.size)
        jv = (spatial_residual(state + eps * dv, alpha, grid, config)
              - spatial_residual(state - eps * dv, alpha, grid, config)) / (2 * eps)
        lhs, rhs = jv @ y, dv @ jacobian_transpose_product(state, alpha, grid, config, y)
        ja = (spatial_residual(state, alpha + eps * da, grid, config)
              - spatial_residual(state, alpha - eps * da, grid, config)) / (2 * eps)
        lhs2, rhs2 = ja @ y, da @ design_jacobian_transpose_product(state, grid, config, y)
        for e in (_rel(lhs, rhs), _rel(lhs2, rhs2)):
            if e is None:
                skipped += 1
            else:
                errs.append(e)
    worst = max(errs) if errs else 0.0
    return LinearizationResult(worst <= tol, worst, trials, skipped, errs)
