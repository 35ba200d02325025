"""Projected limited-memory quasi-Newton minimization under box bounds."""
from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass, field
from typing import List

import numpy as np

from .errors import MCFIError, NonDifferentiableError
from .io import write_csv

logger = logging.getLogger(__name__)

CONVERGED_GRADIENT = "gradient tolerance reached"
CONVERGED_OBJECTIVE = "objective tolerance reached"
CONVERGED_TARGET = "objective at target (non-differentiable point)"
MAX_ITER = "iteration limit reached"
LINE_SEARCH_FAILED = "line search failed"
EVALUATION_FAILED = "objective evaluation failed"

CONVERGED = (CONVERGED_GRADIENT, CONVERGED_OBJECTIVE, CONVERGED_TARGET)


@dataclass(frozen=True)
class OptimizeOptions:
    max_iter: int = 200
    gtol: float = 1e-10
    ftol: float = 1e-12
    armijo: float = 1e-4
    backtrack: float = 0.5
    max_backtracks: int = 40
    memory: int = 10

    def __post_init__(self):
        if not (self.gtol > 0 and self.ftol > 0 and self.armijo > 0):
            raise ValueError("tolerances must be positive")
        if not 0 < self.backtrack < 1:
            raise ValueError("backtracking factor must lie in (0, 1)")
        if self.max_iter < 0 or self.max_backtracks < 1 or self.memory < 1:
            raise ValueError("iteration counts must be positive")


@dataclass
class IterationRecord:
    iteration: int
    f: float
    grad_inf_norm: float
    step: float
    x: np.ndarray


@dataclass
class OptimizeHistory:
    records: List[IterationRecord] = field(default_factory=list)
    reason: str = ""
    message: str = ""

    @property
    def converged(self):
        return self.reason in CONVERGED

    @property
    def f(self):
        return np.array([r.f for r in self.records])

    @property
    def x(self):
        return self.records[-1].x

    @property
    def n_iter(self):
        return self.records[-1].iteration if self.records else 0

    def to_csv(self, path, comments=()):
        n = self.records[0].x.size if self.records else 0
        header = ["iter", "f", "grad_inf_norm", "step"] + [f"x_{i}" for i in range(n)]
        rows = [[r.iteration, r.f, r.grad_inf_norm, r.step, *r.x] for r in self.records]
        msg = f"termination: {self.reason}" + (f" ({self.message})" if self.message else "")
        write_csv(path, header, rows, [*comments, msg])


def _as_function(problem_or_fun):
    if hasattr(problem_or_fun, "objective_and_gradient"):
        return problem_or_fun.objective_and_gradient
    return problem_or_fun


def _default_bounds(problem_or_fun, n):
    design = getattr(problem_or_fun, "design", None)
    if design is not None:
        return design.bounds
    return np.full(n, -np.inf), np.full(n, np.inf)


def projected_gradient(x, g, lo, hi):
    """x - P(x - g): zero exactly at a first-order stationary point."""
    return x - np.clip(x - g, lo, hi)


def _two_loop(g, pairs):
    q = g.copy()
    alphas = []
    for s, y, rho in reversed(pairs):
        a = rho * (s @ q)
        q -= a * y
        alphas.append(a)
    s, y, _ = pairs[-1]
    q *= (s @ y) / (y @ y)
    for (s, y, rho), a in zip(pairs, reversed(alphas)):
        b = rho * (y @ q)
        q += (a - b) * s
    return q


def minimize(problem_or_fun, x0, options=None, bounds=None, callback=None):
    """Minimize f over the box ``bounds`` starting from ``x0``.

    ``problem_or_fun`` is a :class:`~mcfi.problem.Problem` (bounds default to
    its design's) or a callable returning ``(f, gradient)``.  Directions come
    from an L-BFGS two-loop recursion restricted to the free variables; the
    memory is cleared whenever the active set changes, the direction fails
    to descend, or an iteration stalls (the run stops only when a
    steepest-descent iteration stalls as well).  Steps are projected back
    onto the box and accepted by an Armijo test along the projected path.

    Returns ``(x, history)``; the history is never empty.
    """
    opts = options or OptimizeOptions()
    fun = _as_function(problem_or_fun)
    x = np.array(x0, dtype=float)
    lo, hi = bounds if bounds is not None else _default_bounds(problem_or_fun, x.size)
    lo = np.broadcast_to(np.asarray(lo, dtype=float), x.shape)
    hi = np.broadcast_to(np.asarray(hi, dtype=float), x.shape)
    if np.any(lo > hi):
        raise ValueError("lower bound exceeds upper bound")
    xp = np.clip(x, lo, hi)
    if not np.array_equal(xp, x):
        logger.warning("initial design outside bounds; projected onto the box")
    x = xp

    history = OptimizeHistory()
    value = getattr(problem_or_fun, "objective_value", lambda z: 0.0)

    def evaluate(z):
        f, g = fun(z)
        f = float(f)
        g = np.asarray(g, dtype=float)
        if not np.isfinite(f) or not np.all(np.isfinite(g)):
            raise FloatingPointError("non-finite objective or gradient")
        return f, g

    try:
        f, g = evaluate(x)
    except NonDifferentiableError as exc:
        history.reason, history.message = EVALUATION_FAILED, str(exc)
        history.records.append(IterationRecord(0, float("nan"), float("nan"), 0.0, x.copy()))
        return x, history

    pg = projected_gradient(x, g, lo, hi)
    history.records.append(IterationRecord(0, f, float(np.max(np.abs(pg), initial=0.0)),
                                           0.0, x.copy()))
    pairs = deque(maxlen=opts.memory)
    active = None
    restarted = False

    for it in range(1, opts.max_iter + 1):
        pg = projected_gradient(x, g, lo, hi)
        if np.max(np.abs(pg), initial=0.0) <= opts.gtol:
            history.reason = CONVERGED_GRADIENT
            break
        new_active = ((x <= lo) & (g > 0)) | ((x >= hi) & (g < 0))
        if active is not None and not np.array_equal(new_active, active):
            pairs.clear()
        active = new_active
        gf = np.where(active, 0.0, g)

        if pairs:
            d = -_two_loop(gf, list(pairs))
            d[active] = 0.0
            if not gf @ d < 0:
                pairs.clear()
        if not pairs:
            gn = np.linalg.norm(gf)
            d = -gf * min(1.0, 1.0 / gn)

        step = 1.0
        accepted = False
        for _ in range(opts.max_backtracks):
            xt = np.clip(x + step * d, lo, hi)
            try:
                ft, gt = evaluate(xt)
            except NonDifferentiableError:
                # mode mismatch of exactly zero: the target itself
                ft, gt = value(xt), None
            except (MCFIError, FloatingPointError) as exc:
                logger.debug("trial point rejected: %s", exc)
                ft, gt = np.inf, None
            if ft <= f + opts.armijo * (g @ (xt - x)):
                accepted = True
                break
            step *= opts.backtrack

        if not accepted:
            if pairs:
                # retry the iteration from steepest descent
                pairs.clear()
                active = None
                continue
            history.reason = LINE_SEARCH_FAILED
            break
        if gt is None:
            x, f = xt, ft
            history.records.append(IterationRecord(it, f, 0.0, step, x.copy()))
            if f <= opts.ftol:
                history.reason = CONVERGED_TARGET
            else:
                history.reason = EVALUATION_FAILED
                history.message = "non-differentiable point away from target"
            break

        s, yv = xt - x, gt - g
        sy = s @ yv
        if sy > 1e-12 * np.linalg.norm(s) * np.linalg.norm(yv):
            pairs.append((s, yv, 1.0 / sy))
        f_old = f
        x, f, g = xt, ft, gt
        pgn = float(np.max(np.abs(projected_gradient(x, g, lo, hi)), initial=0.0))
        history.records.append(IterationRecord(it, f, pgn, step, x.copy()))
        if callback is not None:
            callback(history.records[-1])
        logger.info("iter %3d  f = %.6e  |pg| = %.3e  step = %.3g", it, f, pgn, step)
        if f_old - f <= opts.ftol * max(1.0, abs(f_old)):
            if restarted:
                history.reason = CONVERGED_OBJECTIVE
                break
            # stalled with curvature memory; confirm with a steepest-descent restart
            pairs.clear()
            restarted = True
        else:
            restarted = False
    else:
        history.reason = MAX_ITER

    if not history.reason:
        history.reason = MAX_ITER
    return x, history
