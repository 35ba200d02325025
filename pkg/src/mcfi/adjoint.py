"""Adjoint gradient of POD-mode objectives through an unsteady simulation.

Each retained mode contributes a small bordered adjoint solve whose result
is projected back onto the snapshots as a forcing term; the forcings of all
modes are summed before a single backward sweep through the time steps.
"""
from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg as la

from .burgers import _transpose_products, design_jacobian_transpose_product
from .errors import DimensionError, DivergenceError, IllConditionedWarning, SingularSystemError
from .model import alpha_field_from_design, design_basis_transpose_apply
from .objectives import align_to_targets, partials
from .pod import CenteredSnapshots, center

logger = logging.getLogger(__name__)

MODAL_RESIDUAL_TOL = 1e-10
COND_WARN = 1e12


@dataclass(frozen=True)
class ModalAdjoint:
    psi_phi: np.ndarray
    psi_v: np.ndarray
    psi_sigma: float
    index: int = 0
    relative_residual: float = 0.0


@dataclass(frozen=True)
class UnsteadyAdjoint:
    """Backward-sweep adjoints; row k of ``psi`` is psi_{b,k+1}."""

    psi: np.ndarray


def _Ut(centered):
    return centered.Ut if isinstance(centered, CenteredSnapshots) else np.asarray(centered, float)


def modal_adjoint_residual(triplet, Ut, psi, rhs):
    """Residual of the transposed POD Jacobian system, stacked."""
    phi, v, s = triplet.phi, triplet.v, triplet.sigma
    b_phi, b_v, b_sigma = rhs
    r1 = -s * psi.psi_phi + Ut @ psi.psi_v + 2.0 * phi * psi.psi_sigma - b_phi
    r2 = Ut.T @ psi.psi_phi - s * psi.psi_v - b_v
    r3 = -(phi @ psi.psi_phi) - (v @ psi.psi_v) - b_sigma
    return np.concatenate([r1, r2, [r3]])


def solve_modal_adjoint(triplet, centered, rhs, gram=None, sigma_tol=1e-300):
    """Solve (d r_POD / d w)^T psi = (b_phi, b_v, b_sigma) for one mode.

    psi_phi is eliminated through the first block row, leaving a symmetric
    (n_t + 1) bordered system in (psi_v, psi_sigma); ``gram`` = Ut^T Ut may be
    passed in to share it between modes.  One step of iterative refinement
    on the full system is applied when the first solve misses the residual
    tolerance.
    """
    Ut = _Ut(centered)
    phi, v, s = triplet.phi, triplet.v, triplet.sigma
    b_phi = np.asarray(rhs[0], dtype=float)
    b_v = np.asarray(rhs[1], dtype=float)
    b_sigma = float(rhs[2])
    n_s, n_t = Ut.shape
    if phi.shape != (n_s,) or v.shape != (n_t,) or b_phi.shape != (n_s,) or b_v.shape != (n_t,):
        raise DimensionError("modal adjoint dimensions are inconsistent")
    if not s > sigma_tol:
        raise SingularSystemError(f"singular value {s:.3e} too small for a modal adjoint")
    if gram is None:
        gram = Ut.T @ Ut

    K = np.empty((n_t + 1, n_t + 1))
    K[:n_t, :n_t] = gram
    K[np.arange(n_t), np.arange(n_t)] -= s * s
    K[:n_t, n_t] = K[n_t, :n_t] = 2.0 * s * v
    K[n_t, n_t] = 2.0
    lu = la.lu_factor(K, check_finite=False)
    cond = np.linalg.cond(K)
    if cond > COND_WARN:
        warnings.warn(f"reduced modal adjoint system has condition {cond:.2e}",
                      IllConditionedWarning, stacklevel=2)

    def reduced_solve(bp, bv, bs):
        rhs_r = np.concatenate([s * bv + Ut.T @ bp, [phi @ bp - s * bs]])
        z = la.lu_solve(lu, rhs_r, check_finite=False)
        pv, ps = z[:n_t], z[n_t]
        pphi = (Ut @ pv + 2.0 * phi * ps - bp) / s
        return pphi, pv, ps

    pphi, pv, ps = reduced_solve(b_phi, b_v, b_sigma)
    psi = ModalAdjoint(pphi, pv, ps, triplet.index)
    bnorm = np.sqrt(b_phi @ b_phi + b_v @ b_v + b_sigma**2)
    if bnorm == 0.0:
        return ModalAdjoint(np.zeros(n_s), np.zeros(n_t), 0.0, triplet.index, 0.0)
    res = modal_adjoint_residual(triplet, Ut, psi, (b_phi, b_v, b_sigma))
    rel = np.linalg.norm(res) / bnorm
    if rel > MODAL_RESIDUAL_TOL:
        d = reduced_solve(res[:n_s], res[n_s:n_s + n_t], res[-1])
        psi = ModalAdjoint(pphi - d[0], pv - d[1], ps - d[2], triplet.index)
        res = modal_adjoint_residual(triplet, Ut, psi, (b_phi, b_v, b_sigma))
        rel = np.linalg.norm(res) / bnorm
        if rel > MODAL_RESIDUAL_TOL:
            warnings.warn(f"modal adjoint relative residual {rel:.2e} exceeds "
                          f"{MODAL_RESIDUAL_TOL:g}", IllConditionedWarning, stacklevel=2)
    return ModalAdjoint(psi.psi_phi, psi.psi_v, float(psi.psi_sigma), triplet.index, float(rel))


def modal_forcing(triplet, psi):
    """(d r_POD / d U)^T psi as an (n_s, n_t) matrix, centering included.

    The raw outer-product forcing psi_phi v^T + phi psi_v^T is multiplied by
    the centering projector, i.e. its row-wise temporal mean is removed.
    """
    F = np.outer(psi.psi_phi, triplet.v) + np.outer(triplet.phi, psi.psi_v)
    F -= F.mean(axis=1, keepdims=True)
    return F


def _backward_sweep(trajectory, alpha, grid, config, gT, with_design=False):
    """Yield (k, psi_{b,k}, design term) for k = n_t .. 1.

    ``gT`` is the right-hand side with row k-1 belonging to psi_{b,k}.  The
    design term is (d r_s / d alpha)^T psi_{b,k} at u^(k-1) when requested,
    which shares its stencil work with the Jacobian product of the next step.
    """
    n_t = trajectory.n_t
    if gT.shape != (n_t, trajectory.n_s):
        raise DimensionError(f"adjoint right-hand side has shape {gT.shape[::-1]}, "
                             f"expected {(trajectory.n_s, n_t)}")
    dts = trajectory.dt_sequence
    psi = np.array(gT[n_t - 1], dtype=float)
    for k in range(n_t, 0, -1):
        u = trajectory.state(k - 1)
        if k > 1:
            jt, dt_design = _transpose_products(u, alpha, grid, config, psi,
                                                want_design=with_design)
        elif with_design:
            jt, dt_design = None, design_jacobian_transpose_product(u, grid, config, psi)
        else:
            jt = dt_design = None
        yield k, psi, dt_design
        if k > 1:
            psi = gT[k - 2] + psi + dts[k - 1] * jt
            if not np.all(np.isfinite(psi)):
                raise DivergenceError(k - 1, f"non-finite adjoint at step {k - 1}")


def solve_unsteady_adjoint(trajectory, alpha, grid, config, g):
    """Back-substitute the transposed block-bidiagonal forward-Euler system.

    ``g`` is (n_s, n_t); column k-1 is the right-hand side for psi_{b,k}.
    Returns psi_{b,k} via psi_{b,n_t} = g_{n_t} and
    psi_{b,k} = g_k + (I + dt_k J(u^(k))^T) psi_{b,k+1}.
    """
    gT = np.ascontiguousarray(np.asarray(g, dtype=float).T)
    out = np.empty((trajectory.n_t, trajectory.n_s))
    for k, psi, _ in _backward_sweep(trajectory, alpha, grid, config, gT):
        out[k - 1] = psi
    return UnsteadyAdjoint(out)


def total_gradient(spec, x, trajectory, triplets, objective, grid, config, alpha=None,
                   centered=None, return_parts=False):
    """df/dx for ``objective`` evaluated on ``trajectory`` (run at design ``x``).

    ``triplets`` are the leading POD triplets of the centered trajectory;
    they are sign-aligned to the objective's targets here.
    """
    if alpha is None:
        alpha = alpha_field_from_design(spec, x, grid)
    if centered is None:
        centered = center(trajectory)
    Ut = centered.Ut
    tr = align_to_targets(objective, triplets)
    parts = partials(objective, trajectory, tr)

    gT = np.zeros((trajectory.n_t, trajectory.n_s)) if parts.d_snapshots is None \
        else np.array(parts.d_snapshots.T, dtype=float, order="C")
    modal = []
    gram = None
    for t, (dphi, dv, dsig) in zip(tr, parts.d_modes):
        if gram is None:
            gram = Ut.T @ Ut
        psi = solve_modal_adjoint(t, Ut, (dphi, dv, dsig), gram=gram)
        gT -= modal_forcing(t, psi).T
        modal.append(psi)

    nodal = np.zeros(grid.n_nodes)
    dts = trajectory.dt_sequence
    for k, _, design_term in _backward_sweep(trajectory, alpha, grid, config, gT,
                                             with_design=True):
        nodal += dts[k - 1] * design_term
    grad = design_basis_transpose_apply(spec, nodal, grid)
    if parts.d_design is not None:
        grad = grad + parts.d_design
    if return_parts:
        return grad, modal
    return grad
