"""Acceptance criteria, each run at its stated tolerance.

Every test records one PASS/FAIL line (with the measured numbers) that is
printed in the pytest terminal summary, then asserts.  Run on its own with

    python3 -m pytest tests/test_acceptance.py -v

The 2-D criteria use the 201x201 baseline and take several minutes.
"""
import time
from dataclasses import replace

import numpy as np
import pytest

from mcfi import ObjectiveSpec, Problem, center, compute_modes, scenarios
from mcfi import adjoint as adj
from mcfi.adjoint import total_gradient
from mcfi.burgers import SolverConfig, simulate, simulate_alpha
from mcfi.cli import build_problem, load_targets
from mcfi.config import RunConfig
from mcfi.model import Grid
from mcfi.optimize import minimize
from mcfi.pod import pod_residual
from mcfi.problem import target_from_design
from mcfi.verify import fd_gradient, grad_check, linearization_check

from test_adjoint import dense_pod_jacobian, dense_unsteady_matrix

RESULTS = {}


def record(key, ok, detail):
    RESULTS[key] = f"{'PASS' if ok else 'FAIL'}  {key}: {detail}"
    assert ok, detail


def rel(a, b):
    return float(np.linalg.norm(a - b) / np.linalg.norm(b))


def best_time(fn, repeats=3):
    best = np.inf
    for _ in range(repeats):
        t = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t)
    return best


def check_report(cfg_name):
    cfg = RunConfig.from_file(cfg_name)
    problem = build_problem(cfg, load_targets(cfg))
    x = cfg.design_vector("gradcheck.point")
    t = time.perf_counter()
    rep = grad_check(problem, x, components=cfg.components(), h=cfg.number("gradcheck.h", 1e-6))
    return rep, time.perf_counter() - t


# -- 1: 1-D gradient check ----------------------------------------------------

@pytest.mark.slow
def test_c1_gradient_check_1d():
    rep, wall = check_report("table1d")
    ok = rep.all_valid and rep.max_rel_error <= 2.5e-5 and wall < 30
    worst = max(rep.rows, key=lambda r: r.rel_err)
    record("C1 1-D adjoint vs FD", ok,
           f"max rel err {rep.max_rel_error:.3e} (component {worst.label}) vs 2.5e-5, "
           f"wall {wall:.1f} s vs 30 s")


# -- 2: 2-D gradient check ----------------------------------------------------

@pytest.mark.slow
def test_c2_gradient_check_2d():
    rep, wall = check_report("table2d")
    small, wall_small = check_report("table2d-small")
    ok = (rep.all_valid and small.all_valid and rep.max_rel_error <= 1e-6
          and small.max_rel_error <= 1e-6 and wall_small < 60)
    record("C2 2-D adjoint vs FD", ok,
           f"201x201 max rel err {rep.max_rel_error:.3e} ({wall:.0f} s); "
           f"51x51 max rel err {small.max_rel_error:.3e} ({wall_small:.1f} s vs 60 s); tol 1e-6")


# -- 3, 4: 1-D inversions -----------------------------------------------------

def invert(cfg_name, **option_overrides):
    cfg = RunConfig.from_file(cfg_name)
    targets = load_targets(cfg)
    problem = build_problem(cfg, targets)
    opts = cfg.optimize_options()
    if option_overrides:
        opts = replace(opts, **option_overrides)
    x, hist = minimize(problem, cfg.design_vector("design.initial"), opts)
    return cfg, targets, problem, x, hist


@pytest.mark.slow
def test_c3_inversion_1d_f1():
    cfg, targets, problem, x, hist = invert("invert1d-f1", max_iter=60)
    f0, f = hist.f[0], hist.f[-1]
    err = float(np.max(np.abs(x - targets.design)))
    ok = (f <= 1e-8 and err <= 1e-3 and hist.n_iter <= 60
          and abs(f0 - 0.283) <= 0.05 * 0.283)
    record("C3 1-D f1 inversion", ok,
           f"f_init {f0:.5f} (0.283 +/- 5%), f_final {f:.2e} vs 1e-8, "
           f"|x - x*|_inf {err:.2e} vs 1e-3, {hist.n_iter} iterations vs 60")


@pytest.mark.slow
def test_c4_inversion_1d_variants():
    parts, ok = [], True
    for kind in ("f2", "f3", "f4"):
        _, _, _, _, hist = invert(f"invert1d-{kind}")
        f = hist.f
        mono = bool(np.all(np.diff(f) <= 0))
        ok &= mono and f[-1] <= 1e-4
        parts.append(f"{kind} final {f[-1]:.2e} in {hist.n_iter} it, monotone {mono}")
    record("C4 1-D f2/f3/f4 inversions", ok, "; ".join(parts) + " (need <= 1e-4)")


# -- 5: one backward sweep for any number of modes ---------------------------

@pytest.mark.slow
def test_c5_one_sweep_cost():
    d, g, c = scenarios.burgers1d()
    trip, mean, _ = target_from_design(d, scenarios.X_STAR_1D, g, c, m=2)
    x = scenarios.X_CHECK_1D
    times = {}
    for m in (1, 2):
        obj = ObjectiveSpec("multi_mode", [t.phi for t in trip], [t.sigma for t in trip], m=m)
        ev = Problem(d, g, c, obj).evaluate(x)
        times[m] = best_time(lambda: total_gradient(d, x, ev.trajectory, ev.triplets, obj, g, c,
                                                    centered=ev.centered), repeats=7)
    ratio = times[2] / times[1]
    record("C5 one-sweep cost", ratio <= 1.5,
           f"total_gradient m=2 {times[2] * 1e3:.1f} ms / m=1 {times[1] * 1e3:.1f} ms "
           f"= {ratio:.2f} vs 1.5")


# -- 6: gradient cost versus dimension ---------------------------------------

@pytest.mark.slow
def test_c6_cost_vs_dimension():
    cfg = RunConfig.from_file("table2d")
    problem = build_problem(cfg, load_targets(cfg))
    x = cfg.design_vector("gradcheck.point")
    problem = problem.frozen_dt(x)
    t_fwd = best_time(lambda: problem.simulate(x), repeats=2)
    ev = problem.evaluate(x)
    t_adj = best_time(lambda: total_gradient(cfg.design, x, ev.trajectory, ev.triplets,
                                             problem.objective, cfg.grid, cfg.solver,
                                             centered=ev.centered), repeats=2)
    t = time.perf_counter()
    fd_gradient(problem, x, f0=ev.f)
    t_fd = time.perf_counter() - t
    ok = t_adj <= 3 * t_fwd and t_fd >= 50 * t_fwd
    record("C6 cost vs dimension", ok,
           f"n_x = {x.size}: forward {t_fwd:.2f} s, adjoint {t_adj:.2f} s "
           f"({t_adj / t_fwd:.2f}x vs 3x), FD {t_fd:.0f} s ({t_fd / t_fwd:.0f}x vs 50x)")


# -- 7: oracle suite ----------------------------------------------------------

def test_c7_oracle_suite():
    rng = np.random.default_rng(2024)
    # (a) modal adjoint versus the dense bordered system
    wa = 0.0
    for _ in range(20):
        n_s, n_t = int(rng.integers(6, 15)), int(rng.integers(3, 7))
        cen = center(rng.normal(size=(n_s, n_t)))
        m = int(rng.integers(1, min(n_t - 1, 3) + 1))
        t = compute_modes(cen, m)[m - 1]
        b = (rng.normal(size=n_s), rng.normal(size=n_t), float(rng.normal()))
        psi = adj.solve_modal_adjoint(t, cen, b)
        ref = np.linalg.solve(dense_pod_jacobian(cen.Ut, t).T, np.concatenate([b[0], b[1], [b[2]]]))
        wa = max(wa, rel(np.concatenate([psi.psi_phi, psi.psi_v, [psi.psi_sigma]]), ref))
    # (b) unsteady adjoint versus the dense block-bidiagonal system
    wb = 0.0
    for _ in range(20):
        n = int(rng.integers(5, 12))
        g = Grid.line(n)
        cfg = SolverConfig.burgers1d(nu=1e-2)
        alpha = rng.uniform(0.3, 1.5, n)
        n_t = int(rng.integers(1, 6))
        tr = simulate_alpha(alpha, g, cfg, ic=0.5 * rng.uniform(-1, 1, n),
                            dt_sequence=np.full(n_t, 0.02))
        gmat = rng.normal(size=(n, n_t))
        got = adj.solve_unsteady_adjoint(tr, alpha, g, cfg, gmat).psi.ravel()
        ref = np.linalg.solve(dense_unsteady_matrix(tr, alpha, g, cfg).T, gmat.T.ravel())
        wb = max(wb, rel(got, ref))
    # (c) modal forcing versus the explicit Kronecker-form contraction
    wc = 0.0
    for _ in range(20):
        n_s, n_t = int(rng.integers(4, 10)), int(rng.integers(3, 8))
        cen = center(rng.normal(size=(n_s, n_t)))
        t = compute_modes(cen, 1)[0]
        psi = adj.ModalAdjoint(rng.normal(size=n_s), rng.normal(size=n_t), float(rng.normal()))
        P = np.eye(n_t) - np.ones((n_t, n_t)) / n_t
        D1 = np.kron((P @ t.v)[None, :], np.eye(n_s))
        D2 = P @ np.kron(np.eye(n_t), t.phi[None, :])
        ref = (D1.T @ psi.psi_phi + D2.T @ psi.psi_v).reshape(n_t, n_s).T
        wc = max(wc, rel(adj.modal_forcing(t, psi), ref))
    # (d) dot-product tests of both transpose products, 1-D and 2-D
    wd, passed = 0.0, True
    for spec, g, cfg in (scenarios.burgers1d(n=41), scenarios.burgers2d(n=21)):
        state = 0.8 * rng.uniform(-1, 1, g.n_state)
        alpha = rng.uniform(0.5, 2.0, g.n_nodes)
        res = linearization_check(state, alpha, g, cfg, trials=10, seed=5, tol=1e-6)
        wd = max(wd, res.worst_rel_error)
        passed &= res.passed
    ok = wa <= 1e-10 and wb <= 1e-10 and wc <= 1e-12 and wd <= 1e-6 and passed
    record("C7 oracle suite", ok,
           f"(a) modal {wa:.1e} vs 1e-10, (b) unsteady {wb:.1e} vs 1e-10, "
           f"(c) forcing {wc:.1e} vs 1e-12, (d) dot products {wd:.1e} vs 1e-6")


# -- 8: POD invariants ----------------------------------------------------------

def test_c8_pod_invariants():
    parts, ok = [], True
    baselines = [("1-D", scenarios.burgers1d(), np.zeros(4)),
                 ("2-D", scenarios.burgers2d(), None)]
    for name, (d, g, c), x in baselines:
        if x is None:
            x = scenarios.strip_profile("ramp", d)
        cen = center(simulate(d, x, g, c))
        trip = compute_modes(cen, 5)
        Phi = np.column_stack([t.phi for t in trip])
        orth = float(np.max(np.abs(Phi.T @ Phi - np.eye(5))))
        s1 = trip[0].sigma
        resid = max(float(np.linalg.norm(pod_residual(t, cen)[:-1])) / s1 for t in trip)
        vnorm = max(abs(np.linalg.norm(t.v) - 1.0) for t in trip)
        sig = np.array([t.sigma for t in trip])
        strict = bool(np.all(np.diff(sig) < 0))
        ok &= orth <= 1e-10 and resid <= 1e-8 and vnorm <= 1e-10 and strict
        parts.append(f"{name} orthonormality {orth:.1e}, residual/sigma1 {resid:.1e}, "
                     f"|v|-1 {vnorm:.1e}, strict ordering {strict}")
    record("C8 POD invariants", ok, "; ".join(parts))


# -- 9: 2-D inversion -----------------------------------------------------------

@pytest.mark.slow
def test_c9_inversion_2d():
    budget = 60
    runs = {}
    for kind in ("f1", "f2"):
        cfg, targets, problem, x, hist = invert(f"invert2d-{kind}", max_iter=budget)
        ev = problem.evaluate(x)
        runs[kind] = (cfg, targets, x, hist,
                      float(np.linalg.norm(ev.triplets[0].phi - targets.modes[0])))
    cfg, targets, x, hist, mis2 = runs["f2"]
    mis1 = runs["f1"][4]
    band = np.abs(cfg.design.strip_centers()) <= 0.7
    rms = float(np.sqrt(np.mean(((x - targets.design) / targets.design)[band] ** 2)))
    ok = rms <= 0.05 and mis2 < mis1
    record("C9 2-D inversion", ok,
           f"f2 RMS relative strip error on |y| <= 0.7: {rms:.3f} vs 0.05 "
           f"({hist.n_iter} it, {hist.reason}); |phi - phi*| after {budget} it: "
           f"f2 {mis2:.4f}, f1 {mis1:.4f} (f2 must be lower)")
