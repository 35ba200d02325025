import numpy as np
import pytest

from mcfi import Grid, ObjectiveSpec, Problem, SolverConfig
from mcfi.io import read_csv
from mcfi.problem import target_from_design
from mcfi.verify import GradCheckReport, GradCheckRow, fd_gradient, grad_check, linearization_check

from conftest import random_state


class Linear:
    def __init__(self, c):
        self.c = np.asarray(c, dtype=float)

    def objective_value(self, x):
        return float(self.c @ x)


def test_fd_exact_on_linear_function():
    c = np.array([0.5, -2.0, 3.0])
    np.testing.assert_allclose(fd_gradient(Linear(c), np.array([1.0, 2.0, -1.0])), c, atol=1e-8)
    with pytest.raises(ValueError):
        fd_gradient(Linear(c), np.zeros(3), h=0.0)


@pytest.fixture
def problem1d(small1d):
    spec, g, cfg = small1d
    trip, _, _ = target_from_design(spec, np.array([0.25, -0.15, 0.05, 0.15]), g, cfg, m=1)
    return Problem(spec, g, cfg, ObjectiveSpec("f1", [trip[0].phi]))


def test_grad_check_small_problem(problem1d, tmp_path):
    x = np.array([0.9, -0.15, 0.05, 0.15])
    rep = grad_check(problem1d, x)
    assert [r.label for r in rep.rows] == [1, 2, 3, 4]
    assert rep.max_rel_error < 1e-3
    rep.to_csv(tmp_path / "r.csv", ["hello"])
    text = (tmp_path / "r.csv").read_text().splitlines()
    assert text[0] == "# hello" and text[1].startswith("# h_fd=1e-06")
    assert text[2] == "component,adjoint,fd,abs_diff,rel_err"
    header, data = read_csv(tmp_path / "r.csv")
    assert data.shape == (4, 5)


def test_self_comparison_gives_zero_error(problem1d):
    x = np.array([0.1, 0.0, 0.0, 0.1])
    g = problem1d.frozen_dt(x).objective_and_gradient(x)[1]
    rep = grad_check(problem1d, x, components=[0, 2], adjoint=lambda z: g + 0.0)
    assert [r.label for r in rep.rows] == [1, 3]
    # adjoint replaced by a known vector: rows compare it to FD, so pass FD back in
    fd = np.array([r.fd for r in rep.rows])
    rep2 = grad_check(problem1d, x, components=[0, 2],
                      adjoint=lambda z: np.array([fd[0], 0.0, fd[1], 0.0]))
    assert rep2.max_rel_error == 0.0


def test_forward_difference_is_first_order(problem1d):
    x = np.array([0.9, -0.15, 0.05, 0.15])
    p = problem1d.frozen_dt(x)
    g = p.objective_and_gradient(x)[1]
    e1 = np.abs(fd_gradient(p, x, h=1e-3) - g)
    e2 = np.abs(fd_gradient(p, x, h=5e-4) - g)
    np.testing.assert_allclose(e2 / e1, 0.5, rtol=0.1)


def test_parallel_fd_is_bit_identical(problem1d):
    x = np.array([0.2, 0.1, -0.1, 0.0])
    p = problem1d.frozen_dt(x)
    np.testing.assert_array_equal(fd_gradient(p, x, workers=1), fd_gradient(p, x, workers=2))


def test_zero_fd_reports_abs_only():
    r = GradCheckRow(0, 1e-9, 0.0)
    assert r.rel_err is None and r.abs_diff == 1e-9
    rep = GradCheckReport([r, GradCheckRow(1, 2.0, 1.0)], 1e-6, "f1", "x")
    assert rep.max_rel_error == 1.0


@pytest.mark.parametrize("which", ["1d", "2d"])
def test_linearization_full_operator(which, small1d, small2d, rng):
    spec, g, cfg = small1d if which == "1d" else small2d
    res = linearization_check(random_state(g, rng), rng.uniform(0.5, 2, g.n_nodes), g, cfg,
                              trials=10, seed=1)
    assert res.passed and res.worst_rel_error <= 1e-6 and res.skipped == 0


def test_linearization_diffusion_only(rng):
    g = Grid.line(31)
    cfg = SolverConfig.burgers1d()
    res = linearization_check(random_state(g, rng), np.zeros(g.n_nodes), g, cfg, seed=2)
    # with alpha = 0 the residual is linear; only the design product sees the bracket
    assert res.worst_rel_error <= 1e-8


def test_linearization_zero_directions_skipped(small1d, rng):
    spec, g, cfg = small1d
    z = np.zeros(g.n_state)
    res = linearization_check(random_state(g, rng), np.ones(g.n_nodes), g, cfg, trials=2,
                              directions=[(z, np.zeros(g.n_nodes), z)] * 2)
    assert res.skipped == 4 and res.passed and res.worst_rel_error == 0.0
