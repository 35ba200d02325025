"""Command-line front end.

    mcfi forward|make-target|grad-check|invert --config <path> [--out <dir>]
         [--seed <int>] [--threshold <float>] [--plot]

Exit status: 0 success, 1 configuration error, 2 numerical failure,
3 threshold or convergence failure.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import __version__
from .config import RunConfig, canned_names
from .errors import ConfigError, MCFIError
from .io import read_csv, read_vector, write_columns, write_csv
from .model import alpha_field_from_design
from .objectives import ObjectiveSpec
from .optimize import minimize
from .problem import Problem, target_from_design
from .verify import H_FD, grad_check

logger = logging.getLogger("mcfi")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_THRESHOLD = 0, 1, 2, 3


class ThresholdFailure(Exception):
    """Run completed but missed its acceptance threshold or did not converge."""


class Outputs:
    """Tracks written files so a failed command can remove its partial output."""

    def __init__(self, out_dir, cfg, command):
        self.out_dir = out_dir
        self.written = []
        self.header = (f"mcfi {__version__} command={command} config_hash={cfg.hash} "
                       f"seed={cfg.seed}")

    def path(self, name):
        p = os.path.join(self.out_dir, name)
        self.written.append(p)
        return p

    def columns(self, name, columns, comments=()):
        write_columns(self.path(name), columns, [self.header, *comments])

    def rows(self, name, header, rows, comments=()):
        write_csv(self.path(name), header, rows, [self.header, *comments])

    def cleanup(self):
        for p in self.written:
            if os.path.exists(p):
                os.remove(p)


# -- helpers -----------------------------------------------------------------

def _coordinates(grid):
    if grid.dimension == 1:
        return {"x": grid.x}
    X, Y = np.meshgrid(grid.x, grid.y)
    return {"x": X.ravel(), "y": Y.ravel()}


def _state_columns(grid, state, label):
    """State vector as named per-node columns (u, and v in 2-D)."""
    comps = grid.split(state)
    names = ["u", "v"][:len(comps)]
    return {f"{n}_{label}": c.ravel() for n, c in zip(names, comps)}


def snap_times(trajectory, requested):
    """Nearest completed step to each requested time: (step index, true time)."""
    times = trajectory.times
    out = []
    for t in requested:
        k = int(np.argmin(np.abs(times - t)))
        out.append((k, float(times[k])))
    return out


@dataclass
class Targets:
    modes: list
    sigmas: list
    mean: np.ndarray
    design: Optional[np.ndarray] = None


def load_targets(cfg):
    """Target modes, singular values and mean flow from a run or from files."""
    m_needed = max(2, cfg.objective_m, cfg.integer("target.modes", 2))
    if cfg.target_source == "design":
        x_star = cfg.design_vector("target.design", None)
        trip, mean, _ = target_from_design(cfg.design, x_star, cfg.grid, cfg.solver, m=m_needed)
        return Targets([t.phi for t in trip], [t.sigma for t in trip], mean, x_star)
    d = cfg.target_dir
    if d is None or not os.path.isdir(d):
        raise ConfigError(f"target.dir {d!r} is not a directory")
    modes = []
    while os.path.exists(os.path.join(d, f"target_mode_{len(modes) + 1}.csv")):
        modes.append(read_vector(os.path.join(d, f"target_mode_{len(modes) + 1}.csv")))
    if not modes:
        raise ConfigError(f"no target_mode_1.csv in {d}")
    for name in ("target_sigma.csv", "target_mean.csv"):
        if not os.path.exists(os.path.join(d, name)):
            raise ConfigError(f"missing {name} in {d}")
    _, sig = read_csv(os.path.join(d, "target_sigma.csv"))
    mean = read_vector(os.path.join(d, "target_mean.csv"))
    design = None
    if os.path.exists(os.path.join(d, "alpha_design.csv")):
        design = read_vector(os.path.join(d, "alpha_design.csv"))
    n_s = cfg.grid.n_state
    if any(m.size != n_s for m in modes) or mean.size != n_s:
        raise ConfigError(f"target files do not match the grid ({n_s} state entries)")
    return Targets(modes, list(sig[:, 1]), mean, design)


def build_problem(cfg, targets):
    obj = ObjectiveSpec(cfg.objective_kind, targets.modes, targets.sigmas, targets.mean,
                        m=cfg.objective_m, lam=cfg.objective_lambda)
    return Problem(cfg.design, cfg.grid, cfg.solver, obj)


def _alpha_columns(cfg, x):
    if cfg.grid.dimension == 1:
        return {"x": cfg.grid.x, "alpha": alpha_field_from_design(cfg.design, x, cfg.grid)}
    return {"strip": np.arange(1, cfg.design.n_vars + 1), "y": cfg.design.strip_centers(),
            "alpha": np.asarray(x, dtype=float)}


def _plots(args):
    if not args.plot:
        return None
    from . import plotting
    return plotting


# -- commands ----------------------------------------------------------------

def cmd_forward(cfg, out, args):
    x = cfg.design_vector("forward.design", cfg.get("design.initial", "zeros"))
    ic_kind = cfg.get("forward.ic", "default")
    if ic_kind not in ("default", "zero"):
        raise ConfigError(f"forward.ic must be 'default' or 'zero', got {ic_kind!r}")
    ic = np.zeros(cfg.grid.n_state) if ic_kind == "zero" else None
    problem = Problem(cfg.design, cfg.grid, cfg.solver, None, ic=ic)
    traj = problem.simulate(x)
    requested = cfg.vector("forward.times", np.array([0.0, cfg.solver.t_end]))
    picks = snap_times(traj, requested)

    cols = _coordinates(cfg.grid)
    mags = dict(cols)
    for i, (k, t) in enumerate(picks):
        state = traj.state(k)
        cols.update(_state_columns(cfg.grid, state, f"t{i}"))
        if cfg.grid.dimension == 2:
            u, v = cfg.grid.split(state)
            mags[f"m_t{i}"] = np.sqrt(u * u + v * v).ravel()
    notes = [f"t{i}: requested {float(r)!r} -> step {k} at t={t!r}"
             for i, ((k, t), r) in enumerate(zip(picks, requested))]
    out.columns("snapshots.csv", cols, notes)
    out.rows("times.csv", ["index", "requested", "step", "time"],
             [(i, r, k, t) for i, ((k, t), r) in enumerate(zip(picks, requested))])
    out.rows("dt_sequence.csv", ["step", "dt"],
             [(k + 1, dt) for k, dt in enumerate(traj.dt_sequence)])
    if cfg.grid.dimension == 2:
        out.columns("magnitude.csv", mags, notes)
    logger.info("forward run: %d steps to t=%.6g", traj.n_t, traj.times[-1])

    plt = _plots(args)
    if plt is not None:
        labels = [f"t = {t:.2f}" for _, t in picks]
        if cfg.grid.dimension == 1:
            plt.profiles(out.path("snapshots.png"), cfg.grid.x,
                         [traj.state(k) for k, _ in picks], labels, "x", "u")
        else:
            plt.fields(out.path("magnitude.png"), cfg.grid,
                       [mags[f"m_t{i}"] for i in range(len(picks))], labels)
    return EXIT_OK


def cmd_make_target(cfg, out, args):
    x_star = cfg.design_vector("target.design", None)
    m = max(1, cfg.objective_m, cfg.integer("target.modes", 2))
    trip, mean, traj = target_from_design(cfg.design, x_star, cfg.grid, cfg.solver, m=m)
    for t in trip:
        out.columns(f"target_mode_{t.index + 1}.csv", {"phi": t.phi})
    out.rows("target_sigma.csv", ["mode", "sigma"], [(t.index + 1, t.sigma) for t in trip])
    out.columns("target_mean.csv", {"mean": mean})
    out.columns("alpha_design.csv", {"x": x_star})
    alpha = alpha_field_from_design(cfg.design, x_star, cfg.grid)
    out.columns("alpha_nodal.csv", {**_coordinates(cfg.grid), "alpha": alpha})
    logger.info("target from %d steps; sigma = %s", traj.n_t,
                ", ".join(f"{t.sigma:.6g}" for t in trip))
    plt = _plots(args)
    if plt is not None:
        plt.modes(out.path("target_modes.png"), cfg.grid, [t.phi for t in trip],
                  [f"mode {t.index + 1}" for t in trip])
    return EXIT_OK


def cmd_grad_check(cfg, out, args):
    targets = load_targets(cfg)
    problem = build_problem(cfg, targets)
    x = cfg.design_vector("gradcheck.point", cfg.get("design.initial", "zeros"))
    h = cfg.number("gradcheck.h", H_FD)
    threshold = args.threshold if args.threshold is not None \
        else cfg.number("gradcheck.threshold", None)
    report = grad_check(problem, x, components=cfg.components(), h=h,
                        workers=cfg.integer("gradcheck.workers", 1))
    report.to_csv(out.path("gradcheck.csv"), [out.header])
    print(report.summary())
    plt = _plots(args)
    if plt is not None:
        plt.gradcheck(out.path("gradcheck.png"), report)
    if not report.all_valid:
        raise ThresholdFailure("some perturbed runs diverged")
    if threshold is not None and report.max_rel_error > threshold:
        raise ThresholdFailure(f"max relative error {report.max_rel_error:.3e} exceeds "
                               f"threshold {threshold:g}")
    return EXIT_OK


def cmd_invert(cfg, out, args):
    targets = load_targets(cfg)
    problem = build_problem(cfg, targets)
    x0 = cfg.design_vector("design.initial", "zeros")
    x, history = minimize(problem, x0, cfg.optimize_options())

    history.to_csv(out.path("history.csv"), [out.header])
    out.columns("design_optimized.csv", {"x": x})
    out.columns("alpha_initial.csv", _alpha_columns(cfg, x0))
    out.columns("alpha_optimized.csv", _alpha_columns(cfg, x))
    if targets.design is not None:
        out.columns("alpha_target.csv", _alpha_columns(cfg, targets.design))

    n_modes = max(1, problem.objective.modes_matched)
    ev0, ev1 = problem.evaluate(x0), problem.evaluate(x)
    for label, ev in (("initial", ev0), ("optimized", ev1)):
        out.columns(f"mode_{label}.csv",
                    {**_coordinates(cfg.grid),
                     **{k: v for i in range(n_modes)
                        for k, v in _state_columns(cfg.grid, ev.triplets[i].phi,
                                                   f"phi{i + 1}").items()}})
    out.columns("mode_target.csv",
                {**_coordinates(cfg.grid),
                 **{k: v for i in range(n_modes)
                    for k, v in _state_columns(cfg.grid, targets.modes[i], f"phi{i + 1}").items()}})

    mismatch = [float(np.linalg.norm(ev1.triplets[i].phi - targets.modes[i]))
                for i in range(n_modes)]
    summary = [("objective", problem.objective.kind), ("f_initial", ev0.f), ("f_final", ev1.f),
               ("iterations", history.n_iter), ("termination", history.reason)]
    summary += [(f"mode{i + 1}_mismatch", v) for i, v in enumerate(mismatch)]
    if targets.design is not None:
        summary.append(("design_error_inf", float(np.max(np.abs(x - targets.design)))))
    out.rows("summary.csv", ["key", "value"], summary)
    for k, v in summary:
        print(f"{k}: {v}")

    plt = _plots(args)
    if plt is not None:
        plt.history(out.path("history.png"), {problem.objective.kind: history.f})
        a = [_alpha_columns(cfg, x0), _alpha_columns(cfg, x)]
        names = ["initial", "optimized"]
        if targets.design is not None:
            a.append(_alpha_columns(cfg, targets.design))
            names.append("target")
        key = "x" if cfg.grid.dimension == 1 else "y"
        plt.profiles(out.path("alpha.png"), a[0][key], [c["alpha"] for c in a], names,
                     key, "alpha")
        plt.modes(out.path("modes.png"), cfg.grid,
                  [ev0.triplets[0].phi, ev1.triplets[0].phi, targets.modes[0]], names[:2] + ["target"])
    if not history.converged:
        raise ThresholdFailure(f"optimizer stopped: {history.reason}")
    return EXIT_OK


COMMANDS = {"forward": cmd_forward, "make-target": cmd_make_target,
            "grad-check": cmd_grad_check, "invert": cmd_invert}


def build_parser():
    p = argparse.ArgumentParser(prog="mcfi", description=__doc__.split("\n")[0])
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", required=True,
                   help="config file, or one of the shipped configs: " + ", ".join(canned_names()))
    p.add_argument("--out", default=None, help="output directory (default ./mcfi-out/<command>)")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--threshold", type=float, default=None,
                   help="grad-check: fail (exit 3) above this max relative error")
    p.add_argument("--plot", action="store_true", help="also render PNG figures")
    p.add_argument("-v", "--verbose", action="store_true")
    p.add_argument("--version", action="version", version=f"mcfi {__version__}")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = RunConfig.from_file(args.config, seed=args.seed)
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out_dir = args.out or os.path.join("mcfi-out", args.command)
    os.makedirs(out_dir, exist_ok=True)
    out = Outputs(out_dir, cfg, args.command)
    try:
        return COMMANDS[args.command](cfg, out, args)
    except ConfigError as exc:
        out.cleanup()
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (MCFIError, FloatingPointError, np.linalg.LinAlgError) as exc:
        out.cleanup()
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ThresholdFailure as exc:
        print(f"failed: {exc}", file=sys.stderr)
        return EXIT_THRESHOLD


if __name__ == "__main__":
    sys.exit(main())
