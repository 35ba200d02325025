"""Modal and mean-flow objectives with their exact partial derivatives."""
from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from .errors import ConfigError, NonDifferentiableError
from .pod import align_sign

QUADRATIC_MODE = "quadratic_mode"        # 1/2 |phi1 - phi1*|^2
MODE_NORM = "mode_norm"                  # |phi1 - phi1*|
MODE_NORM_ENERGY = "mode_norm_energy"    # |phi1 - phi1*| + (s1 - s1*)^2
MULTI_MODE = "multi_mode"                # sum_i |phi_i - phi_i*| + (s_i - s_i*)^2
MEAN_FLOW = "mean_flow"                  # |ubar - ubar*|^2
MEAN_FLOW_MODES = "mean_flow_modes"      # |ubar - ubar*|^2 + lam sum_i |phi_i - phi_i*|^2
SPECTRAL_GAP = "spectral_gap"            # -s1 / s2

KINDS = (QUADRATIC_MODE, MODE_NORM, MODE_NORM_ENERGY, MULTI_MODE,
         MEAN_FLOW, MEAN_FLOW_MODES, SPECTRAL_GAP)

# short aliases used by configs and the CLI
ALIASES = {"f1": QUADRATIC_MODE, "f2": MODE_NORM, "f3": MODE_NORM_ENERGY, "f4": MULTI_MODE}

NORM_EPS = 1e-12


@dataclass(frozen=True)
class ObjectiveSpec:
    kind: str
    target_modes: tuple = ()
    target_sigmas: tuple = ()
    target_mean: Optional[np.ndarray] = None
    m: int = 1
    lam: float = 1.0

    def __post_init__(self):
        kind = ALIASES.get(self.kind, self.kind)
        if kind not in KINDS:
            raise ConfigError(f"unknown objective kind {self.kind!r}")
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "target_modes",
                           tuple(np.asarray(t, dtype=float) for t in self.target_modes))
        object.__setattr__(self, "target_sigmas", tuple(float(s) for s in self.target_sigmas))
        if self.lam < 0:
            raise ConfigError("lambda must be non-negative")
        if kind in (MULTI_MODE, MEAN_FLOW_MODES) and self.m < 1:
            raise ConfigError("mode count must be at least 1")
        if len(self.target_modes) < self.modes_matched:
            raise ConfigError(f"{kind} needs {self.modes_matched} target mode(s), "
                              f"got {len(self.target_modes)}")
        if self.kind in (MODE_NORM_ENERGY, MULTI_MODE) and len(self.target_sigmas) < self.modes_matched:
            raise ConfigError(f"{kind} needs {self.modes_matched} target singular value(s)")
        if self.kind in (MEAN_FLOW, MEAN_FLOW_MODES) and self.target_mean is None:
            raise ConfigError(f"{kind} needs a target mean flow")
        for t in self.target_modes[:self.modes_matched]:
            if abs(np.linalg.norm(t) - 1.0) > 1e-10:
                raise ConfigError("target modes must have unit norm")

    @property
    def modes_matched(self):
        """Number of leading modes compared against targets."""
        if self.kind in (QUADRATIC_MODE, MODE_NORM, MODE_NORM_ENERGY):
            return 1
        if self.kind in (MULTI_MODE, MEAN_FLOW_MODES):
            return self.m
        return 0

    @property
    def modes_required(self):
        """Number of singular triplets the objective reads."""
        return 2 if self.kind == SPECTRAL_GAP else self.modes_matched

    def with_kind(self, kind, **kw):
        return ObjectiveSpec(kind, self.target_modes, self.target_sigmas, self.target_mean,
                             kw.get("m", self.m), kw.get("lam", self.lam))


@dataclass
class Partials:
    """Partial derivatives of an objective.

    ``d_snapshots`` is (n_s, n_t) with column k holding df/du^(k+1), or None
    when the objective does not read the trajectory directly.  ``d_modes[i]``
    is (df/dphi_i, df/dv_i, df/dsigma_i).
    """

    d_snapshots: Optional[np.ndarray]
    d_modes: List[tuple]
    d_design: Optional[np.ndarray] = None


def align_to_targets(spec, triplets):
    """Sign-align each matched triplet against its target mode."""
    out = list(triplets)
    for i in range(min(spec.modes_matched, len(out))):
        out[i] = align_sign(out[i], spec.target_modes[i])
    return out


def _check_count(spec, triplets):
    if len(triplets) < spec.modes_required:
        raise ConfigError(f"{spec.kind} needs {spec.modes_required} triplets, got {len(triplets)}")


def _mean_flow(trajectory):
    return trajectory.snapshots.mean(axis=0)


def evaluate(spec, trajectory, triplets):
    _check_count(spec, triplets)
    tr = align_to_targets(spec, triplets)
    k = spec.kind
    if k == QUADRATIC_MODE:
        d = tr[0].phi - spec.target_modes[0]
        return 0.5 * float(d @ d)
    if k == MODE_NORM:
        return float(np.linalg.norm(tr[0].phi - spec.target_modes[0]))
    if k in (MODE_NORM_ENERGY, MULTI_MODE):
        f = 0.0
        for i in range(spec.modes_matched):
            f += np.linalg.norm(tr[i].phi - spec.target_modes[i])
            f += (tr[i].sigma - spec.target_sigmas[i]) ** 2
        return float(f)
    if k == SPECTRAL_GAP:
        return -tr[0].sigma / tr[1].sigma
    d = _mean_flow(trajectory) - spec.target_mean
    f = float(d @ d)
    if k == MEAN_FLOW_MODES:
        for i in range(spec.modes_matched):
            e = tr[i].phi - spec.target_modes[i]
            f += spec.lam * float(e @ e)
    return f


def _norm_grad(d):
    n = np.linalg.norm(d)
    if n <= NORM_EPS:
        raise NonDifferentiableError("mode mismatch norm is zero; gradient undefined")
    return d / n


def partials(spec, trajectory, triplets):
    """Exact partials of ``evaluate`` with respect to the aligned triplets."""
    _check_count(spec, triplets)
    tr = align_to_targets(spec, triplets)
    k = spec.kind
    n_t = trajectory.n_t
    d_modes = []
    d_snap = None
    for i, t in enumerate(tr[:spec.modes_required]):
        dphi = np.zeros_like(t.phi)
        dsig = 0.0
        if k == QUADRATIC_MODE:
            dphi = t.phi - spec.target_modes[0]
        elif k == MODE_NORM:
            dphi = _norm_grad(t.phi - spec.target_modes[0])
        elif k in (MODE_NORM_ENERGY, MULTI_MODE):
            dphi = _norm_grad(t.phi - spec.target_modes[i])
            dsig = 2.0 * (t.sigma - spec.target_sigmas[i])
        elif k == MEAN_FLOW_MODES:
            dphi = 2.0 * spec.lam * (t.phi - spec.target_modes[i])
        elif k == SPECTRAL_GAP:
            s1, s2 = tr[0].sigma, tr[1].sigma
            dsig = -1.0 / s2 if i == 0 else s1 / s2**2
        d_modes.append((dphi, np.zeros_like(t.v), dsig))
    if k in (MEAN_FLOW, MEAN_FLOW_MODES):
        col = (2.0 / n_t) * (_mean_flow(trajectory) - spec.target_mean)
        d_snap = np.repeat(col[:, None], n_t, axis=1)
    return Partials(d_snap, d_modes, None)
