"""Snapshot POD via a thin SVD of the temporally centered snapshot matrix."""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg as la

from .errors import AmbiguousAlignmentError, DegenerateInputError, DimensionError, NearDegenerateWarning
from .model import SingularTriplet, Trajectory

GAP_RTOL = 1e-8


@dataclass(frozen=True)
class CenteredSnapshots:
    """Zero-mean snapshot matrix ``Ut`` (n_s, n_t) and the removed ``mean``."""

    Ut: np.ndarray
    mean: np.ndarray

    @property
    def n_t(self):
        return self.Ut.shape[1]

    @property
    def n_s(self):
        return self.Ut.shape[0]


def center(snapshots):
    """Remove the temporal mean from every row of the snapshot matrix.

    Accepts a :class:`Trajectory` (columns u^(1)..u^(n_t), initial state
    excluded) or a raw (n_s, n_t) array.
    """
    U = snapshots.matrix if isinstance(snapshots, Trajectory) else np.asarray(snapshots, float)
    if U.ndim != 2:
        raise DimensionError("snapshot matrix must be two-dimensional")
    if U.shape[1] < 2:
        raise DegenerateInputError("need at least two snapshots to center")
    mean = U.mean(axis=1)
    return CenteredSnapshots(np.ascontiguousarray(U - mean[:, None]), mean)


def _canonical_sign(phi):
    k = np.argmax(np.abs(phi))
    return -1.0 if phi[k] < 0 else 1.0


def compute_modes(centered, m):
    """Leading ``m`` singular triplets of the centered snapshots.

    Each mode is sign-normalized so that its largest-magnitude entry is
    positive.  Emits :class:`NearDegenerateWarning` if sigma_m is not
    separated from sigma_{m+1}.
    """
    Ut = centered.Ut if isinstance(centered, CenteredSnapshots) else np.asarray(centered, float)
    n_s, n_t = Ut.shape
    if not 1 <= m <= min(n_s, n_t):
        raise DimensionError(f"mode count {m} outside [1, {min(n_s, n_t)}]")
    Phi, s, Vt = la.svd(Ut, full_matrices=False, lapack_driver="gesdd")
    if m < s.size and s[m - 1] - s[m] <= GAP_RTOL * s[0]:
        warnings.warn(f"sigma_{m} and sigma_{m + 1} nearly coincide "
                      f"({s[m - 1]:.3e} vs {s[m]:.3e})", NearDegenerateWarning, stacklevel=2)
    out = []
    for i in range(m):
        sign = _canonical_sign(Phi[:, i])
        out.append(SingularTriplet(sign * Phi[:, i], s[i], sign * Vt[i], i))
    return out


def singular_values(centered):
    Ut = centered.Ut if isinstance(centered, CenteredSnapshots) else np.asarray(centered, float)
    return la.svdvals(Ut)


def align_sign(triplet, reference_mode):
    """Jointly flip (phi, v) when phi points away from ``reference_mode``."""
    ref = np.asarray(reference_mode, dtype=float)
    if ref.shape != triplet.phi.shape:
        raise DimensionError("reference mode length differs from the mode")
    d = float(triplet.phi @ ref)
    if d == 0.0:
        raise AmbiguousAlignmentError("mode is orthogonal to its reference")
    return triplet.flipped() if d < 0 else triplet


def pod_residual(triplet, centered):
    """Stacked residual [Ut v - s phi; Ut^T phi - s v; phi^T phi - 1]."""
    Ut = centered.Ut if isinstance(centered, CenteredSnapshots) else np.asarray(centered, float)
    phi, v, s = triplet.phi, triplet.v, triplet.sigma
    return np.concatenate([Ut @ v - s * phi, Ut.T @ phi - s * v, [phi @ phi - 1.0]])
