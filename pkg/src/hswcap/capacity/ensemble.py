"""Recovering signal probabilities from the optimal average output."""

from __future__ import annotations

import numpy as np
from scipy.optimize import nnls

from ..channels import ChannelParams, invert_channel
from .result import SignalEnsemble, SolverError

HULL_TOL = 1e-6
MAX_SIGNALS = 4


class NotInHull(SolverError):
    pass


def _caratheodory(points: np.ndarray, w: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Shrink the support of a convex combination to affinely independent
    points (at most 4 in three dimensions) without changing the mean."""
    w = w.copy()
    while True:
        supp = np.flatnonzero(w > tol)
        M = np.vstack([points[supp].T, np.ones(len(supp))])
        if len(supp) <= np.linalg.matrix_rank(M, tol=1e-10):
            break
        # direction in the null space of [points; 1] keeps mean and total weight fixed
        _, _, vt = np.linalg.svd(M)
        z = vt[-1]
        if not np.any(z > 0):
            z = -z
        pos = z > 1e-14
        ratio = np.min(w[supp][pos] / z[pos])
        w[supp] -= ratio * z
        w[np.abs(w) < tol] = 0.0
        w = np.clip(w, 0.0, None)
    return w / w.sum()


def mixture_weights(points, v, weight: float = 1e3) -> tuple[np.ndarray, float]:
    """Non-negative weights summing to one with sum_k w_k points_k ~ v.

    Solved as a non-negative least-squares problem with the sum constraint
    appended as a heavily weighted row. Returns (weights, residual norm).
    """
    P = np.asarray(points, dtype=float)
    v = np.asarray(v, dtype=float)
    A = np.vstack([P.T, weight * np.ones(len(P))])
    b = np.concatenate([v, [weight]])
    w, _ = nnls(A, b, maxiter=50 * len(P) + 100)
    if w.sum() <= 0:
        return w, float("inf")
    w = w / w.sum()
    return w, float(np.linalg.norm(w @ P - v))


def recover_ensemble(p: ChannelParams, v, argmax_set, tol: float = HULL_TOL) -> SignalEnsemble:
    """Probabilities p_k >= 0 with sum p_k W_k = v over the given maximisers,
    reduced to at most four members, with pure inputs recovered by
    inverting the channel."""
    pts = np.asarray([np.asarray(w, dtype=float) for w in argmax_set])
    if len(pts) == 0:
        raise NotInHull("empty maximiser set")
    v = np.asarray(v, dtype=float)
    w, resid = mixture_weights(pts, v)
    if resid > tol:
        raise NotInHull(f"average output is {resid:.3g} away from the hull of the maximisers")
    w = _caratheodory(pts, w)
    keep = np.flatnonzero(w > 1e-12)
    assert len(keep) <= MAX_SIGNALS
    outputs = pts[keep]
    inputs = [invert_channel(p, o, tol=1e-6) for o in outputs]
    probs = w[keep] / w[keep].sum()
    ens = SignalEnsemble.from_members(probs, inputs, outputs)
    return ens
