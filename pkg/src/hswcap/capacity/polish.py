"""Local refinement of an approximate min-max solution.

At the optimum the average output V, the member inputs u_k and the
probabilities p_k satisfy a square nonlinear system:

    sum_k p_k E(u_k) = V                      (mixture)
    grad_u D(E(u_k) || V) tangent to sphere = 0  (each output a surface critical point)
    D(E(u_k) || V) equal for all k            (equal distance)

Starting from the iterative solver's answer, a least-squares solve of this
system pins V to ~1e-12 instead of the ~1e-5 a stopping rule on dmax gives.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares

from ..bloch import LN2, relative_entropy_many
from ..channels import ChannelParams
from .surface import _tangent_frame


@dataclass
class Polished:
    v: np.ndarray
    probs: np.ndarray
    inputs: np.ndarray
    outputs: np.ndarray
    distances: np.ndarray
    cost: float


def _unpack(x, u0, e1, e2):
    m = len(u0)
    v = x[:3]
    ab = x[3 : 3 + 2 * m].reshape(m, 2)
    pr = x[3 + 2 * m :]
    u = u0 + ab[:, :1] * e1 + ab[:, 1:] * e2
    u /= np.linalg.norm(u, axis=1, keepdims=True)
    probs = np.append(pr, 1.0 - pr.sum())
    return v, u, probs


def _residuals(x, p: ChannelParams, u0, e1, e2):
    v, u, probs = _unpack(x, u0, e1, e2)
    q = np.linalg.norm(v)
    if q >= 1.0:
        return np.full(len(x), 1e3)
    w = p.t + u * p.lam
    r = np.linalg.norm(w, axis=1)
    if np.any(r >= 1.0):
        return np.full(len(x), 1e3)
    atq = np.arctanh(q) / q if q > 1e-12 else 1.0
    atr = np.where(r > 1e-12, np.arctanh(r) / np.where(r > 1e-12, r, 1.0), 1.0)
    # gradient of D(w || v) in w, then pulled back to the input sphere
    g = (atr[:, None] * w - atq * v) / LN2
    gu = g * p.lam
    t1 = e1 - np.sum(e1 * u, axis=1, keepdims=True) * u
    t2 = e2 - np.sum(e2 * u, axis=1, keepdims=True) * u
    stat = np.column_stack([np.sum(gu * t1, axis=1), np.sum(gu * t2, axis=1)]).ravel()
    mix = probs @ w - v
    d = relative_entropy_many(w, v)
    return np.concatenate([mix, stat, d[1:] - d[0]])


def polish_solution(p: ChannelParams, v, inputs, probs) -> Polished | None:
    """Refine (v, member inputs, probabilities); None if the solve fails or
    leaves the feasible region."""
    u0 = np.asarray(inputs, dtype=float)
    m = len(u0)
    if m < 2:
        return None
    e1, e2 = _tangent_frame(u0)
    x0 = np.concatenate([np.asarray(v, dtype=float), np.zeros(2 * m), np.asarray(probs, dtype=float)[:-1]])
    try:
        sol = least_squares(
            _residuals, x0, args=(p, u0, e1, e2), method="lm", xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=200 * len(x0)
        )
    except (ValueError, FloatingPointError):
        return None
    v_new, u, pr = _unpack(sol.x, u0, e1, e2)
    res = _residuals(sol.x, p, u0, e1, e2)
    if not np.all(np.isfinite(res)) or np.max(np.abs(res)) > 1e-10 or np.any(pr < -1e-12):
        return None
    w = p.t + u * p.lam
    return Polished(v_new, np.clip(pr, 0.0, None), u, w, relative_entropy_many(w, v_new), float(sol.cost))
