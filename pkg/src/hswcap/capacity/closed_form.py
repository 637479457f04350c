"""Capacities with closed-form or one-dimensional solutions: unital
channels and linear (segment) channels."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from ..bloch import NORM_TOL, _neg_entropy_nats, relative_entropy, von_neumann_entropy
from ..channels import ChannelParams, permute_to_z, unpermute
from .result import CapacityResult, Method, SignalEnsemble, SolverError


class NotUnital(SolverError):
    pass


class DegenerateSegment(SolverError):
    pass


class NoBracket(SolverError):
    pass


class EndpointPure(SolverError):
    pass


def unital_capacity(p: ChannelParams) -> CapacityResult:
    """1 - S(|lambda_major|) with two equiprobable antipodal signals on the
    major axis. Ties pick the lowest axis index; other optimal ensembles
    exist in that case."""
    if not p.is_unital:
        raise NotUnital(f"t = {p.t.tolist()} is not zero")
    absl = np.abs(p.lam)
    k = int(np.argmax(absl))  # first maximal axis
    e = np.zeros(3)
    e[k] = 1.0
    outputs = [p.lam * e, -p.lam * e]
    ens = SignalEnsemble.from_members([0.5, 0.5], [e, -e], outputs)
    cap = 1.0 - von_neumann_entropy(float(absl[k]))
    return CapacityResult(
        capacity_bits=cap,
        average_output=np.zeros(3),
        ensemble=ens,
        method=Method.UNITAL,
        diagnostics={"major_axis": k, "degenerate_major": int(np.sum(absl == absl[k])) > 1},
    )


def _atanh_over(x: float) -> float:
    """atanh(x) / x with the x -> 0 limit."""
    if abs(x) < 1e-8:
        return 1.0 + x * x / 3.0
    return math.atanh(x) / x


def linear_capacity_axis_aligned(p: ChannelParams) -> CapacityResult:
    """Segment on the z-axis: the average output (0, 0, q) has a closed form.

    With signed endpoints a = t_z + lam_z and b = t_z - lam_z, equating the
    two relative entropies gives q = tanh[(F(a) - F(b)) / (a - b)] where
    F(r) = 1/2 ln(1 - r^2) + r atanh(r).
    """
    if p.lam[2] == 0.0:
        raise DegenerateSegment("lambda_z = 0: the output set is a single point")
    if np.any(p.lam[:2] != 0.0) or np.any(np.abs(p.t[:2]) > NORM_TOL):
        raise SolverError("axis-aligned linear solver needs t_x = t_y = lambda_x = lambda_y = 0")
    tz, lz = float(p.t[2]), float(p.lam[2])
    a, b = tz + lz, tz - lz
    q = math.tanh((_neg_entropy_nats(abs(a)) - _neg_entropy_nats(abs(b))) / (a - b))
    v = np.array([0.0, 0.0, q])
    w_plus, w_minus = np.array([0.0, 0.0, a]), np.array([0.0, 0.0, b])
    p_plus = (q - b) / (a - b)
    ens = SignalEnsemble.from_members(
        [p_plus, 1.0 - p_plus], [[0, 0, 1.0], [0, 0, -1.0]], [w_plus, w_minus]
    )
    cap = relative_entropy(w_plus, v)
    res = CapacityResult(cap, v, ens, Method.LINEAR_CLOSED_FORM, diagnostics={"q": q, "beta": 2 * p_plus - 1})
    res.max_equal_distance_residual = res.equal_distance_residual()
    return res


@dataclass
class LinearSolveState:
    beta: float
    A: float
    B: float
    C: float

    @property
    def r_plus(self) -> float:
        return math.sqrt(self.A)

    @property
    def r_minus(self) -> float:
        return math.sqrt(self.C)

    @property
    def q(self) -> float:
        return math.sqrt(self.B)


def _segment_residual(t: np.ndarray, lz: float, beta: float) -> float:
    """LHS - RHS of the equal-distance condition along the segment.

    4 lz (t_z + beta lz) atanh(sqrt B) / sqrt B
        - [ln(1-A) - ln(1-C) + 2 sqrt(A) atanh(sqrt A) - 2 sqrt(C) atanh(sqrt C)]
    """
    tx, ty, tz = t
    perp = tx * tx + ty * ty
    A = perp + (tz + lz) ** 2
    C = perp + (tz - lz) ** 2
    B = perp + (tz + beta * lz) ** 2
    rhs = 2.0 * (_neg_entropy_nats(math.sqrt(A)) - _neg_entropy_nats(math.sqrt(C)))
    lhs = 4.0 * lz * (tz + beta * lz) * _atanh_over(math.sqrt(B))
    return lhs - rhs


def linear_capacity_general(p: ChannelParams) -> CapacityResult:
    """Linear channel with arbitrary translation: solve the transcendental
    equal-distance equation for the segment position beta in (-1, 1)."""
    if len(p.active_axes) != 1:
        if not p.active_axes:
            raise DegenerateSegment("all lambda are zero: the output set is a single point")
        raise SolverError("linear solver needs exactly one nonzero lambda")
    pz, perm = permute_to_z(p)
    t, lz = pz.t, float(pz.lam[2])
    A = float(t[0] ** 2 + t[1] ** 2 + (t[2] + lz) ** 2)
    C = float(t[0] ** 2 + t[1] ** 2 + (t[2] - lz) ** 2)
    if A >= 1.0 - NORM_TOL or C >= 1.0 - NORM_TOL:
        raise EndpointPure("a segment endpoint is a pure state")

    lo, hi = -1.0 + 1e-9, 1.0 - 1e-9
    g_lo, g_hi = _segment_residual(t, lz, lo), _segment_residual(t, lz, hi)
    if g_lo * g_hi > 0:
        raise NoBracket("equal-distance residual does not change sign on the segment")
    beta = brentq(lambda b: _segment_residual(t, lz, b), lo, hi, xtol=1e-15, rtol=1e-15, maxiter=200)
    resid = _segment_residual(t, lz, beta)

    w_plus = t + np.array([0.0, 0.0, lz])
    w_minus = t - np.array([0.0, 0.0, lz])
    v = t + np.array([0.0, 0.0, beta * lz])
    d_plus, d_minus = relative_entropy(w_plus, v), relative_entropy(w_minus, v)
    if abs(d_plus - d_minus) > 1e-9:
        raise SolverError(f"endpoint distances disagree: {d_plus} vs {d_minus}")

    state = LinearSolveState(beta=beta, A=A, B=float(v @ v), C=C)
    ens = SignalEnsemble.from_members(
        [(1 + beta) / 2, (1 - beta) / 2],
        [unpermute([0, 0, 1.0], perm), unpermute([0, 0, -1.0], perm)],
        [unpermute(w_plus, perm), unpermute(w_minus, perm)],
    )
    res = CapacityResult(
        capacity_bits=d_plus,
        average_output=unpermute(v, perm),
        ensemble=ens,
        method=Method.LINEAR_TRANSCENDENTAL,
        diagnostics={"beta": beta, "residual": resid, "state": state, "axis_perm": perm},
    )
    res.max_equal_distance_residual = res.equal_distance_residual()
    return res
