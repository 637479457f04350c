"""Brute-force Holevo chi maximisation over small pure-state input ensembles.

Deliberately independent of the geometric solvers: no relative entropy
kernel, no surface search, just chi evaluated from output entropies and a
derivative-free local search with random restarts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .bloch import relative_entropy_many
from .channels import ChannelParams
from .capacity.result import CapacityResult, Method, SignalEnsemble

INITIAL_STEP = 0.3
SHRINK = 0.5
MIN_STEP = 1e-7
IMPROVE_TOL = 1e-14


@dataclass(frozen=True)
class PureStateParam:
    """Ket (alpha, sqrt(1 - alpha^2) e^{i theta})."""

    alpha: float
    theta: float

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha = {self.alpha} outside [0, 1]")

    def bloch(self) -> np.ndarray:
        return _ket_bloch(np.array(self.alpha), np.array(self.theta))


@dataclass(frozen=True)
class EnsembleParam:
    states: tuple[PureStateParam, ...]
    raw_weights: tuple[float, ...] = field(default=())

    def __post_init__(self):
        if not 1 <= len(self.states) <= 4:
            raise ValueError("ensembles hold between one and four states")
        if not self.raw_weights:
            object.__setattr__(self, "raw_weights", (0.0,) * len(self.states))
        if len(self.raw_weights) != len(self.states):
            raise ValueError("one raw weight per state")

    @classmethod
    def from_probs(cls, states, probs) -> "EnsembleParam":
        """Raw weights are log-probabilities; zero probabilities are not representable."""
        return cls(tuple(states), tuple(float(math.log(p)) for p in probs))

    @property
    def probs(self) -> np.ndarray:
        return _softmax(np.asarray(self.raw_weights, dtype=float))

    def inputs(self) -> np.ndarray:
        return np.array([s.bloch() for s in self.states])


def _softmax(z: np.ndarray) -> np.ndarray:
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def _ket_bloch(alpha: np.ndarray, theta: np.ndarray) -> np.ndarray:
    s = 2.0 * alpha * np.sqrt(np.clip(1.0 - alpha * alpha, 0.0, None))
    return np.stack([s * np.cos(theta), s * np.sin(theta), 2.0 * alpha * alpha - 1.0], axis=-1)


def _entropy_bits(r: np.ndarray) -> np.ndarray:
    r = np.clip(r, 0.0, 1.0)
    out = np.zeros_like(r)
    for x in (0.5 * (1.0 + r), 0.5 * (1.0 - r)):
        pos = x > 0
        out[pos] -= x[pos] * np.log2(x[pos])
    return out


def _inputs(x: np.ndarray, n: int, frames: np.ndarray | None) -> np.ndarray:
    u = _ket_bloch(np.clip(x[..., :n], 0.0, 1.0), x[..., n : 2 * n])
    if frames is None:
        return u
    # frames has shape (rows, n, 3, 3); x may carry an extra poll axis
    if u.ndim == 4:
        return np.einsum("rkij,rpkj->rpki", frames, u)
    return np.einsum("rkij,rkj->rki", frames, u)


def _chi_batch(p: ChannelParams, x: np.ndarray, n: int, frames: np.ndarray | None = None) -> np.ndarray:
    """chi for a batch of flat parameter vectors [alphas, thetas, raw weights].

    ``frames`` optionally rotates each member's input Bloch vector, so the
    search chart can be re-centred away from its poles.
    """
    probs = _softmax(x[..., 2 * n :])
    outs = p.t + _inputs(x, n, frames) * p.lam
    avg = np.einsum("...k,...kj->...j", probs, outs)
    s_avg = _entropy_bits(np.linalg.norm(avg, axis=-1))
    s_out = _entropy_bits(np.linalg.norm(outs, axis=-1))
    return s_avg - np.einsum("...k,...k->...", probs, s_out)


def chi_objective(p: ChannelParams, e: EnsembleParam) -> float:
    """Holevo chi in bits of the channel outputs of the ensemble ``e``."""
    n = len(e.states)
    x = np.concatenate(
        [[s.alpha for s in e.states], [s.theta for s in e.states], np.asarray(e.raw_weights, dtype=float)]
    )
    return float(_chi_batch(p, x, n))


def _initial_points(n: int, restarts: int, seed: int) -> np.ndarray:
    rows = []
    for k in range(restarts):
        rng = np.random.default_rng([seed, k])
        # alpha^2 uniform gives inputs uniform on the sphere
        alpha = np.sqrt(rng.uniform(size=n))
        theta = rng.uniform(0.0, 2 * math.pi, size=n)
        raw = rng.normal(scale=0.5, size=n)
        rows.append(np.concatenate([alpha, theta, raw]))
    return np.array(rows)


def _equator_frames(u: np.ndarray) -> np.ndarray:
    """Rotations taking (1, 0, 0), the chart point alpha = 1/sqrt(2), theta = 0,
    onto each unit vector of ``u`` (shape (..., 3))."""
    ref = np.where(np.abs(u[..., [2]]) < 0.9, np.array([0.0, 0.0, 1.0]), np.array([1.0, 0.0, 0.0]))
    a = np.cross(ref, u)
    a /= np.linalg.norm(a, axis=-1, keepdims=True)
    b = np.cross(u, a)
    return np.stack([u, a, b], axis=-1)


def _pattern_search(f, x0: np.ndarray, step0: float, shrink: float, min_step: float, max_polls: int):
    """Compass search run on every row of ``x0`` at once.

    Each round polls x +/- step along every coordinate, moves to the best
    improving poll, and shrinks the step of rows where nothing improved.
    ``f`` maps (rows, d) and (rows, polls, d) arrays to values.
    Returns (x, fx, polls per row).
    """
    R, d = x0.shape
    x = x0.copy()
    fx = f(x, np.arange(R))
    step = np.full(R, step0)
    polls = np.zeros(R, dtype=int)
    dirs = np.vstack([np.eye(d), -np.eye(d)])
    while True:
        active = step >= min_step
        if not active.any() or polls.max() >= max_polls:
            break
        idx = np.flatnonzero(active)
        trial = x[idx, None, :] + step[idx, None, None] * dirs[None]
        ft = f(trial, idx)
        best = np.argmax(ft, axis=1)
        fbest = ft[np.arange(len(idx)), best]
        polls[idx] += 2 * d
        # a member whose weight is dying keeps gaining ~0 forever; ignore such moves
        better = fbest > fx[idx] + IMPROVE_TOL
        moved = idx[better]
        x[moved] = trial[better, best[better]]
        fx[moved] = fbest[better]
        step[idx[~better]] *= shrink
    return x, fx, polls


def brute_force_capacity(
    p: ChannelParams,
    n_states: int = 4,
    restarts: int = 20,
    seed: int = 0,
    initial_step: float = INITIAL_STEP,
    shrink: float = SHRINK,
    min_step: float = MIN_STEP,
    max_polls: int = 10_000,
    recharts: int = 3,
    recharts_step: float = 0.05,
) -> CapacityResult:
    """Best chi over ``restarts`` local searches of ``n_states``-member ensembles.

    After each search the chart of every member is re-centred on its input
    and the search repeated with a smaller initial step, up to ``recharts``
    times or until no restart improves.
    """
    if n_states not in (2, 3, 4):
        raise ValueError("n_states must be 2, 3 or 4")
    if restarts < 1:
        raise ValueError("restarts must be positive")
    n = n_states
    x = _initial_points(n, restarts, seed)
    frames = None
    polls = np.zeros(restarts, dtype=int)
    fx = np.full(restarts, -np.inf)
    step0 = initial_step
    for rnd in range(recharts + 1):
        def f(z, rows, frames=frames):
            return _chi_batch(p, z, n, None if frames is None else frames[rows])

        prev = fx
        x, fx, used = _pattern_search(f, x, step0, shrink, min_step, max_polls)
        polls += used
        if rnd > 0 and np.max(fx - prev) <= 1e-13:
            break
        # re-centre each member's chart on its current input: the alpha-theta
        # chart is singular at its poles, where compass moves stall
        u = _inputs(x, n, frames)
        frames = _equator_frames(u)
        x = x.copy()
        x[:, :n] = 1.0 / math.sqrt(2.0)
        x[:, n : 2 * n] = 0.0
        step0 = recharts_step
    k = int(np.argmax(fx))
    best = x[k]
    probs = _softmax(best[2 * n :])
    inputs = _inputs(best[None], n, None if frames is None else frames[[k]])[0]
    outputs = p.t + inputs * p.lam
    ens = SignalEnsemble.from_members(probs, inputs, outputs)
    res = CapacityResult(
        capacity_bits=float(fx[k]),
        average_output=ens.average_output,
        ensemble=ens,
        method=Method.BRUTE_FORCE,
        iterations=int(polls.sum()),
        diagnostics={
            "n_states": n,
            "restarts": restarts,
            "seed": seed,
            "best_restart": k,
            "restart_values": fx.tolist(),
            "restart_spread": float(fx.max() - fx.min()),
            "hits_within_1e-6": int(np.sum(fx >= fx[k] - 1e-6)),
            "initial_step": initial_step,
            "shrink": shrink,
            "min_step": min_step,
            "recharts": recharts,
        },
    )
    # members with vanishing weight can sit anywhere; report residual over the rest
    live = [m for m in ens.items if m.prob > 1e-6]
    if live and np.linalg.norm(ens.average_output) < 1.0 - 1e-9:
        d = relative_entropy_many(np.array([m.output for m in live]), ens.average_output)
        res.max_equal_distance_residual = float(np.max(np.abs(d - res.capacity_bits)))
    return res
