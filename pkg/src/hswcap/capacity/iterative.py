"""General min-max solver: move the candidate average output towards the
surface point that is currently farthest from it in relative entropy.

Every accepted step strictly lowers the maximal distance; a step that
would not is undone and the step size halved.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from ..bloch import BlochDomainError, relative_entropy_many
from ..channels import ChannelParams, invert_channel
from .ensemble import MAX_SIGNALS, NotInHull, mixture_weights, recover_ensemble
from .polish import polish_solution
from .result import CapacityResult, Method, SignalEnsemble, SolverError
from .surface import SurfaceMax, surface_search

log = logging.getLogger(__name__)

# dmax is quadratic along one direction at the optimum, so a 1e-10 stop on
# dmax pins the average output only to ~1e-5
ENSEMBLE_HULL_TOL = 1e-4
GRID_TIE_TOL = 1e-9


class MaxItersExceeded(SolverError):
    def __init__(self, msg: str, result: CapacityResult):
        super().__init__(msg)
        self.result = result


@dataclass(frozen=True)
class IterConfig:
    step_epsilon: float = 0.5
    shrink_factor: float = 0.5
    surface_grid: int = 96
    refine_iters: int = 40
    tol_dmax: float = 1e-10
    max_iters: int = 10_000
    seed: int = 0
    # 'auto' restricts to the XZ plane for channels symmetric about z
    symmetry: str = "auto"
    random_start: bool = False
    balanced_steps: bool = True
    min_step: float = 1e-13
    # refine the stopping point by solving the optimality conditions
    polish: bool = True

    def __post_init__(self):
        if not 0.0 < self.step_epsilon < 1.0:
            raise ValueError("step_epsilon must lie in (0, 1)")
        if not 0.0 < self.shrink_factor < 1.0:
            raise ValueError("shrink_factor must lie in (0, 1)")
        if self.tol_dmax <= 0:
            raise ValueError("tol_dmax must be positive")
        if self.symmetry not in ("auto", "none", "xz"):
            raise ValueError("symmetry must be 'auto', 'none' or 'xz'")

    def plane_for(self, p: ChannelParams) -> str | None:
        if self.symmetry == "xz":
            return "xz"
        if self.symmetry == "auto" and is_z_symmetric(p):
            return "xz"
        return None


def is_z_symmetric(p: ChannelParams) -> bool:
    """Output ellipsoid invariant under rotations about the z-axis."""
    return bool(p.t[0] == 0.0 and p.t[1] == 0.0 and abs(p.lam[0]) == abs(p.lam[1]) and p.lam[0] != 0.0)


def balanced_target(points: np.ndarray, iters: int = 500, tol: float = 1e-13) -> np.ndarray:
    """Mixture of ``points`` maximising the Holevo quantity of the finite
    ensemble (Blahut-Arimoto fixed point). Every point with positive weight
    is then equidistant from the mixture, and none is farther."""
    return balanced_weights(points, iters, tol) @ points


def balanced_weights(points: np.ndarray, iters: int = 500, tol: float = 1e-13) -> np.ndarray:
    k = len(points)
    w = np.full(k, 1.0 / k)
    for _ in range(iters):
        avg = w @ points
        d = relative_entropy_many(points, avg)
        new = w * np.exp2(d - d.max())
        new /= new.sum()
        if np.max(np.abs(new - w)) < tol:
            w = new
            break
        w = new
    return w


def _competitors(sm: SurfaceMax, max_ties: int = 128) -> np.ndarray:
    """Refined local maxima, or the coarse grid points tied at the top when
    refinement kept a single one.

    The grid ties matter when the maximisers form a continuum (a ring on a
    symmetric ellipsoid): refinement then keeps a single representative.
    """
    pts = [c.output for c in sm.candidates]
    if len(pts) == 1 and sm.grid_values is not None:
        ties = sm.grid_outputs[sm.grid_values >= sm.grid_values.max() - GRID_TIE_TOL]
        if len(ties) > 1:
            stride = max(1, len(ties) // max_ties)
            pts.extend(ties[::stride])
    return np.array(pts)


def _random_start(p: ChannelParams, rng: np.random.Generator) -> np.ndarray:
    u = rng.normal(size=3)
    u /= np.linalg.norm(u)
    return p.t + p.lam * (rng.uniform(0.0, 0.9) * u)


def iterative_capacity(p: ChannelParams, cfg: IterConfig = IterConfig(), start=None) -> CapacityResult:
    if np.all(p.lam == 0.0):
        raise SolverError("point channel: the output set has a single state")
    rng = np.random.default_rng(cfg.seed)
    plane = cfg.plane_for(p)
    if start is not None:
        v = np.asarray(start, dtype=float)
    elif cfg.random_start:
        v = _random_start(p, rng)
    else:
        v = p.t.copy()
    if plane == "xz":
        v[1] = 0.0
        if start is None and not cfg.random_start:
            v[0] = 0.0

    def search(x) -> SurfaceMax:
        return surface_search(p, x, grid=cfg.surface_grid, refine_iters=cfg.refine_iters, plane=plane)

    def attempt(target, eps) -> tuple[np.ndarray, SurfaceMax] | None:
        x = (1.0 - eps) * v + eps * np.asarray(target)
        if np.linalg.norm(x) >= 1.0 - 1e-12:
            return None
        try:
            sm_x = search(x)
        except BlochDomainError:
            return None
        return (x, sm_x) if sm_x.dmax < sm.dmax else None

    sm = search(v)
    eps = cfg.step_epsilon
    history = [sm.dmax]
    n_balanced = 0
    converged = False
    it = 0
    for it in range(1, cfg.max_iters + 1):
        w_hat = sm.argmax[rng.integers(len(sm.argmax))].output
        step = attempt(w_hat, eps)
        competitors = _competitors(sm) if step is None and cfg.balanced_steps else None
        if competitors is not None and len(competitors) > 1:
            # a single maximiser cannot lower the max at a tie; move towards
            # the equidistant mixture of the competing local maxima instead
            target = balanced_target(competitors)
            s, tries = 1.0, 0
            while step is None and s >= eps and tries < 8 and np.linalg.norm(target - v) > 1e-13:
                step = attempt(target, s)
                s *= cfg.shrink_factor
                tries += 1
            if step is not None:
                n_balanced += 1
        if step is None:
            eps *= cfg.shrink_factor
            if eps < cfg.min_step:
                converged = True
                break
            continue
        decrease = sm.dmax - step[1].dmax
        v, sm = step
        history.append(sm.dmax)
        if decrease <= cfg.tol_dmax:
            converged = True
            break

    if not converged:
        result = _finish(p, v, sm, cfg, it, history, n_balanced, plane, search, strict=False)
        raise MaxItersExceeded(f"no convergence after {cfg.max_iters} iterations", result)
    return _finish(p, v, sm, cfg, it, history, n_balanced, plane, search)


def _spread(points: np.ndarray, k: int) -> np.ndarray:
    """Farthest-point sample of k rows."""
    idx = [0]
    d = np.linalg.norm(points - points[0], axis=1)
    for _ in range(k - 1):
        idx.append(int(np.argmax(d)))
        d = np.minimum(d, np.linalg.norm(points - points[idx[-1]], axis=1))
    return points[idx]


def _polished(p, v, sm: SurfaceMax, search):
    """Try refining the stopping point on the maximiser sets of growing
    windows; returns (v, sm, ensemble) or None."""
    starts, tried = [], []
    for window in (1e-9, 1e-7, 1e-5, 1e-3):
        cands = sm.near_max(window)
        if not 2 <= len(cands) <= MAX_SIGNALS or len(cands) in tried:
            continue
        tried.append(len(cands))
        pts = np.array([c.output for c in cands])
        starts.append(([c.direction for c in cands], mixture_weights(pts, v)[0]))
    if len(sm.candidates) == 1 and sm.grid_values is not None:
        # a ring of maximisers: start from three well-spread grid ties
        ties = sm.grid_outputs[sm.grid_values >= sm.grid_values.max() - 1e-6]
        if len(ties) >= 3:
            pts = _spread(ties, 3)
            starts.append(([invert_channel(p, w, tol=1e-6) for w in pts], balanced_weights(pts)))
    for inputs, w in starts:
        pol = polish_solution(p, v, inputs, w)
        if pol is None or np.linalg.norm(pol.v - v) > 1e-3:
            continue
        try:
            sm_new = search(pol.v)
        except BlochDomainError:
            continue
        # nothing on the surface may sit above the polished members
        if sm_new.dmax > pol.distances.max() + 1e-9:
            continue
        keep = pol.probs > 1e-12
        try:
            ens = recover_ensemble(p, pol.v, pol.outputs[keep])
        except NotInHull:
            continue
        return pol.v, sm_new, ens
    return None


def _finish(
    p, v, sm: SurfaceMax, cfg: IterConfig, iters, history, n_balanced, plane, search, strict: bool = True
) -> CapacityResult:
    ens = None
    polished = strict and cfg.polish and _polished(p, v, sm, search)
    if polished:
        v, sm, ens = polished
    else:
        for window in (1e-7, 1e-6, 1e-5, 1e-4, 1e-3, math.inf):
            pts = [c.output for c in sm.near_max(window)]
            try:
                ens = recover_ensemble(p, v, pts, tol=ENSEMBLE_HULL_TOL)
                break
            except NotInHull:
                continue
    if ens is None and sm.grid_values is not None:
        # a continuum of maximisers (a sphere or circle of outputs): the
        # refined candidates cluster, but the tied grid points surround v
        ties = sm.grid_outputs[sm.grid_values >= sm.dmax - GRID_TIE_TOL]
        try:
            ens = recover_ensemble(p, v, ties, tol=ENSEMBLE_HULL_TOL)
        except NotInHull:
            pass
    if ens is None and not strict:
        # best effort for an unconverged run: the balanced mixture of the
        # current competitors, whose own average differs from v
        pts = _competitors(sm)
        w = balanced_weights(pts)
        keep = np.flatnonzero(w > 1e-9)[:MAX_SIGNALS]
        ens = SignalEnsemble.from_members(
            w[keep] / w[keep].sum(), [invert_channel(p, pts[k], tol=1e-6) for k in keep], pts[keep]
        )
    if ens is None:
        raise SolverError("could not express the average output as a mixture of maximisers")
    res = CapacityResult(
        capacity_bits=sm.dmax,
        average_output=v,
        ensemble=ens,
        method=Method.ITERATIVE,
        iterations=iters,
        diagnostics={
            "seed": cfg.seed,
            "plane": plane,
            "dmax_history": history,
            "balanced_steps": n_balanced,
            "polished": bool(polished),
            "config": cfg.__dict__.copy(),
        },
    )
    res.max_equal_distance_residual = res.equal_distance_residual()
    return res
