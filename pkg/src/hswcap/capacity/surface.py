"""Maximisation of D(E(u) || v) over pure inputs u, i.e. over the surface
of the output ellipsoid.

The surface is parameterised by the input direction, so segment and
planar channels (degenerate ellipsoids) need no special handling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..bloch import LN2, BlochDomainError, relative_entropy_many
from ..channels import ChannelParams

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
ARGMAX_TOL = 1e-9
DEDUP_TOL = 1e-6


@dataclass
class SurfacePoint:
    value: float
    direction: np.ndarray
    output: np.ndarray


@dataclass
class SurfaceMax:
    dmax: float
    argmax: list[SurfacePoint]
    # every refined local maximum, best first
    candidates: list[SurfacePoint]
    # coarse grid outputs and values, kept for continuum argmax sets
    grid_outputs: np.ndarray | None = None
    grid_values: np.ndarray | None = None

    @property
    def argmax_outputs(self) -> list[np.ndarray]:
        return [c.output for c in self.argmax]

    def near_max(self, window: float) -> list[SurfacePoint]:
        return [c for c in self.candidates if c.value >= self.dmax - window]


def _dirs_sphere(theta, phi):
    st = np.sin(theta)
    return np.stack([st * np.cos(phi), st * np.sin(phi), np.cos(theta)], axis=-1)


def _dirs_xz(theta):
    return np.stack([np.sin(theta), np.zeros_like(theta), np.cos(theta)], axis=-1)


def _values(p: ChannelParams, v, dirs):
    out = p.t + dirs * p.lam
    return relative_entropy_many(out.reshape(-1, 3), v).reshape(dirs.shape[:-1])


def _evaluator(p: ChannelParams, v):
    """Fast D(E(u) || v) for arrays of unit directions u of shape (k, 3).

    Same formula as ``relative_entropy_many`` with the v-dependent parts
    hoisted out; this is the hot loop of the refinement.
    """
    q = float(np.linalg.norm(v))
    if q >= 1.0 - 1e-12:
        raise BlochDomainError("second argument must be an interior state")
    c0 = -0.5 * math.log1p(-q * q)
    cv = v * (math.atanh(q) / q) if q >= 1e-12 else np.zeros(3)
    t, lam = p.t, p.lam

    def f(u):
        out = t + u * lam
        r = np.sqrt(np.einsum("ij,ij->i", out, out))
        np.minimum(r, 1.0, out=r)
        onem = 1.0 - r
        onep = 1.0 + r
        lm = np.log(np.where(onem > 0, onem, 1.0))
        return (0.5 * (onep * np.log(onep) + onem * lm) + c0 - out @ cv) / LN2

    return f


def _grid_local_maxima(vals: np.ndarray, wrap_cols: bool) -> np.ndarray:
    """Boolean mask of grid points that are >= all their 8 neighbours."""
    padded = np.pad(vals, 1, mode="constant", constant_values=-np.inf)
    if wrap_cols:
        padded[1:-1, 0] = vals[:, -1]
        padded[1:-1, -1] = vals[:, 0]
    mask = np.ones_like(vals, dtype=bool)
    n, m = vals.shape
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            if di == 0 and dj == 0:
                continue
            mask &= vals >= padded[1 + di : 1 + di + n, 1 + dj : 1 + dj + m]
    if wrap_cols:
        # first and last rows are the poles: every point of the next row is a neighbour
        mask[0, :] = vals[0, 0] >= vals[1, :].max()
        mask[-1, :] = vals[-1, 0] >= vals[-2, :].max()
    return mask


def _golden_max(f, lo: np.ndarray, hi: np.ndarray, iters: int) -> np.ndarray:
    """Vectorised golden-section maximisation of f on [lo, hi] elementwise."""
    a, b = lo.copy(), hi.copy()
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(iters):
        left = fc >= fd
        b = np.where(left, d, b)
        a = np.where(left, a, c)
        new_c = b - INV_PHI * (b - a)
        new_d = a + INV_PHI * (b - a)
        c, d = np.where(left, new_c, d), np.where(left, c, new_d)
        fnew = f(np.where(left, c, d))
        fc, fd = np.where(left, fnew, fd), np.where(left, fc, fnew)
    return 0.5 * (a + b)


def _tangent_frame(u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Two orthonormal tangents at each unit vector in ``u`` (shape (k, 3))."""
    ref = np.where(np.abs(u[:, [2]]) < 0.9, np.array([0.0, 0.0, 1.0]), np.array([1.0, 0.0, 0.0]))
    e1 = np.cross(u, ref)
    e1 /= np.linalg.norm(e1, axis=1, keepdims=True)
    e2 = np.cross(u, e1)
    return e1, e2


def surface_search(
    p: ChannelParams,
    v,
    grid: int = 96,
    refine_iters: int = 40,
    plane: str | None = None,
    max_candidates: int = 24,
    passes: int = 6,
) -> SurfaceMax:
    """Coarse grid over input directions followed by golden-section
    refinement of every grid local maximum.

    ``plane='xz'`` restricts inputs to the XZ great circle, which is exact
    for channels symmetric under rotations about z.
    """
    v = np.asarray(v, dtype=float)
    if plane == "xz":
        n = 4 * grid
        theta = 2 * math.pi * np.arange(n) / n
        vals = _values(p, v, _dirs_xz(theta))
        grid_out = p.t + _dirs_xz(theta) * p.lam
        ext = np.concatenate([vals[-1:], vals, vals[:1]])
        idx = np.nonzero((vals >= ext[:-2]) & (vals >= ext[2:]))[0]
        idx = idx[np.argsort(-vals[idx], kind="stable")]
        h = 2 * math.pi / n
        picked = []
        for i in idx:
            if all(min(abs(i - j), n - abs(i - j)) > 2 for j in picked):
                picked.append(i)
            if len(picked) >= max_candidates:
                break
        th = theta[picked]
        f = lambda x: _values(p, v, _dirs_xz(x))
        th = _golden_max(f, th - h, th + h, refine_iters)
        dirs = _dirs_xz(th)
    else:
        theta = np.linspace(0.0, math.pi, grid)
        phi = 2 * math.pi * np.arange(grid) / grid
        T, P = np.meshgrid(theta, phi, indexing="ij")
        dirs_grid = _dirs_sphere(T, P)
        vals = _values(p, v, dirs_grid)
        grid_out = p.t + dirs_grid * p.lam
        mask = _grid_local_maxima(vals, wrap_cols=True)
        flat = np.flatnonzero(mask)
        flat = flat[np.argsort(-vals.ravel()[flat], kind="stable")]
        h = math.pi / (grid - 1)
        sep = math.cos(2.5 * h)
        picked: list[np.ndarray] = []
        for fi in flat:
            u = dirs_grid.reshape(-1, 3)[fi]
            if all(u @ w < sep for w in picked):
                picked.append(u)
            if len(picked) >= max_candidates:
                break
        dirs = np.array(picked)
        ev = _evaluator(p, v)
        # coordinate-wise golden section in a local tangent chart
        for _ in range(passes):
            e1, e2 = _tangent_frame(dirs)
            # enough iterations to shrink the bracket to ~1e-8 rad
            iters = min(refine_iters, max(8, math.ceil(math.log(2 * h / 1e-8) / -math.log(INV_PHI))))
            moved = 0.0
            for e in (e1, e2):
                base = dirs

                def f(x, base=base, e=e):
                    u = base + x[:, None] * e
                    u /= np.sqrt(np.einsum("ij,ij->i", u, u))[:, None]
                    return ev(u)

                k = len(base)
                x = _golden_max(f, np.full(k, -h), np.full(k, h), iters)
                moved = max(moved, float(np.max(np.abs(x))))
                dirs = base + x[:, None] * e
                dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
            if moved < 1e-8:
                break
            h *= 0.5

    outs = p.t + dirs * p.lam
    fvals = relative_entropy_many(outs, v)
    order = np.argsort(-fvals, kind="stable")
    cands: list[SurfacePoint] = []
    for i in order:
        if any(np.linalg.norm(outs[i] - c.output) <= DEDUP_TOL for c in cands):
            continue
        cands.append(SurfacePoint(float(fvals[i]), dirs[i].copy(), outs[i].copy()))
    dmax = cands[0].value
    argmax = [c for c in cands if c.value >= dmax - ARGMAX_TOL]
    return SurfaceMax(dmax, argmax, cands, grid_outputs=grid_out.reshape(-1, 3), grid_values=vals.ravel())


def max_relative_entropy_on_surface(p: ChannelParams, v, cfg=None) -> tuple[float, list[np.ndarray]]:
    """(dmax, maximisers) of D(output || v) over the channel output surface."""
    kw = {}
    if cfg is not None:
        kw = dict(grid=cfg.surface_grid, refine_iters=cfg.refine_iters, plane=cfg.plane_for(p))
    sm = surface_search(p, v, **kw)
    return sm.dmax, sm.argmax_outputs
