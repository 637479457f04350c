"""Plot data: level sets of D(. || v) in a coordinate plane, and relative
entropy along the boundary of a channel's output ellipse."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from skimage.measure import find_contours

from .bloch import LN2, BlochDomainError
from .channels import ChannelParams


class Plane(enum.Enum):
    XY = "xy"
    XZ = "xz"
    YZ = "yz"

    @property
    def axes(self) -> tuple[int, int]:
        return {"xy": (0, 1), "xz": (0, 2), "yz": (1, 2)}[self.value]

    def embed(self, c1, c2) -> np.ndarray:
        c1, c2 = np.broadcast_arrays(np.asarray(c1, dtype=float), np.asarray(c2, dtype=float))
        out = np.zeros(c1.shape + (3,))
        i, j = self.axes
        out[..., i] = c1
        out[..., j] = c2
        return out


@dataclass(frozen=True)
class ContourRequest:
    v: tuple[float, float, float]
    levels: tuple[float, ...]
    plane: Plane = Plane.XY
    resolution: int = 512

    def __post_init__(self):
        if len(self.levels) == 0 or any(lv <= 0 for lv in self.levels):
            raise ValueError("contour levels must be positive")
        if np.linalg.norm(self.v) >= 1.0:
            raise BlochDomainError("v must be an interior state")
        if self.resolution < 8:
            raise ValueError("resolution must be at least 8")


@dataclass
class Polyline:
    level: float
    points: np.ndarray  # (n, 2) in-plane coordinates


@dataclass
class ContourResult:
    polylines: list[Polyline]
    # levels for which nothing inside the disk reaches the level
    empty_levels: list[float] = field(default_factory=list)


def _extended_d(w: np.ndarray, v: np.ndarray) -> np.ndarray:
    """D(w || v) on a grid, continued past the unit sphere by reading
    (1 - r) ln(1 - r) as (1 - r) ln|1 - r|. The continuation keeps
    increasing in r, so contours through pure states are still crossings."""
    q = float(np.linalg.norm(v))
    r = np.linalg.norm(w, axis=-1)
    onem = 1.0 - r
    a = np.abs(onem)
    with np.errstate(divide="ignore", invalid="ignore"):
        neg_s = 0.5 * ((1.0 + r) * np.log1p(r) + np.where(a > 0, onem * np.log(np.where(a > 0, a, 1.0)), 0.0))
    d = neg_s - 0.5 * math.log1p(-q * q)
    if q > 1e-12:
        d = d - (w @ v) * (math.atanh(q) / q)
    return d / LN2


def _split_inside(pts: np.ndarray, tol: float) -> list[np.ndarray]:
    """Cut a polyline into the runs that stay within the unit disk."""
    inside = np.hypot(pts[:, 0], pts[:, 1]) <= 1.0 + tol
    runs, start = [], None
    for i, ok in enumerate(inside):
        if ok and start is None:
            start = i
        elif not ok and start is not None:
            runs.append(pts[start:i])
            start = None
    if start is not None:
        runs.append(pts[start:])
    return [r for r in runs if len(r) >= 2]


def cmd_contour(req: ContourRequest) -> ContourResult:
    """Marching-squares level sets of D(. || v) on the plane through the origin."""
    n = req.resolution
    c = np.linspace(-1.0, 1.0, n)
    C1, C2 = np.meshgrid(c, c)  # rows follow c2, columns c1
    v = np.asarray(req.v, dtype=float)
    field_ = _extended_d(req.plane.embed(C1, C2), v)
    h = 2.0 / (n - 1)
    out = ContourResult([])
    for level in req.levels:
        found = False
        for raw in find_contours(field_, level):
            pts = np.column_stack([-1.0 + raw[:, 1] * h, -1.0 + raw[:, 0] * h])
            for run in _split_inside(pts, tol=h):
                out.polylines.append(Polyline(float(level), run))
                found = True
        if not found:
            out.empty_levels.append(float(level))
    return out


def contour_rows(res: ContourResult) -> list[tuple[float, int, float, float]]:
    rows = []
    for k, pl in enumerate(res.polylines):
        rows.extend((pl.level, k, float(a), float(b)) for a, b in pl.points)
    return rows


@dataclass(frozen=True)
class AngularScanRequest:
    channel: ChannelParams
    v: tuple[float, float, float]
    plane: Plane = Plane.XY
    samples: int = 720

    def __post_init__(self):
        if self.samples < 8:
            raise ValueError("samples must be at least 8")
        if np.linalg.norm(self.v) >= 1.0:
            raise BlochDomainError("v must be an interior state")


@dataclass
class ScanResult:
    phi: np.ndarray  # input angle along the great circle
    theta: np.ndarray  # polar angle of the output about the Bloch origin
    d: np.ndarray
    outputs: np.ndarray

    def local_maxima(self) -> np.ndarray:
        """Indices of cyclic local maxima of D along the boundary."""
        d = self.d
        prev, nxt = np.roll(d, 1), np.roll(d, -1)
        # ">" on one side avoids counting a flat top twice
        return np.flatnonzero((d > prev) & (d >= nxt))


def cmd_scan(req: AngularScanRequest) -> ScanResult:
    """D(output || v) around the image of the input great circle in ``plane``.

    theta is measured about the Bloch origin in the plane's coordinates, so
    it need not cover [0, 2 pi) when the origin lies outside the ellipse.
    """
    p = req.channel
    phi = 2 * math.pi * np.arange(req.samples) / req.samples
    dirs = req.plane.embed(np.cos(phi), np.sin(phi))
    outs = p.t + dirs * p.lam
    i, j = req.plane.axes
    theta = np.mod(np.arctan2(outs[:, j], outs[:, i]), 2 * math.pi)
    d = _extended_d(outs, np.asarray(req.v, dtype=float))
    return ScanResult(phi, theta, d, outs)
