"""KRSW affine qubit channels, the named example channels, Kraus
conversion and channel spec files."""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .bloch import IDENTITY, NORM_TOL, PAULI, as_bloch, density_to_bloch

KRAUS_TOL = 1e-10
DIAG_TOL = 1e-9


class ChannelError(ValueError):
    """Invalid channel parameters or channel spec."""


class NoPreimage(ChannelError):
    pass


class NotReachable(ChannelError):
    pass


class NotDiagonal(ChannelError):
    pass


@dataclass(frozen=True)
class ChannelParams:
    """Affine Bloch map w -> t + diag(lam) w."""

    t: np.ndarray
    lam: np.ndarray

    def __init__(self, t: Sequence[float], lam: Sequence[float]):
        object.__setattr__(self, "t", np.asarray(t, dtype=float).reshape(3).copy())
        object.__setattr__(self, "lam", np.asarray(lam, dtype=float).reshape(3).copy())
        self.t.flags.writeable = False
        self.lam.flags.writeable = False

    def __repr__(self) -> str:
        return f"ChannelParams(t={self.t.tolist()}, lam={self.lam.tolist()})"

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, ChannelParams)
            and np.array_equal(self.t, other.t)
            and np.array_equal(self.lam, other.lam)
        )

    def __hash__(self) -> int:
        return hash((tuple(self.t), tuple(self.lam)))

    @property
    def is_unital(self) -> bool:
        return bool(np.all(np.abs(self.t) <= NORM_TOL))

    @property
    def active_axes(self) -> list[int]:
        return [k for k in range(3) if self.lam[k] != 0.0]

    def validate(self, n_samples: int = 1000, seed: int = 0) -> None:
        """Check the necessary conditions for the ellipsoid to sit inside
        the Bloch ball. Raises ChannelError naming the violated condition."""
        if not (np.all(np.isfinite(self.t)) and np.all(np.isfinite(self.lam))):
            raise ChannelError("channel parameters must be finite")
        if np.any(np.abs(self.lam) > 1.0 + NORM_TOL):
            raise ChannelError("|lambda_k| <= 1 violated")
        if np.any(np.abs(self.t) + np.abs(self.lam) > 1.0 + NORM_TOL):
            raise ChannelError("|t_k| + |lambda_k| <= 1 violated")
        worst = max_image_norm(self, n_samples, seed)
        if worst > 1.0 + NORM_TOL:
            raise ChannelError(f"image of the Bloch sphere leaves the ball (max norm {worst:.6g})")


def fibonacci_sphere(n: int) -> np.ndarray:
    i = np.arange(n) + 0.5
    z = 1.0 - 2.0 * i / n
    phi = math.pi * (1.0 + math.sqrt(5.0)) * i
    s = np.sqrt(1.0 - z * z)
    return np.column_stack([s * np.cos(phi), s * np.sin(phi), z])


def max_image_norm(p: ChannelParams, n_samples: int = 1000, seed: int = 0) -> float:
    """Largest output norm over sampled unit inputs, plus the six axis poles."""
    rng = np.random.default_rng(seed)
    dirs = np.vstack([fibonacci_sphere(n_samples), np.eye(3), -np.eye(3)])
    # random rotation so repeated calls with different seeds probe different points
    q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
    dirs = np.vstack([dirs, dirs @ q.T])
    out = p.t + dirs * p.lam
    return float(np.max(np.linalg.norm(out, axis=1)))


def random_channel(rng: np.random.Generator, max_tries: int = 10_000) -> ChannelParams:
    """Rejection sample: lambda_k uniform in [-1, 1], t_k uniform in the
    range allowed by |t_k| + |lambda_k| <= 1, kept if the image-norm check passes."""
    for _ in range(max_tries):
        lam = rng.uniform(-1.0, 1.0, size=3)
        slack = 1.0 - np.abs(lam)
        t = rng.uniform(-slack, slack)
        p = ChannelParams(t, lam)
        try:
            p.validate()
        except ChannelError:
            continue
        return p
    raise ChannelError(f"no valid channel after {max_tries} draws")


def apply_channel(p: ChannelParams, w_in) -> np.ndarray:
    return p.t + p.lam * as_bloch(w_in)


def surface_point(p: ChannelParams, direction) -> np.ndarray:
    d = np.asarray(direction, dtype=float)
    if abs(np.linalg.norm(d) - 1.0) > 1e-9:
        raise ChannelError("direction must be a unit vector")
    return p.t + p.lam * d


def invert_channel(p: ChannelParams, w_out, tol: float = 1e-9) -> np.ndarray:
    """A preimage of ``w_out``.

    Axes with lambda_k = 0 are free; the residual 1 - |w|^2 is placed on the
    first such axis (positive sign) so the preimage is pure when possible.
    """
    w_out = np.asarray(w_out, dtype=float).reshape(3)
    w_in = np.zeros(3)
    free = []
    for k in range(3):
        if p.lam[k] == 0.0:
            if abs(w_out[k] - p.t[k]) > tol:
                raise NoPreimage(f"axis {k} has lambda=0 but output component differs from t")
            free.append(k)
        else:
            w_in[k] = (w_out[k] - p.t[k]) / p.lam[k]
    n2 = float(w_in @ w_in)
    if n2 > 1.0 + 1e-6:
        raise NotReachable(f"preimage norm {math.sqrt(n2):.6g} exceeds 1")
    if n2 > 1.0 - 1e-12:
        # already pure up to rounding: no residual for the free axes
        w_in /= math.sqrt(n2)
    elif free:
        w_in[free[0]] = math.sqrt(max(0.0, 1.0 - n2))
    return w_in


class ChannelKind(enum.Enum):
    DEPOLARIZING = "depolarizing"
    TWO_PAULI = "two_pauli"
    AMPLITUDE_DAMPING = "amplitude_damping"


@dataclass(frozen=True)
class NamedChannelSpec:
    kind: ChannelKind
    x: float

    def __post_init__(self):
        if not 0.0 <= self.x <= 1.0:
            raise ChannelError(f"channel parameter x={self.x} outside [0, 1]")


def named_channel(spec: NamedChannelSpec) -> ChannelParams:
    x = spec.x
    if spec.kind is ChannelKind.DEPOLARIZING:
        lam = (4.0 * x - 1.0) / 3.0
        return ChannelParams((0, 0, 0), (lam, lam, lam))
    if spec.kind is ChannelKind.TWO_PAULI:
        return ChannelParams((0, 0, 0), (x, x, 2.0 * x - 1.0))
    s = math.sqrt(x)
    return ChannelParams((0, 0, 1.0 - x), (s, s, x))


def named_kraus(spec: NamedChannelSpec) -> list[np.ndarray]:
    x = spec.x
    sx, sy, sz = PAULI
    if spec.kind is ChannelKind.TWO_PAULI:
        c = math.sqrt((1.0 - x) / 2.0)
        ops = [math.sqrt(x) * IDENTITY, c * sx, -1j * c * sy]
    elif spec.kind is ChannelKind.DEPOLARIZING:
        c = math.sqrt((1.0 - x) / 3.0)
        ops = [math.sqrt(x) * IDENTITY, c * sx, -1j * c * sy, c * sz]
    else:
        # decay towards |0> (Bloch +z) so that t_z = 1 - x
        ops = [
            np.array([[1, 0], [0, math.sqrt(x)]], dtype=complex),
            np.array([[0, math.sqrt(1.0 - x)], [0, 0]], dtype=complex),
        ]
    return [op for op in ops if np.any(op != 0)] or [IDENTITY.copy()]


def check_kraus(ops: Sequence[np.ndarray], tol: float = KRAUS_TOL) -> None:
    if not ops:
        raise ChannelError("empty Kraus set")
    total = np.zeros((2, 2), dtype=complex)
    for a in ops:
        a = np.asarray(a, dtype=complex)
        if a.shape != (2, 2):
            raise ChannelError("Kraus operators must be 2x2")
        total += a.conj().T @ a
    if np.max(np.abs(total - IDENTITY)) > tol:
        raise ChannelError("Kraus completeness sum A^dag A = I violated")


def apply_kraus(ops: Sequence[np.ndarray], rho: np.ndarray) -> np.ndarray:
    return sum(a @ rho @ a.conj().T for a in ops)


def kraus_affine(ops: Sequence[np.ndarray]) -> tuple[np.ndarray, np.ndarray]:
    """Full affine action (T, t) on Bloch space: w -> T w + t."""
    check_kraus(ops)
    ops = [np.asarray(a, dtype=complex) for a in ops]
    t = density_to_bloch(apply_kraus(ops, IDENTITY / 2))
    T = np.zeros((3, 3))
    for j, s in enumerate(PAULI):
        out = apply_kraus(ops, s / 2)  # traceless image of the basis element
        T[:, j] = [np.real(np.trace(out @ sk)) for sk in PAULI]
    return T, t


def kraus_to_krsw(ops: Sequence[np.ndarray]) -> ChannelParams:
    T, t = kraus_affine(ops)
    off = T - np.diag(np.diag(T))
    if np.max(np.abs(off)) > DIAG_TOL:
        raise NotDiagonal("linear part is not diagonal in this basis; rotate the Kraus set first")
    return ChannelParams(t, np.diag(T))


def permute_to_z(p: ChannelParams) -> tuple[ChannelParams, tuple[int, int, int]]:
    """Reorder axes so the single nonzero lambda sits on z.

    Returns the permuted channel and ``perm`` with ``new[i] = old[perm[i]]``.
    """
    active = p.active_axes
    if len(active) != 1:
        raise ChannelError("exactly one nonzero lambda required")
    k = active[0]
    perm = tuple([i for i in range(3) if i != k] + [k])
    return ChannelParams(p.t[list(perm)], p.lam[list(perm)]), perm


def unpermute(vec, perm: Sequence[int]) -> np.ndarray:
    out = np.empty(3)
    out[list(perm)] = np.asarray(vec, dtype=float)
    return out


# --- channel spec files -------------------------------------------------

def channel_from_dict(d: dict) -> ChannelParams:
    kind = d.get("type")
    try:
        if kind == "krsw":
            p = ChannelParams(d["t"], d["lambda"])
        elif kind == "named":
            p = named_channel(NamedChannelSpec(ChannelKind(d["name"]), float(d["x"])))
        elif kind == "kraus":
            ops = [np.array([[complex(*e) for e in row] for row in op], dtype=complex) for op in d["ops"]]
            p = kraus_to_krsw(ops)
        else:
            raise ChannelError(f"unknown channel type {kind!r}")
    except (KeyError, TypeError) as exc:
        raise ChannelError(f"malformed channel spec: {exc}") from exc
    except ValueError as exc:
        if isinstance(exc, ChannelError):
            raise
        raise ChannelError(f"malformed channel spec: {exc}") from exc
    p.validate()
    return p


def channel_to_dict(p: ChannelParams) -> dict:
    return {"type": "krsw", "t": p.t.tolist(), "lambda": p.lam.tolist()}


def load_channel(path: str | Path) -> ChannelParams:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ChannelError(f"channel spec is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ChannelError("channel spec must be a JSON object")
    return channel_from_dict(data)
