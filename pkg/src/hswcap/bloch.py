"""Bloch-vector representation of qubit states and the closed-form
relative entropy / von Neumann entropy kernel.

All entropies are in bits. Internally the formulas are evaluated with
natural logarithms and converted once at the end.
"""

from __future__ import annotations

import math
from typing import Iterable, Sequence

import numpy as np

EQ_TOL = 1e-10
NORM_TOL = 1e-12
_Q_ZERO = 1e-12
LN2 = math.log(2.0)

PAULI = (
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)
IDENTITY = np.eye(2, dtype=complex)


class BlochDomainError(ValueError):
    """Raised when a Bloch vector lies outside the ball, or a relative
    entropy is requested that diverges."""


def as_bloch(w: Iterable[float]) -> np.ndarray:
    """Coerce to a float 3-vector and check it lies in the Bloch ball."""
    arr = np.asarray(w, dtype=float).reshape(3)
    n = math.sqrt(float(arr @ arr))
    if n > 1.0 + NORM_TOL:
        raise BlochDomainError(f"Bloch vector norm {n:.15g} exceeds 1")
    return arr


def _xlnx(x: float) -> float:
    return x * math.log(x) if x > 0.0 else 0.0


def _neg_entropy_nats(r: float) -> float:
    # 1/2 ln(1-r^2) + r atanh(r), written so that r -> 1 stays finite and accurate
    return 0.5 * (_xlnx(1.0 + r) + _xlnx(1.0 - r))


def von_neumann_entropy(r: float) -> float:
    """Entropy in bits of a qubit whose Bloch vector has length ``r``."""
    if not (-NORM_TOL <= r <= 1.0 + NORM_TOL):
        raise BlochDomainError(f"radius {r!r} outside [0, 1]")
    r = min(max(r, 0.0), 1.0)
    a, b = 0.5 * (1.0 + r), 0.5 * (1.0 - r)
    return -(_xlnx(a) + _xlnx(b)) / LN2


def binary_entropy(p: float) -> float:
    return -(_xlnx(p) + _xlnx(1.0 - p)) / LN2


def relative_entropy(w: Sequence[float], v: Sequence[float]) -> float:
    """D(rho_w || rho_v) in bits from the two Bloch vectors.

    The value depends only on |w|, |v| and the angle between them. A pure
    second argument is only allowed when it coincides with the first, in
    which case the result is 0.
    """
    w = as_bloch(w)
    v = as_bloch(v)
    r = min(float(math.sqrt(w @ w)), 1.0)
    q = float(math.sqrt(v @ v))
    if q >= 1.0 - NORM_TOL:
        if float(np.linalg.norm(w - v)) <= NORM_TOL:
            return 0.0
        raise BlochDomainError("second argument is pure and differs from the first; D diverges")
    if w[0] == v[0] and w[1] == v[1] and w[2] == v[2]:
        return 0.0
    d = _neg_entropy_nats(r) - 0.5 * math.log1p(-q * q)
    if q >= _Q_ZERO:
        d -= float(w @ v) * math.atanh(q) / q
    # near w = v the terms cancel and rounding can land a hair below zero
    return max(d / LN2, 0.0)


def relative_entropy_many(ws: np.ndarray, v: Sequence[float]) -> np.ndarray:
    """Vectorised D(w_i || v) for an (n, 3) array of first arguments.

    No domain checks beyond requiring ``|v| < 1``; radii of ``ws`` are
    clipped to 1.
    """
    ws = np.asarray(ws, dtype=float)
    v = np.asarray(v, dtype=float)
    q = float(np.linalg.norm(v))
    if q >= 1.0 - NORM_TOL:
        raise BlochDomainError("second argument must be an interior state")
    r = np.minimum(np.linalg.norm(ws, axis=-1), 1.0)
    onep, onem = 1.0 + r, 1.0 - r
    with np.errstate(divide="ignore", invalid="ignore"):
        neg_s = 0.5 * (onep * np.log(onep) + np.where(onem > 0, onem * np.log(np.where(onem > 0, onem, 1.0)), 0.0))
    d = neg_s - 0.5 * math.log1p(-q * q)
    if q >= _Q_ZERO:
        d = d - (ws @ v) * (math.atanh(q) / q)
    return np.maximum(d / LN2, 0.0)


def rel_entropy_vs_max_mixed(w: Sequence[float]) -> float:
    """D(rho_w || I/2) = 1 - S(rho_w)."""
    w = as_bloch(w)
    return 1.0 - von_neumann_entropy(min(float(np.linalg.norm(w)), 1.0))


def geometry(w: Sequence[float], v: Sequence[float]) -> tuple[float, float, float]:
    """Return (r, q, cos_theta); cos_theta is 1.0 when either vector vanishes."""
    w, v = as_bloch(w), as_bloch(v)
    r, q = float(np.linalg.norm(w)), float(np.linalg.norm(v))
    if r == 0.0 or q == 0.0:
        return r, q, 1.0
    return r, q, float(np.clip(w @ v / (r * q), -1.0, 1.0))


def donald_decomposition(ensemble, phi) -> tuple[float, float]:
    """Both sides of Donald's equality for ``ensemble = [(prob, w), ...]``.

    lhs = sum_i p_i D(w_i || phi);  rhs = D(sigma || phi) + sum_i p_i D(w_i || sigma)
    with sigma the ensemble average.
    """
    probs = np.array([p for p, _ in ensemble], dtype=float)
    if np.any(probs < 0) or abs(probs.sum() - 1.0) > NORM_TOL * max(1, len(probs)):
        raise BlochDomainError("probabilities must be non-negative and sum to 1")
    states = [as_bloch(w) for _, w in ensemble]
    phi = as_bloch(phi)
    if np.linalg.norm(phi) >= 1.0:
        raise BlochDomainError("phi must be an interior state")
    sigma = sum(p * w for p, w in zip(probs, states))
    lhs = sum(p * relative_entropy(w, phi) for p, w in zip(probs, states))
    rhs = relative_entropy(sigma, phi) + sum(
        p * relative_entropy(w, sigma) for p, w in zip(probs, states) if p > 0
    )
    return float(lhs), float(rhs)


def bloch_to_density(w: Sequence[float]) -> np.ndarray:
    w = as_bloch(w)
    return 0.5 * (IDENTITY + w[0] * PAULI[0] + w[1] * PAULI[1] + w[2] * PAULI[2])


def density_to_bloch(m: np.ndarray, tol: float = EQ_TOL) -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    if m.shape != (2, 2):
        raise BlochDomainError(f"expected a 2x2 matrix, got shape {m.shape}")
    if np.max(np.abs(m - m.conj().T)) > tol:
        raise BlochDomainError("matrix is not Hermitian")
    if abs(np.trace(m) - 1.0) > tol:
        raise BlochDomainError("matrix trace differs from 1")
    return np.array([np.real(np.trace(m @ s)) for s in PAULI])
