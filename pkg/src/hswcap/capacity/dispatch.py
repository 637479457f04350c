"""Pick a solver from the shape of the channel, and parameter sweeps over
the named channels."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor

import numpy as np

from ..channels import ChannelKind, ChannelParams, NamedChannelSpec, named_channel
from ..oracle import brute_force_capacity
from .closed_form import (
    EndpointPure,
    NoBracket,
    linear_capacity_axis_aligned,
    linear_capacity_general,
    unital_capacity,
)
from .iterative import IterConfig, iterative_capacity
from .result import CapacityResult, Method, SignalEnsemble

METHODS = ("auto", "unital", "linear", "iterative", "brute")


def point_capacity(p: ChannelParams) -> CapacityResult:
    """Every input maps to t: a single output state carries no information."""
    e = np.array([0.0, 0.0, 1.0])
    ens = SignalEnsemble.from_members([1.0], [e], [p.t.copy()])
    return CapacityResult(0.0, p.t.copy(), ens, Method.UNITAL if p.is_unital else Method.ITERATIVE)


def _linear(p: ChannelParams) -> CapacityResult:
    axis_aligned = p.lam[2] != 0.0 and not np.any(p.lam[:2]) and not np.any(p.t[:2])
    if axis_aligned:
        return linear_capacity_axis_aligned(p)
    return linear_capacity_general(p)


def solve_capacity(
    p: ChannelParams, method: str = "auto", cfg: IterConfig | None = None, seed: int = 0
) -> CapacityResult:
    """Capacity by the requested method; ``auto`` picks the cheapest exact one.

    auto: point channel -> 0; t = 0 -> unital closed form; one nonzero
    lambda -> linear solver (iterative if an endpoint is pure or the
    bracket fails); otherwise the iterative min-max solver.
    """
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; choose from {', '.join(METHODS)}")
    cfg = cfg or IterConfig(seed=seed)
    if method == "unital":
        return unital_capacity(p)
    if method == "linear":
        return _linear(p)
    if method == "iterative":
        return iterative_capacity(p, cfg)
    if method == "brute":
        return brute_force_capacity(p, n_states=4, restarts=20, seed=seed)

    if not p.active_axes:
        return point_capacity(p)
    if p.is_unital:
        return unital_capacity(p)
    if len(p.active_axes) == 1:
        try:
            return _linear(p)
        except (EndpointPure, NoBracket):
            pass
    return iterative_capacity(p, cfg)


def _sweep_point(args) -> float:
    kind, x = args
    return solve_capacity(named_channel(NamedChannelSpec(kind, x))).capacity_bits


def capacity_sweep(kind: ChannelKind | str, xs, threads: int = 1) -> list[tuple[float, float]]:
    """(x, C1) for the named channel family over the grid ``xs``."""
    kind = ChannelKind(kind)
    xs = [float(x) for x in xs]
    jobs = [(kind, x) for x in xs]
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            caps = list(pool.map(_sweep_point, jobs))
    else:
        caps = [_sweep_point(j) for j in jobs]
    return list(zip(xs, caps))
