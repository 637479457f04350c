from __future__ import annotations

import dataclasses
import enum
from dataclasses import dataclass, field

import numpy as np

from ..bloch import relative_entropy, von_neumann_entropy


class Method(enum.Enum):
    UNITAL = "unital"
    LINEAR_CLOSED_FORM = "linear_closed_form"
    LINEAR_TRANSCENDENTAL = "linear_transcendental"
    ITERATIVE = "iterative"
    BRUTE_FORCE = "brute_force"


class SolverError(RuntimeError):
    """Base class for capacity solver failures."""


@dataclass
class SignalMember:
    prob: float
    input: np.ndarray
    output: np.ndarray


@dataclass
class SignalEnsemble:
    items: list[SignalMember]
    average_output: np.ndarray

    @classmethod
    def from_members(cls, probs, inputs, outputs) -> "SignalEnsemble":
        items = [
            SignalMember(float(p), np.asarray(i, dtype=float), np.asarray(o, dtype=float))
            for p, i, o in zip(probs, inputs, outputs)
        ]
        avg = sum(m.prob * m.output for m in items)
        return cls(items, np.asarray(avg, dtype=float))

    @property
    def probs(self) -> np.ndarray:
        return np.array([m.prob for m in self.items])

    @property
    def outputs(self) -> np.ndarray:
        return np.array([m.output for m in self.items])

    @property
    def inputs(self) -> np.ndarray:
        return np.array([m.input for m in self.items])

    def check(self, tol: float = 1e-10) -> None:
        probs = self.probs
        if np.any(probs < -tol) or abs(probs.sum() - 1.0) > tol:
            raise ValueError("ensemble probabilities are not a distribution")
        if np.max(np.abs(probs @ self.outputs - self.average_output)) > 1e-8:
            raise ValueError("average_output does not match the members")


def holevo_chi(ensemble: SignalEnsemble) -> float:
    """S(average output) - sum_i p_i S(output_i), in bits."""
    avg = np.linalg.norm(ensemble.average_output)
    chi = von_neumann_entropy(min(avg, 1.0))
    for m in ensemble.items:
        chi -= m.prob * von_neumann_entropy(min(float(np.linalg.norm(m.output)), 1.0))
    return float(chi)


def holevo_chi_divergence(ensemble: SignalEnsemble) -> float:
    """The same quantity written as sum_i p_i D(output_i || average)."""
    return float(
        sum(m.prob * relative_entropy(m.output, ensemble.average_output) for m in ensemble.items if m.prob > 0)
    )


@dataclass
class CapacityResult:
    capacity_bits: float
    average_output: np.ndarray
    ensemble: SignalEnsemble
    method: Method
    iterations: int = 0
    max_equal_distance_residual: float = 0.0
    diagnostics: dict = field(default_factory=dict)

    def equal_distance_residual(self) -> float:
        return max(
            abs(relative_entropy(m.output, self.average_output) - self.capacity_bits)
            for m in self.ensemble.items
        )

    def to_dict(self) -> dict:
        return {
            "capacity_bits": self.capacity_bits,
            "average_output": self.average_output.tolist(),
            "method": self.method.value,
            "iterations": self.iterations,
            "max_equal_distance_residual": self.max_equal_distance_residual,
            "ensemble": [
                {"prob": m.prob, "input": m.input.tolist(), "output": m.output.tolist()}
                for m in self.ensemble.items
            ],
            "diagnostics": _jsonable(self.diagnostics),
        }


def _jsonable(obj):
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return _jsonable(dataclasses.asdict(obj))
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    return obj
