"""Decoherence functional, probabilities, quasi-probabilities, classification.

The four probability-assignment conditions are all evaluated as restrictions
on the functional matrix alone:

    decoherence          every off-diagonal entry vanishes
    partial decoherence  every off-diagonal row sum vanishes
    consistency          every off-diagonal real part vanishes
    linear positivity    every full row sum has non-negative real part
"""

from __future__ import annotations

from dataclasses import dataclass
from types import MappingProxyType

import numpy as np

from .hilbert import State, ValidationError, max_abs
from .histories import HistorySet

__all__ = [
    "DEFAULT_TOLERANCE",
    "CONDITION_NAMES",
    "VENN_REGIONS",
    "DecoherenceFunctional",
    "ConditionReport",
    "decoherence_functional",
    "quasi_probabilities",
    "interference_with_negation",
    "condition_residuals",
    "classify",
]

# Looser than the construction tolerance: products of several conjugated
# projectors accumulate arithmetic error before they reach the classifier.
DEFAULT_TOLERANCE = 1e-8

CONDITION_NAMES = ("decoherence", "partial_decoherence", "consistency", "linear_positivity")

VENN_REGIONS = ("D", "PD∩C∖D", "PD∖C", "C∖PD", "LP∖(PD∪C)", "none")


@dataclass(frozen=True, eq=False)
class DecoherenceFunctional:
    """The interference matrix D(a, b) = Tr(C_a rho C_b†) with p and q vectors.

    `probabilities` is read off the diagonal (never recomputed elsewhere), and
    `quasi` is Tr(C_a rho). The defining identities are recorded as residuals,
    not asserted, so the object can also describe deliberately denormalized
    sets such as phase-perturbed ones.
    """

    matrix: np.ndarray
    probabilities: np.ndarray
    quasi: np.ndarray
    residuals: MappingProxyType

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    def require_valid(self, atol: float = 1e-8):
        """Raise if any defining identity is violated beyond `atol`."""
        bad = [(name, r) for name, r in self.residuals.items() if r > atol]
        if bad:
            raise ValidationError(bad)
        return self


def _resolve_state(h: HistorySet, state: State | None) -> State:
    s = state if state is not None else h.state
    if s is None:
        raise ValidationError([("no state bound to the history set or supplied", 0.0)])
    if s.dim != h.dim:
        raise ValidationError([("state dimension does not match histories", 0.0)])
    return s


def decoherence_functional(h: HistorySet, state: State | None = None) -> DecoherenceFunctional:
    """Evaluate the full N x N functional for a history set and a state."""
    s = _resolve_state(h, state)
    stack = h.matrices()
    propagated = stack @ s.rho
    matrix = np.einsum("aij,bij->ab", propagated, stack.conj())
    quasi = np.einsum("aii->a", propagated)
    probabilities = np.diagonal(matrix).real.copy()
    off_rowsum = matrix.sum(axis=1) - np.diagonal(matrix)
    residuals = {
        "hermiticity": max_abs(matrix - matrix.conj().T),
        "total_sum": float(abs(matrix.sum() - 1.0)),
        "diagonal_imag": max_abs(np.diagonal(matrix).imag),
        "negative_probability": float(max(0.0, -probabilities.min())),
        "decomposition": max_abs(quasi - probabilities - off_rowsum),
        "quasi_sum": float(abs(quasi.sum() - 1.0)),
    }
    matrix.setflags(write=False)
    probabilities.setflags(write=False)
    quasi.setflags(write=False)
    return DecoherenceFunctional(
        matrix=matrix,
        probabilities=probabilities,
        quasi=quasi,
        residuals=MappingProxyType(residuals),
    )


def quasi_probabilities(h: HistorySet, state: State | None = None) -> np.ndarray:
    """q(a) = Tr(C_a rho); complex in general, summing to one for exhaustive sets."""
    s = _resolve_state(h, state)
    return np.einsum("aij,ji->a", h.matrices(), s.rho)


def interference_with_negation(h: HistorySet, state: State | None, index: int) -> complex:
    """Tr(C_a rho (1 - C_a†)): the interference of one history with its complement."""
    s = _resolve_state(h, state)
    if not 0 <= index < h.size:
        raise ValidationError([(f"history index {index} out of range", 0.0)])
    c = h.members[index].matrix
    return complex(np.trace(c @ s.rho @ (np.eye(h.dim) - c.conj().T)))


def condition_residuals(matrix) -> dict:
    """Violation size of each condition, zero when satisfied exactly.

    For the three equality conditions this is a max-norm; for linear
    positivity it is how far the worst row sum dips below zero.
    """
    matrix = np.asarray(matrix)
    off = matrix - np.diag(np.diagonal(matrix))
    row_sums = matrix.sum(axis=1)
    return {
        "decoherence": max_abs(off),
        "partial_decoherence": max_abs(off.sum(axis=1)),
        "consistency": max_abs(off.real),
        "linear_positivity": float(max(0.0, -row_sums.real.min())),
    }


def _venn_region(decoherent, partially, consistent, linearly) -> str:
    if decoherent:
        return "D"
    if partially and consistent:
        return "PD∩C∖D"
    if partially:
        return "PD∖C"
    if consistent:
        return "C∖PD"
    if linearly:
        return "LP∖(PD∪C)"
    return "none"


@dataclass(frozen=True)
class ConditionReport:
    """Classification of one functional against the four conditions."""

    decoherent: bool
    partially_decoherent: bool
    consistent: bool
    linearly_positive: bool
    residuals: MappingProxyType
    counts: MappingProxyType
    venn_region: str
    tolerance: float

    @property
    def flags(self) -> dict:
        return {
            "decoherence": self.decoherent,
            "partial_decoherence": self.partially_decoherent,
            "consistency": self.consistent,
            "linear_positivity": self.linearly_positive,
        }

    def holds(self, condition: str) -> bool:
        return self.flags[condition]


def classify(functional, tolerance: float = DEFAULT_TOLERANCE) -> ConditionReport:
    """Flag each condition and name the Venn region of the flag combination.

    Accepts a DecoherenceFunctional or a bare matrix. The scalar-condition
    counts follow the inhomogeneous-history bookkeeping: N(N-1) for
    decoherence, N(N-1)/2 for consistency, 2N for partial decoherence and N
    for linear positivity.
    """
    matrix = functional.matrix if isinstance(functional, DecoherenceFunctional) else np.asarray(functional)
    n = matrix.shape[0]
    residuals = condition_residuals(matrix)
    decoherent = residuals["decoherence"] <= tolerance
    partially = residuals["partial_decoherence"] <= tolerance
    consistent = residuals["consistency"] <= tolerance
    linearly = residuals["linear_positivity"] <= tolerance
    counts = {
        "decoherence": n * (n - 1),
        "partial_decoherence": 2 * n,
        "consistency": n * (n - 1) // 2,
        "linear_positivity": n,
    }
    return ConditionReport(
        decoherent=decoherent,
        partially_decoherent=partially,
        consistent=consistent,
        linearly_positive=linearly,
        residuals=MappingProxyType(residuals),
        counts=MappingProxyType(counts),
        venn_region=_venn_region(decoherent, partially, consistent, linearly),
        tolerance=tolerance,
    )
