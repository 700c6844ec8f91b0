"""Record projectors for decoherent history sets with pure initial states.

When the functional of a pure-state set is diagonal, the vectors C_a |psi>
are mutually orthogonal, so a rank-1 projector onto each non-null ray acts as
a record: a single later-time measurement perfectly correlated with the
history. The construction is minimal (one ray per history), and a remainder
projector completes the family to the identity.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .hilbert import State, ValidationError, max_abs
from .histories import HistorySet
from .conditions import DEFAULT_TOLERANCE, classify, decoherence_functional

__all__ = ["RecordSet", "construct_records"]


@dataclass(frozen=True, eq=False)
class RecordSet:
    """Orthogonal record projectors plus the remainder completing the identity.

    `mapping[i]` is the record index of history i, or None when the history
    has negligible probability and therefore no record.
    """

    projectors: tuple
    remainder: np.ndarray
    mapping: tuple
    record_equation_residual: float
    probability_residual: float

    @property
    def size(self) -> int:
        return len(self.projectors)


def construct_records(h: HistorySet, state: State | None = None,
                      tolerance: float = DEFAULT_TOLERANCE) -> RecordSet:
    """Build one record projector per history with probability above `tolerance`.

    Requires a pure state and a decoherent set. The rays are orthonormalized
    sequentially in history order to absorb sub-tolerance numerical overlap,
    and the record equation Tr(R_g C_a rho C_b†) = delta_ga delta_gb p(a) is
    evaluated and reported as a residual.
    """
    s = state if state is not None else h.state
    if s is None or not s.is_pure:
        raise ValidationError([("records require a pure initial state", 0.0)])
    functional = decoherence_functional(h, s)
    report = classify(functional, tolerance)
    if not report.decoherent:
        raise ValidationError([
            ("records require a decoherent set; largest off-diagonal |D|",
             report.residuals["decoherence"]),
        ])

    branch_vectors = h.matrices() @ s.vector
    accepted = []
    mapping: list = []
    for i in range(h.size):
        v = branch_vectors[i].copy()
        if float(np.vdot(v, v).real) <= tolerance:
            mapping.append(None)
            continue
        for u in accepted:
            v -= u * np.vdot(u, v)
        norm = float(np.linalg.norm(v))
        mapping.append(len(accepted))
        accepted.append(v / norm)

    dim = h.dim
    projectors = tuple(np.outer(u, u.conj()) for u in accepted)
    remainder = np.eye(dim, dtype=complex) - sum(projectors, np.zeros((dim, dim), dtype=complex))

    # Record-equation residual: overlaps <r_g|C_a psi> give every trace at once.
    probabilities = functional.probabilities
    worst = 0.0
    for i, rec in enumerate(mapping):
        if rec is None:
            continue
        overlaps = np.array([np.vdot(accepted[rec], branch_vectors[a]) for a in range(h.size)])
        table = np.conj(overlaps)[:, None] * overlaps[None, :]  # entry (b, a) = Tr(R C_a rho C_b†)
        expected = np.zeros_like(table)
        expected[i, i] = probabilities[i]
        worst = max(worst, max_abs(table - expected))

    probability_residual = 0.0
    for i, rec in enumerate(mapping):
        if rec is None:
            continue
        born = float(np.abs(np.vdot(accepted[rec], s.vector)) ** 2)
        probability_residual = max(probability_residual, abs(born - probabilities[i]))

    return RecordSet(
        projectors=projectors,
        remainder=remainder,
        mapping=tuple(mapping),
        record_equation_residual=worst,
        probability_residual=probability_residual,
    )
