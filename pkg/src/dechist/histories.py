"""History class operators and exhaustive history sets.

A homogeneous history is a time-ordered product of Heisenberg-picture
projectors, latest factor leftmost; an inhomogeneous history is a sum of such
chains. Sets carry the residuals of their two defining sum rules instead of
asserting them, because some transformations (phase perturbations) knowingly
break the first one.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .hilbert import Schedule, State, Unitary, ValidationError, heisenberg_projector, max_abs

__all__ = [
    "HistoryLabel",
    "ClassOperator",
    "HistorySet",
    "PhasePerturbation",
    "MemberPhasePerturbation",
    "PhaseAmbiguityError",
    "chain_class_operator",
    "heisenberg_families",
    "history_set",
    "fine_grained_set",
    "coarse_grain",
    "negation",
    "member_phases",
    "phase_perturb",
]


class PhaseAmbiguityError(ValueError):
    """A slot-indexed phase was requested for a history mixing that slot's outcomes."""


@dataclass(frozen=True)
class HistoryLabel:
    """Which chains a history comprises: one tuple per chain, one outcome per slot."""

    chains: tuple
    name: str

    def __post_init__(self):
        if len(self.chains) == 0:
            raise ValidationError([("history label needs at least one chain", 0.0)])
        if len(set(self.chains)) != len(self.chains):
            raise ValidationError([("duplicate chains in history label", 0.0)])

    @property
    def homogeneous(self) -> bool:
        return len(self.chains) == 1


@dataclass(frozen=True, eq=False)
class ClassOperator:
    matrix: np.ndarray
    label: HistoryLabel

    @property
    def homogeneous(self) -> bool:
        return self.label.homogeneous


@dataclass(frozen=True, eq=False)
class HistorySet:
    """An exhaustive, exclusive set of class operators over one schedule.

    `sum_residual` is the max-norm distance of the member sum from the
    identity; `isometry_residual` the same for the sum of C† C. Both are
    reported rather than enforced.
    """

    members: tuple
    schedule: Schedule
    state: State | None
    sum_residual: float
    isometry_residual: float

    @property
    def size(self) -> int:
        return len(self.members)

    @property
    def dim(self) -> int:
        return self.schedule.dim

    @property
    def homogeneous(self) -> bool:
        return all(m.homogeneous for m in self.members)

    def matrices(self) -> np.ndarray:
        """Member matrices stacked along a leading axis."""
        return np.stack([m.matrix for m in self.members])

    @property
    def names(self) -> tuple:
        return tuple(m.label.name for m in self.members)


def _chain_name(outcomes) -> str:
    return "(" + ",".join(str(a) for a in outcomes) + ")"


def heisenberg_families(schedule: Schedule):
    """Per-slot Heisenberg-picture projector lists for the whole schedule."""
    return tuple(
        tuple(heisenberg_projector(p, u) for p in fam.members)
        for u, fam in zip(schedule.evolutions, schedule.families)
    )


def _check_outcomes(schedule: Schedule, outcomes):
    if len(outcomes) != schedule.n_slots:
        raise ValidationError([("one outcome per slot required", 0.0)])
    for k, a in enumerate(outcomes):
        if not 0 <= a < schedule.families[k].size:
            raise ValidationError([(f"outcome {a} out of range at slot {k}", 0.0)])


def chain_class_operator(schedule: Schedule, outcomes, _heisenberg=None) -> ClassOperator:
    """Chain operator P_{a_n}(t_n) ... P_{a_1}(t_1) for one outcome string."""
    outcomes = tuple(int(a) for a in outcomes)
    _check_outcomes(schedule, outcomes)
    slots = _heisenberg if _heisenberg is not None else heisenberg_families(schedule)
    matrix = np.eye(schedule.dim, dtype=complex)
    for k, a in enumerate(outcomes):
        matrix = slots[k][a] @ matrix
    label = HistoryLabel(chains=(outcomes,), name=_chain_name(outcomes))
    return ClassOperator(matrix=matrix, label=label)


def history_set(members, schedule: Schedule, state: State | None = None) -> HistorySet:
    """Assemble a set, checking exclusivity and recording the sum-rule residuals."""
    members = tuple(members)
    if not members:
        raise ValidationError([("empty history set", 0.0)])
    seen = set()
    for m in members:
        for chain in m.label.chains:
            if chain in seen:
                raise ValidationError([(f"chain {chain} appears in two histories", 0.0)])
            seen.add(chain)
    eye = np.eye(schedule.dim)
    total = sum(m.matrix for m in members)
    isometry = sum(m.matrix.conj().T @ m.matrix for m in members)
    return HistorySet(
        members=members,
        schedule=schedule,
        state=state,
        sum_residual=max_abs(total - eye),
        isometry_residual=max_abs(isometry - eye),
    )


def fine_grained_set(schedule: Schedule, state: State | None = None) -> HistorySet:
    """All chains of the schedule, enumerated in lexicographic outcome order.

    Zero chains are kept (with probability zero downstream) so the member
    count is always the product of the family sizes.
    """
    slots = heisenberg_families(schedule)
    members = [
        chain_class_operator(schedule, outcomes, _heisenberg=slots)
        for outcomes in itertools.product(*(range(s) for s in schedule.shape))
    ]
    return history_set(members, schedule, state)


def coarse_grain(h: HistorySet, partition, names=None) -> HistorySet:
    """Merge members by summing matrices and pooling their chains.

    `partition` lists member indices per group; it must cover every member
    exactly once. Groups that are singletons stay homogeneous.
    """
    groups = [tuple(g) for g in partition]
    flat = [i for g in groups for i in g]
    if sorted(flat) != list(range(h.size)):
        raise ValidationError([("partition must cover all members exactly once", 0.0)])
    if names is None:
        names = ["+".join(h.members[i].label.name for i in g) for g in groups]
    members = []
    for g, name in zip(groups, names):
        matrix = sum(h.members[i].matrix for i in g)
        chains = tuple(c for i in g for c in h.members[i].label.chains)
        members.append(ClassOperator(matrix=matrix, label=HistoryLabel(chains=chains, name=name)))
    return history_set(members, h.schedule, h.state)


def negation(member: ClassOperator, h: HistorySet) -> ClassOperator:
    """The complement history 1 - C, labeled by all chains outside C."""
    try:
        index = next(i for i, m in enumerate(h.members) if m.label.chains == member.label.chains)
    except StopIteration:
        raise ValidationError([("history is not a member of the set", 0.0)]) from None
    matrix = np.eye(h.dim, dtype=complex) - h.members[index].matrix
    chains = tuple(c for i, m in enumerate(h.members) if i != index for c in m.label.chains)
    if not chains:
        # Sole member: its negation is the zero operator with an empty chain
        # set, which we tag with the member's own chains negated by name only.
        label = HistoryLabel(chains=member.label.chains, name=f"not {member.label.name}")
        return ClassOperator(matrix=matrix, label=label)
    return ClassOperator(matrix=matrix, label=HistoryLabel(chains=chains, name=f"not {member.label.name}"))


@dataclass(frozen=True)
class PhasePerturbation:
    """A per-outcome phase kick at one slot, optionally followed by U†.

    Applied to a chain with outcome a at the slot, the chain operator becomes
    e^{-i phases[a]} U† C.
    """

    slot: int
    phases: tuple
    unitary: Unitary | None = None


@dataclass(frozen=True)
class MemberPhasePerturbation:
    """A phase kick indexed by history-set member instead of slot outcome.

    This extends the slot-indexed form to inhomogeneous histories whose chains
    do not share a slot outcome; member m picks up e^{-i phases[m]} U†.
    """

    phases: tuple
    unitary: Unitary | None = None


def member_phases(h: HistorySet, pert) -> np.ndarray:
    """The phase each member acquires; the induced rotation on interference terms.

    For the slot-indexed form a member must have a single outcome at the
    perturbed slot, otherwise no per-history phase exists.
    """
    if isinstance(pert, MemberPhasePerturbation):
        if len(pert.phases) != h.size:
            raise ValidationError([("one phase per history member required", 0.0)])
        return np.asarray(pert.phases, dtype=float)
    k = pert.slot
    if not 0 <= k < h.schedule.n_slots:
        raise ValidationError([(f"slot {k} out of range", 0.0)])
    if len(pert.phases) != h.schedule.families[k].size:
        raise ValidationError([("one phase per outcome at the slot required", 0.0)])
    out = np.empty(h.size)
    for i, m in enumerate(h.members):
        outcomes = {chain[k] for chain in m.label.chains}
        if len(outcomes) != 1:
            raise PhaseAmbiguityError(
                f"phase-ambiguous inhomogeneous history {m.label.name!r}: "
                f"mixes outcomes {sorted(outcomes)} at slot {k}"
            )
        out[i] = pert.phases[outcomes.pop()]
    return out


def phase_perturb(h: HistorySet, pert) -> HistorySet:
    """Apply a phase perturbation to every member of a set.

    The returned set generally no longer sums to the identity; the residual on
    the result records by how much.
    """
    phases = member_phases(h, pert)
    u_dag = None
    if pert.unitary is not None:
        if pert.unitary.dim != h.dim:
            raise ValidationError([("perturbation unitary dimension mismatch", 0.0)])
        u_dag = pert.unitary.matrix.conj().T
    members = []
    for m, lam in zip(h.members, phases):
        matrix = np.exp(-1j * lam) * m.matrix
        if u_dag is not None:
            matrix = u_dag @ matrix
        members.append(ClassOperator(matrix=matrix, label=m.label))
    return history_set(members, h.schedule, h.state)
