"""Composite systems and the Diósi-family tests.

`compose` builds the tensor product of two independent scenarios, whose
functional factorizes entrywise; the forward test asks whether a condition
satisfied by both factors survives composition, the reverse test whether a
condition satisfied by the composite descends to the factors, and the
robustness test whether conditions survive a single-slot phase perturbation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .hilbert import (
    ProjectorFamily,
    Schedule,
    State,
    Unitary,
    ValidationError,
    max_abs,
    tensor,
)
from .histories import (
    ClassOperator,
    HistoryLabel,
    HistorySet,
    history_set,
    member_phases,
    phase_perturb,
)
from .conditions import (
    DEFAULT_TOLERANCE,
    CONDITION_NAMES,
    DecoherenceFunctional,
    classify,
    condition_residuals,
    decoherence_functional,
)

__all__ = [
    "Scenario",
    "TestVerdict",
    "InternalFaultError",
    "compose",
    "forward_diosi_check",
    "reverse_diosi_check",
    "robustness_check",
]


class InternalFaultError(RuntimeError):
    """An algebraic identity failed numerically; indicates a bug, not bad input."""


@dataclass(frozen=True, eq=False)
class Scenario:
    """A history set bound to its schedule and initial state, ready to analyze."""

    name: str
    schedule: Schedule
    histories: HistorySet
    state: State
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.state.dim != self.schedule.dim:
            raise ValidationError([("state dimension does not match schedule", 0.0)])
        if self.histories.schedule is not self.schedule and self.histories.dim != self.schedule.dim:
            raise ValidationError([("history dimension does not match schedule", 0.0)])

    @property
    def dim(self) -> int:
        return self.schedule.dim

    def functional(self) -> DecoherenceFunctional:
        return decoherence_functional(self.histories, self.state)

    def classification(self, tolerance: float = DEFAULT_TOLERANCE):
        return classify(self.functional(), tolerance)


@dataclass(frozen=True)
class TestVerdict:
    """Outcome of one test for one condition, with a witness when it fails."""

    test: str
    condition: str
    passed: bool
    residual: float
    witness: dict | None = None
    details: dict = field(default_factory=dict)


def _trivial_slot(dim: int) -> tuple:
    family = ProjectorFamily(members=(np.eye(dim, dtype=complex),), labels=("1",))
    return Unitary.identity(dim), family


def _padded(schedule: Schedule, n_slots: int):
    """Extend a schedule to `n_slots` with trivial single-outcome slots."""
    extra = n_slots - schedule.n_slots
    if extra == 0:
        return schedule.evolutions, schedule.families
    unit, family = _trivial_slot(schedule.dim)
    return (
        schedule.evolutions + (unit,) * extra,
        schedule.families + (family,) * extra,
    )


def _pad_chain(chain, n_slots: int):
    return tuple(chain) + (0,) * (n_slots - len(chain))


def compose(a: Scenario, b: Scenario, atol: float = 1e-10) -> Scenario:
    """Tensor two independent scenarios into one composite scenario.

    Member (i, j) of the composite carries C_i ⊗ C_j; the functional of the
    result must equal the Kronecker product of the factors' functionals, which
    is verified before returning.
    """
    n_slots = max(a.schedule.n_slots, b.schedule.n_slots)
    evo_a, fam_a = _padded(a.schedule, n_slots)
    evo_b, fam_b = _padded(b.schedule, n_slots)
    times = a.schedule.times if a.schedule.n_slots == n_slots else b.schedule.times

    families = []
    for fa, fb in zip(fam_a, fam_b):
        members = tuple(tensor(p, q) for p in fa.members for q in fb.members)
        labels = tuple(f"{la}⊗{lb}" for la in fa.labels for lb in fb.labels)
        families.append(ProjectorFamily(members=members, labels=labels))
    evolutions = tuple(Unitary(tensor(ua.matrix, ub.matrix)) for ua, ub in zip(evo_a, evo_b))
    schedule = Schedule(times=tuple(times), evolutions=evolutions, families=tuple(families))

    sizes_b = tuple(f.size for f in fam_b)
    members = []
    for ma in a.histories.members:
        for mb in b.histories.members:
            chains = tuple(
                tuple(
                    ca_k * sizes_b[k] + cb_k
                    for k, (ca_k, cb_k) in enumerate(
                        zip(_pad_chain(ca, n_slots), _pad_chain(cb, n_slots))
                    )
                )
                for ca in ma.label.chains
                for cb in mb.label.chains
            )
            label = HistoryLabel(chains=chains, name=f"{ma.label.name}⊗{mb.label.name}")
            members.append(ClassOperator(matrix=tensor(ma.matrix, mb.matrix), label=label))

    if a.state.is_pure and b.state.is_pure:
        vector = np.kron(a.state.vector, b.state.vector)
        state = State(rho=np.outer(vector, vector.conj()), vector=vector)
    else:
        state = State(rho=tensor(a.state.rho, b.state.rho))

    histories = history_set(members, schedule, state)
    composite = Scenario(
        name=f"{a.name}⊗{b.name}",
        schedule=schedule,
        histories=histories,
        state=state,
    )

    d_a = decoherence_functional(a.histories, a.state).matrix
    d_b = decoherence_functional(b.histories, b.state).matrix
    d_ab = composite.functional().matrix
    residual = max_abs(d_ab - np.kron(d_a, d_b))
    if residual > atol:
        raise InternalFaultError(
            f"composite functional does not factorize (residual {residual:.3e})"
        )
    composite.metadata["factorization_residual"] = residual
    return composite


def _require_condition(condition: str):
    if condition not in CONDITION_NAMES:
        raise ValidationError([(f"unknown condition {condition!r}", 0.0)])


def _offdiag_witness(matrix, condition: str, size_b: int | None = None) -> dict:
    """Locate the worst offending scalar for a failed condition."""
    n = matrix.shape[0]
    off = matrix - np.diag(np.diagonal(matrix))
    if condition == "decoherence":
        flat = int(np.argmax(np.abs(off)))
    elif condition == "consistency":
        flat = int(np.argmax(np.abs(off.real)))
    else:
        flat = None
    if flat is not None:
        i, j = divmod(flat, n)
        witness = {"row": i, "column": j, "value": complex(matrix[i, j])}
        if size_b:
            witness["row_pair"] = tuple(divmod(i, size_b))
            witness["column_pair"] = tuple(divmod(j, size_b))
        return witness
    if condition == "partial_decoherence":
        sums = off.sum(axis=1)
        i = int(np.argmax(np.abs(sums)))
        witness = {"row": i, "off_diagonal_row_sum": complex(sums[i])}
    else:
        sums = matrix.sum(axis=1)
        i = int(np.argmin(sums.real))
        witness = {"row": i, "row_sum": complex(sums[i])}
    if size_b:
        witness["row_pair"] = tuple(divmod(i, size_b))
    return witness


def forward_diosi_check(condition: str, a: Scenario, b: Scenario,
                        tolerance: float = DEFAULT_TOLERANCE) -> TestVerdict:
    """Does a condition holding on both factors hold on their composite?"""
    _require_condition(condition)
    report_a = a.classification(tolerance)
    report_b = b.classification(tolerance)
    for name, report in ((a.name, report_a), (b.name, report_b)):
        if not report.holds(condition):
            raise ValidationError([
                (f"precondition not met: {condition} fails for {name}",
                 report.residuals[condition]),
            ])
    composite = compose(a, b)
    report = composite.classification(tolerance)
    passed = report.holds(condition)
    witness = None
    if not passed:
        witness = _offdiag_witness(composite.functional().matrix, condition,
                                   size_b=b.histories.size)
    return TestVerdict(
        test="forward_diosi",
        condition=condition,
        passed=passed,
        residual=report.residuals[condition],
        witness=witness,
        details={
            "factor_residuals": (report_a.residuals[condition], report_b.residuals[condition]),
            "composite_region": report.venn_region,
        },
    )


def reverse_diosi_check(condition: str, a: Scenario, b: Scenario,
                        tolerance: float = DEFAULT_TOLERANCE,
                        require_near_identical: bool = False) -> TestVerdict:
    """Does a condition holding on the composite hold on each factor?

    For partial decoherence the verdict also records whether both factors are
    homogeneous and the residual of the normalized-quasi identity
    q(a) * sum(p) = p(a) on each factor, which the composite condition forces.
    """
    _require_condition(condition)
    composite = compose(a, b)
    report_ab = composite.classification(tolerance)
    if not report_ab.holds(condition):
        raise ValidationError([
            (f"precondition not met: {condition} fails for the composite",
             report_ab.residuals[condition]),
        ])

    functionals = {"a": a.functional(), "b": b.functional()}
    reports = {key: classify(df, tolerance) for key, df in functionals.items()}
    details: dict = {"composite_residual": report_ab.residuals[condition]}

    if require_near_identical:
        sums = {key: float(df.probabilities.sum()) for key, df in functionals.items()}
        gap = abs(sums["a"] - sums["b"])
        if gap > tolerance:
            raise ValidationError([
                ("near-identical variant inapplicable: probability sums differ", gap),
            ])
        details["forced_normalization_residual"] = max(
            abs(sums["a"] - 1.0), abs(sums["b"] - 1.0)
        )

    if condition == "partial_decoherence":
        details["homogeneous_subsystems"] = (
            a.histories.homogeneous and b.histories.homogeneous
        )
        details["normalized_quasi_residual"] = max(
            max_abs(df.quasi * df.probabilities.sum() - df.probabilities)
            for df in functionals.values()
        )
        details["probability_sums"] = tuple(
            float(df.probabilities.sum()) for df in functionals.values()
        )

    failing = {key: r for key, r in reports.items() if not r.holds(condition)}
    passed = not failing
    witness = None
    if not passed:
        key = sorted(failing)[0]
        witness = {"subsystem": key}
        witness.update(_offdiag_witness(functionals[key].matrix, condition))
    return TestVerdict(
        test="reverse_diosi",
        condition=condition,
        passed=passed,
        residual=max(r.residuals[condition] for r in reports.values()),
        witness=witness,
        details=details,
    )


def robustness_check(scenario: Scenario, perturbation,
                     tolerance: float = DEFAULT_TOLERANCE) -> list:
    """Which conditions survive a phase perturbation of the history set?

    Returns one verdict per condition that held before the perturbation. The
    induced entrywise transformation law — entry (m, m') rotates by
    e^{-i(phase_m - phase_m')} — is validated on the way and its residual
    attached to every verdict.
    """
    before = scenario.functional()
    report_before = classify(before, tolerance)
    phases = member_phases(scenario.histories, perturbation)

    perturbed = phase_perturb(scenario.histories, perturbation)
    after = decoherence_functional(perturbed, scenario.state)

    rotation = np.exp(-1j * (phases[:, None] - phases[None, :]))
    law_residual = max_abs(after.matrix - rotation * before.matrix)
    if law_residual > 1e-8:
        raise InternalFaultError(
            f"phase transformation law violated (residual {law_residual:.3e})"
        )

    residuals_after = condition_residuals(after.matrix)
    report_after = classify(after, tolerance)
    verdicts = []
    for condition in CONDITION_NAMES:
        if not report_before.holds(condition):
            continue
        passed = report_after.holds(condition)
        witness = None if passed else _offdiag_witness(after.matrix, condition)
        verdicts.append(TestVerdict(
            test="robustness",
            condition=condition,
            passed=passed,
            residual=residuals_after[condition],
            witness=witness,
            details={
                "law_residual": law_residual,
                "phases": tuple(float(x) for x in phases),
                "sum_rule_residual_after": perturbed.sum_residual,
            },
        ))
    return verdicts
