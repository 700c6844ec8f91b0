"""Seeded scenario sampling and witness searches.

Everything here is a pure function of (config, trial index): unitaries and
pure states are Haar-sampled, mixed states follow the Hilbert-Schmidt measure,
projector families group a Haar-random orthonormal basis into blocks, and
coarse grainings are drawn uniformly over set partitions. Searches report
what they find; an empty region is reported empty, never claimed impossible.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .hilbert import (
    ProjectorFamily,
    Schedule,
    State,
    Unitary,
    ValidationError,
    family_from_basis,
    haar_unitary,
    make_state_pure,
    max_abs,
    random_mixed_state,
    random_pure_state,
)
from .histories import coarse_grain, fine_grained_set, negation
from .conditions import DEFAULT_TOLERANCE, VENN_REGIONS, classify, decoherence_functional
from .diosi import Scenario

__all__ = [
    "SampleConfig",
    "RegionTally",
    "RegionCatalog",
    "SuperprobResult",
    "sample_scenario",
    "venn_search",
    "superprob_search",
    "matched_pair_scenario",
    "random_matched_pair",
    "proportional_quasi_pair",
    "PROPORTIONAL_TOTAL_RANGE",
]

STATE_KINDS = ("pure_random", "mixed_random", "supplied")
COARSE_GRAININGS = ("none", "random_partition", "matched_pairing")


@dataclass(frozen=True)
class SampleConfig:
    """One sampling phase: dimensions, slot structure, state kind, strategy.

    `family_sizes` holds one block-size list per slot (a flat list is applied
    to every slot); None means fully fine-grained rank-1 projectors.
    """

    dim: int
    slots: int
    trials: int
    seed: int
    family_sizes: tuple | None = None
    state_kind: str = "pure_random"
    coarse_graining: str = "none"
    supplied_state: State | None = None
    tolerance: float = DEFAULT_TOLERANCE
    name: str = "sample"

    def __post_init__(self):
        if self.dim < 1 or self.slots < 1 or self.trials < 1:
            raise ValidationError([("dim, slots and trials must be positive", 0.0)])
        if self.state_kind not in STATE_KINDS:
            raise ValidationError([(f"unknown state kind {self.state_kind!r}", 0.0)])
        if self.coarse_graining not in COARSE_GRAININGS:
            raise ValidationError([(f"unknown coarse graining {self.coarse_graining!r}", 0.0)])
        if self.state_kind == "supplied" and self.supplied_state is None:
            raise ValidationError([("state_kind 'supplied' needs supplied_state", 0.0)])
        object.__setattr__(self, "family_sizes", self._resolved_sizes())
        if self.coarse_graining == "matched_pairing":
            if self.slots != 2 or any(len(s) != 2 for s in self.family_sizes):
                raise ValidationError([
                    ("matched pairing needs 2 slots with binary families", 0.0),
                ])
        if self.coarse_graining == "random_partition" and self.chain_count < 2:
            raise ValidationError([("random partitions need at least 2 chains", 0.0)])

    def _resolved_sizes(self) -> tuple:
        if self.family_sizes is None:
            return tuple((1,) * self.dim for _ in range(self.slots))
        sizes = tuple(self.family_sizes)
        if sizes and isinstance(sizes[0], int):
            sizes = tuple(sizes for _ in range(self.slots))
        if len(sizes) != self.slots:
            raise ValidationError([("one block-size list per slot required", 0.0)])
        for per_slot in sizes:
            if any(s < 1 for s in per_slot) or sum(per_slot) != self.dim:
                raise ValidationError([
                    (f"block sizes {per_slot} must be positive and sum to dim", 0.0),
                ])
        return tuple(tuple(int(s) for s in per_slot) for per_slot in sizes)

    @property
    def chain_count(self) -> int:
        return int(np.prod([len(s) for s in self.family_sizes]))


def _bell_numbers(n: int) -> list:
    bell = [1] * (n + 1)
    for m in range(1, n + 1):
        bell[m] = sum(math.comb(m - 1, k) * bell[k] for k in range(m))
    return bell


def _uniform_partition(n: int, rng: np.random.Generator, bell: list) -> list:
    """Uniformly random set partition of range(n)."""
    remaining = list(range(n))
    blocks = []
    while remaining:
        m = len(remaining)
        first = remaining[0]
        threshold = rng.random() * bell[m]
        cumulative = 0.0
        size = m
        for j in range(1, m + 1):
            cumulative += math.comb(m - 1, j - 1) * bell[m - j]
            if threshold < cumulative:
                size = j
                break
        others = remaining[1:]
        chosen = sorted(rng.choice(len(others), size=size - 1, replace=False).tolist()) if size > 1 else []
        block = [first] + [others[i] for i in chosen]
        blocks.append(sorted(block))
        block_set = set(block)
        remaining = [x for x in remaining if x not in block_set]
    return blocks


def _random_grouping(n: int, rng: np.random.Generator) -> list:
    """Uniform over set partitions having at least one non-singleton block."""
    bell = _bell_numbers(n)
    while True:
        blocks = _uniform_partition(n, rng, bell)
        if any(len(b) > 1 for b in blocks):
            return blocks


def _consecutive_blocks(sizes) -> list:
    blocks, start = [], 0
    for s in sizes:
        blocks.append(list(range(start, start + s)))
        start += s
    return blocks


def sample_scenario(cfg: SampleConfig, trial_index: int) -> Scenario:
    """Draw one scenario; deterministic in (cfg.seed, trial_index).

    The draw order (families per slot, evolutions per slot, state, grouping)
    is part of the pinned-fixture contract and must not change.
    """
    rng = np.random.default_rng([cfg.seed, int(trial_index)])
    families = tuple(
        family_from_basis(haar_unitary(cfg.dim, rng).matrix, _consecutive_blocks(sizes))
        for sizes in cfg.family_sizes
    )
    evolutions = tuple(haar_unitary(cfg.dim, rng) for _ in range(cfg.slots))
    schedule = Schedule(times=tuple(float(k) for k in range(cfg.slots)),
                        evolutions=evolutions, families=families)
    if cfg.state_kind == "pure_random":
        state = random_pure_state(cfg.dim, rng)
    elif cfg.state_kind == "mixed_random":
        state = random_mixed_state(cfg.dim, rng)
    else:
        state = cfg.supplied_state

    histories = fine_grained_set(schedule, state)
    if cfg.coarse_graining == "random_partition":
        histories = coarse_grain(histories, _random_grouping(histories.size, rng))
    elif cfg.coarse_graining == "matched_pairing":
        histories = _matched_grouping(histories)
    return Scenario(
        name=f"{cfg.name}[{cfg.seed},{trial_index}]",
        schedule=schedule,
        histories=histories,
        state=state,
        metadata={"trial_index": int(trial_index), "seed": int(cfg.seed)},
    )


def _matched_grouping(histories):
    """Pair the chains whose two slot outcomes agree against those that differ."""
    agree = [i for i, m in enumerate(histories.members) if m.label.chains[0][0] == m.label.chains[0][1]]
    differ = [i for i in range(histories.size) if i not in agree]
    return coarse_grain(histories, [agree, differ], names=("agree", "differ"))


@dataclass
class RegionTally:
    count: int = 0
    first_trial: int | None = None
    witness: Scenario | None = None
    min_margin: float | None = None


@dataclass
class RegionCatalog:
    """Per-region counts, first witnesses and stability margins of a search."""

    regions: dict
    trials: int

    def counts(self) -> dict:
        return {region: tally.count for region, tally in self.regions.items()}


def _classification_margin(report) -> float:
    """Distance of the closest condition residual to the decision threshold."""
    return min(abs(report.residuals[name] - report.tolerance) for name in report.residuals)


def venn_search(config) -> RegionCatalog:
    """Classify every sampled scenario into its Venn region.

    `config` is one SampleConfig or a sequence of them (sampling phases merged
    into a single catalog; trial indices run consecutively across phases).
    Witnesses are the lowest-trial-index scenario per region.
    """
    phases = [config] if isinstance(config, SampleConfig) else list(config)
    if not phases:
        raise ValidationError([("at least one sampling phase required", 0.0)])
    regions = {region: RegionTally() for region in VENN_REGIONS}
    global_trial = 0
    for cfg in phases:
        for t in range(cfg.trials):
            scenario = sample_scenario(cfg, t)
            report = classify(decoherence_functional(scenario.histories, scenario.state),
                              cfg.tolerance)
            tally = regions[report.venn_region]
            tally.count += 1
            margin = _classification_margin(report)
            if tally.first_trial is None:
                tally.first_trial = global_trial
                tally.witness = scenario
            tally.min_margin = margin if tally.min_margin is None else min(tally.min_margin, margin)
            global_trial += 1
    return RegionCatalog(regions=regions, trials=global_trial)


@dataclass(frozen=True)
class SuperprobResult:
    """Outcome of a search for an inhomogeneous history with probability > 1.

    Not finding one is a first-class result, not an error. `nonunit_sum_trials`
    counts how many inspected scenarios had probabilities not summing to one.
    """

    found: bool
    trials_run: int
    nonunit_sum_trials: int
    scenario: Scenario | None = None
    member_index: int | None = None
    probability: float | None = None


def superprob_search(cfg: SampleConfig) -> SuperprobResult:
    """Scan sampled coarse-grained scenarios for a history with p > 1."""
    if cfg.coarse_graining == "none":
        raise ValidationError([
            ("homogeneous fine-grained probabilities never exceed 1; "
             "a coarse-graining strategy is required", 0.0),
        ])
    nonunit = 0
    for t in range(cfg.trials):
        scenario = sample_scenario(cfg, t)
        functional = decoherence_functional(scenario.histories, scenario.state)
        probabilities = functional.probabilities
        if abs(probabilities.sum() - 1.0) > cfg.tolerance:
            nonunit += 1
        worst = int(np.argmax(probabilities))
        if probabilities[worst] > 1.0 + cfg.tolerance:
            return SuperprobResult(
                found=True,
                trials_run=t + 1,
                nonunit_sum_trials=nonunit,
                scenario=scenario,
                member_index=worst,
                probability=float(probabilities[worst]),
            )
    return SuperprobResult(found=False, trials_run=cfg.trials, nonunit_sum_trials=nonunit)


def _projector_residuals(p) -> list:
    p = np.asarray(p, dtype=complex)
    out = []
    herm = max_abs(p - p.conj().T)
    if herm > 1e-10:
        out.append(("projector not Hermitian", herm))
    idem = max_abs(p @ p - p)
    if idem > 1e-10:
        out.append(("projector not idempotent", idem))
    return out


def matched_pair_scenario(projector, evolution: Unitary, state: State,
                          name: str = "matched-pair") -> Scenario:
    """Two-slot pair {agree, differ} built from one projector and one evolution.

    Slot 1 measures {P, 1-P} unevolved; slot 2 measures the same alternatives
    conjugated by `evolution`. The "agree" history sums the two chains whose
    outcomes repeat, "differ" the two that flip. By construction the cross
    term of the pair's negation identity vanishes identically, which is
    recorded as `pair_identity_residual` in the metadata.
    """
    violations = _projector_residuals(projector)
    if violations:
        raise ValidationError(violations)
    p = np.asarray(projector, dtype=complex)
    dim = p.shape[0]
    complement = np.eye(dim) - p
    family = ProjectorFamily(members=(p.copy(), complement), labels=("0", "1"))
    schedule = Schedule(
        times=(0.0, 1.0),
        evolutions=(Unitary.identity(dim), evolution),
        families=(family, family),
    )
    histories = _matched_grouping(fine_grained_set(schedule, state))
    agree = histories.members[0]
    differ = negation(agree, histories)
    cross = differ.matrix.conj().T @ agree.matrix + agree.matrix.conj().T @ differ.matrix
    return Scenario(
        name=name,
        schedule=schedule,
        histories=histories,
        state=state,
        metadata={"pair_identity_residual": max_abs(cross)},
    )


def random_matched_pair(dim: int, seed: int, pure: bool = True,
                        rank: int | None = None) -> Scenario:
    """Seeded random matched pair: Haar projector basis, Haar evolution, random state."""
    rng = np.random.default_rng([int(seed)])
    if rank is None:
        rank = int(rng.integers(1, dim)) if dim > 1 else 1
    basis = haar_unitary(dim, rng).matrix
    columns = basis[:, :rank]
    projector = columns @ columns.conj().T
    evolution = haar_unitary(dim, rng)
    state = random_pure_state(dim, rng) if pure else random_mixed_state(dim, rng)
    return matched_pair_scenario(projector, evolution, state, name=f"matched-pair[{seed}]")


# Feasible totals for the proportional-quasi construction below.
PROPORTIONAL_TOTAL_RANGE = (0.5, (3.0 + math.sqrt(5.0)) / 4.0)


def proportional_quasi_pair(total: float, name: str | None = None) -> Scenario:
    """A two-member pair whose quasi-probabilities equal p / sum(p) exactly.

    Real qubit construction: with slot-1 alternatives {|0><0|, |1><1|}, slot-2
    alternatives projecting onto w = (c, s) and its orthocomplement, state
    psi = (a, b), and the pair {P2 P1, 1 - P2 P1}, requiring q * sum(p) = p
    reduces to ac(ac + bs) = 1/2. On that branch both members have q = 1/2 and
    p = total/2, with sum(p) = `total` freely tunable inside
    PROPORTIONAL_TOTAL_RANGE. Pairing totals sigma and 1/sigma yields a
    composite whose probabilities and quasi-probabilities agree exactly while
    neither factor's do.
    """
    low, high = PROPORTIONAL_TOTAL_RANGE
    if not low <= total < high:
        raise ValidationError([
            (f"total must lie in [{low}, {high:.6f}) for the construction", 0.0),
        ])
    u = math.sqrt(total / 2.0)
    t = 1.0 / (2.0 * u)
    v = t - u
    s_quad = 1.0 + u * u - v * v
    disc = s_quad * s_quad - 4.0 * u * u
    if disc < 0.0:
        raise ValidationError([("construction infeasible for this total", -disc)])
    a_sq = (s_quad + math.sqrt(disc)) / 2.0
    c_sq = (s_quad - math.sqrt(disc)) / 2.0
    a, c = math.sqrt(a_sq), math.sqrt(c_sq)
    b = math.copysign(math.sqrt(max(0.0, 1.0 - a_sq)), v) if v != 0.0 else 0.0
    s = math.sqrt(max(0.0, 1.0 - c_sq))

    state = make_state_pure(np.array([a, b], dtype=complex))
    w = np.array([c, s], dtype=complex)
    w_perp = np.array([-s, c], dtype=complex)
    slot1 = ProjectorFamily(
        members=(np.diag([1.0 + 0j, 0.0]), np.diag([0.0, 1.0 + 0j])),
        labels=("0", "1"),
    )
    slot2 = ProjectorFamily(
        members=(np.outer(w, w.conj()), np.outer(w_perp, w_perp.conj())),
        labels=("0", "1"),
    )
    schedule = Schedule(
        times=(0.0, 1.0),
        evolutions=(Unitary.identity(2), Unitary.identity(2)),
        families=(slot1, slot2),
    )
    fine = fine_grained_set(schedule, state)
    histories = coarse_grain(fine, [[0], [1, 2, 3]], names=("lead", "rest"))
    return Scenario(
        name=name or f"proportional-quasi[{total:.6f}]",
        schedule=schedule,
        histories=histories,
        state=state,
        metadata={"quasi_scale": float(total)},
    )
