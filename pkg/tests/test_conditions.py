import json
import pathlib

import numpy as np
import numpy.testing as npt
import pytest
from hypothesis import given, strategies as st

import oracle
from dechist.hilbert import make_state_pure, max_abs, random_mixed_state, random_pure_state
from dechist.histories import coarse_grain, fine_grained_set
from dechist.conditions import (
    classify,
    condition_residuals,
    decoherence_functional,
    interference_with_negation,
    quasi_probabilities,
)
from dechist.explorer import SampleConfig, random_matched_pair, sample_scenario

from conftest import qubit_schedule

FIXTURES = pathlib.Path(__file__).parent / "fixtures"


def oracle_functional(scenario):
    us = [u.matrix for u in scenario.schedule.evolutions]
    mats = [list(f.members) for f in scenario.schedule.families]
    operators = [
        oracle.summed_matrix(us, mats, m.label.chains) for m in scenario.histories.members
    ]
    return operators, oracle.decoherence_matrix(operators, scenario.state.rho)


class TestFunctional:
    def test_single_slot_is_diagonal_born_rule(self):
        rng = np.random.default_rng(12)
        schedule = qubit_schedule([np.eye(2)])
        state = random_mixed_state(2, rng)
        df = decoherence_functional(fine_grained_set(schedule, state))
        expected = np.diag([np.trace(p @ state.rho) for p in schedule.families[0].members])
        npt.assert_allclose(df.matrix, expected, atol=1e-14)

    def test_hadamard_table_matches_frozen_values(self, hadamard_schedule):
        # Pinned via the direct-trace oracle: the |0> state kills the two
        # chains that start in |1>, leaving a diagonal (1/2, 1/2, 0, 0) table.
        state = make_state_pure([1.0, 0.0])
        df = decoherence_functional(fine_grained_set(hadamard_schedule, state))
        frozen = np.diag([0.5, 0.5, 0.0, 0.0]).astype(complex)
        npt.assert_allclose(df.matrix, frozen, atol=1e-14)
        assert abs(df.matrix.sum() - 1.0) <= 1e-12
        assert max_abs(df.matrix - df.matrix.conj().T) <= 1e-12

    def test_matched_pair_real_part_vanishes(self):
        for seed in range(12):
            df = random_matched_pair(2, seed=seed).functional()
            assert abs(df.matrix[0, 1].real) <= 1e-12

    @given(st.integers(0, 10**6))
    def test_defining_residuals_small_for_samples(self, seed):
        cfg = SampleConfig(dim=3, slots=2, trials=1, seed=seed)
        df = sample_scenario(cfg, 0).functional()
        assert df.residuals["hermiticity"] <= 1e-10
        assert df.residuals["total_sum"] <= 1e-10
        assert df.residuals["decomposition"] <= 1e-10
        assert df.residuals["quasi_sum"] <= 1e-10
        assert df.residuals["negative_probability"] <= 1e-10

    def test_oracle_agreement_on_coarse_grained_sample(self):
        cfg = SampleConfig(dim=2, slots=2, trials=1, seed=99, coarse_graining="random_partition")
        scenario = sample_scenario(cfg, 0)
        _, expected = oracle_functional(scenario)
        df = scenario.functional()
        npt.assert_allclose(df.matrix, expected, atol=1e-12)
        npt.assert_allclose(df.probabilities, np.diagonal(expected).real, atol=1e-12)


class TestQuasiProbabilities:
    def test_identity_history_has_unit_quasi(self, hadamard_schedule):
        state = random_pure_state(2, np.random.default_rng(0))
        h = coarse_grain(fine_grained_set(hadamard_schedule, state), [[0, 1, 2, 3]])
        q = quasi_probabilities(h)
        assert q.shape == (1,)
        assert abs(q[0] - 1.0) <= 1e-12

    def test_single_slot_quasi_is_real_probability(self):
        state = random_mixed_state(2, np.random.default_rng(4))
        h = fine_grained_set(qubit_schedule([np.eye(2)]), state)
        df = decoherence_functional(h)
        q = quasi_probabilities(h)
        npt.assert_allclose(q.imag, 0.0, atol=1e-13)
        npt.assert_allclose(q.real, df.probabilities, atol=1e-13)

    def test_matched_pair_imaginary_part_equals_interference(self):
        scenario = random_matched_pair(2, seed=11)
        df = scenario.functional()
        # Both sides of the decomposition evaluated independently.
        operators, dmat = oracle_functional(scenario)
        q_oracle = oracle.quasi_probabilities(operators, scenario.state.rho)
        assert abs(q_oracle[0].imag - dmat[0, 1].imag) <= 1e-12
        assert abs(q_oracle[0].imag) > 1e-6
        npt.assert_allclose(df.quasi, q_oracle, atol=1e-12)


class TestInterferenceWithNegation:
    def test_identity_history_has_none(self, hadamard_schedule):
        state = random_pure_state(2, np.random.default_rng(1))
        h = coarse_grain(fine_grained_set(hadamard_schedule, state), [[0, 1, 2, 3]])
        assert abs(interference_with_negation(h, state, 0)) <= 1e-13

    def test_decoherent_member_has_none(self):
        state = random_mixed_state(2, np.random.default_rng(2))
        h = fine_grained_set(qubit_schedule([np.eye(2)]), state)
        for index in range(h.size):
            assert abs(interference_with_negation(h, state, index)) <= 1e-12

    def test_matched_pair_value_is_purely_imaginary(self):
        scenario = random_matched_pair(2, seed=21)
        value = interference_with_negation(scenario.histories, scenario.state, 0)
        operators, _ = oracle_functional(scenario)
        expected = oracle.interference_with_negation(operators[0], scenario.state.rho)
        assert abs(value - expected) <= 1e-12
        assert abs(value.real) <= 1e-12

    def test_equals_quasi_minus_probability(self):
        scenario = random_matched_pair(2, seed=22)
        df = scenario.functional()
        value = interference_with_negation(scenario.histories, scenario.state, 1)
        assert abs(value - (df.quasi[1] - df.probabilities[1])) <= 1e-12

    def test_index_out_of_range(self):
        state = random_mixed_state(2, np.random.default_rng(6))
        h = fine_grained_set(qubit_schedule([np.eye(2)]), state)
        with pytest.raises(Exception, match="out of range"):
            interference_with_negation(h, state, 5)


class TestClassifier:
    def test_diagonal_matrix_hits_region_d(self):
        report = classify(np.diag([0.25, 0.75]).astype(complex), 1e-8)
        assert report.decoherent and report.partially_decoherent
        assert report.consistent and report.linearly_positive
        assert report.venn_region == "D"

    def test_matched_pair_hits_consistent_only_region(self):
        report = classify(random_matched_pair(2, seed=11).functional(), 1e-8)
        assert report.consistent and report.linearly_positive
        assert not report.decoherent and not report.partially_decoherent
        assert report.venn_region == "C∖PD"

    def test_purely_imaginary_circulant_is_pd_and_c(self):
        y = 0.05
        e = np.array([[0, 1j * y, -1j * y], [-1j * y, 0, 1j * y], [1j * y, -1j * y, 0]])
        matrix = np.diag([1 / 3.0] * 3) + e
        report = classify(matrix, 1e-8)
        assert report.partially_decoherent and report.consistent and not report.decoherent
        assert report.venn_region == "PD∩C∖D"

    def test_real_zero_rowsum_matrix_is_pd_not_c(self):
        a, b, c = 1.0, 1.0j, -1.0
        e = np.zeros((4, 4), dtype=complex)
        e[0, 1], e[0, 2], e[0, 3] = a, b, -a - b
        e[1, 2], e[1, 3] = c, -np.conj(a) - c
        e[2, 3] = -np.conj(b) - np.conj(c)
        e = e + e.conj().T
        assert max_abs(e.sum(axis=1)) <= 1e-14
        matrix = np.diag([0.25] * 4) + 0.05 * e
        report = classify(matrix, 1e-8)
        assert report.partially_decoherent and not report.consistent
        assert report.venn_region == "PD∖C"

    def test_lp_only_region(self):
        matrix = np.array([[0.5, 0.2], [0.2, 0.5]], dtype=complex)
        report = classify(matrix, 1e-8)
        assert report.venn_region == "LP∖(PD∪C)"

    def test_none_region(self):
        matrix = np.array([[0.1, -0.5], [-0.5, 0.9]], dtype=complex)
        report = classify(matrix, 1e-8)
        assert not report.linearly_positive
        assert report.venn_region == "none"

    def test_condition_counts(self):
        report = classify(np.eye(4, dtype=complex) / 4.0, 1e-8)
        assert dict(report.counts) == {
            "decoherence": 12,
            "partial_decoherence": 8,
            "consistency": 6,
            "linear_positivity": 4,
        }

    @given(st.integers(0, 10**6))
    def test_exact_decoherence_implies_all_flags(self, seed):
        rng = np.random.default_rng(seed)
        p = rng.random(4)
        p /= p.sum()
        report = classify(np.diag(p).astype(complex), 1e-10)
        assert report.decoherent and report.partially_decoherent
        assert report.consistent and report.linearly_positive

    def test_flags_match_oracle_over_samples(self):
        cfg = SampleConfig(dim=2, slots=2, trials=40, seed=314,
                           coarse_graining="random_partition")
        for trial in range(cfg.trials):
            df = sample_scenario(cfg, trial).functional()
            report = classify(df, 1e-8)
            assert report.flags == oracle.classify_matrix(df.matrix, 1e-8)

    def test_region_tally_matches_pinned_regression(self):
        pinned = json.loads((FIXTURES / "classify_regression.json").read_text())
        cfg = SampleConfig(dim=2, slots=2, trials=pinned["trials"], seed=pinned["seed"],
                           coarse_graining="random_partition")
        tally = {}
        for trial in range(cfg.trials):
            region = classify(sample_scenario(cfg, trial).functional(), 1e-8).venn_region
            tally[region] = tally.get(region, 0) + 1
        assert tally == pinned["regions"]


class TestSingleTimeTheorem:
    def test_every_single_slot_scenario_decoheres(self):
        for dim, seed in [(2, 0), (3, 1), (4, 2)]:
            cfg = SampleConfig(dim=dim, slots=1, trials=25, seed=seed)
            for trial in range(cfg.trials):
                df = sample_scenario(cfg, trial).functional()
                assert condition_residuals(df.matrix)["decoherence"] <= 1e-12


class TestDecoherentConsequences:
    def test_quasi_equals_probability_when_decoherent(self, hadamard_schedule):
        state = make_state_pure([1.0, 0.0])
        df = decoherence_functional(fine_grained_set(hadamard_schedule, state))
        report = classify(df, 1e-10)
        assert report.decoherent
        assert max_abs(df.quasi - df.probabilities) <= 1e-12
        assert abs(df.probabilities.sum() - 1.0) <= 1e-12
