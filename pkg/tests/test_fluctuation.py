import math

import numpy as np
import pytest

from conftest import (
    random_hamiltonian,
    random_lindblad,
    thermal_circulation_qutrit,
)
from qdblab import matlin
from qdblab.dynamics import (
    KrausChannel,
    evolve,
    lindblad_superop,
)
from qdblab.errors import InconclusiveHorizon
from qdblab.examples import (
    ExampleAParams,
    ExampleBParams,
    example_a_channel,
    example_b_generator,
    example_qdb_family,
    qubit_hamiltonian,
)
from qdblab.fluctuation import (
    Classification,
    check_pairwise_condition,
    classify,
    default_tau_max,
    exchange_distribution,
    fpt_stationarity_identity,
    qfr_ratio,
    transition_matrix,
)
from qdblab.states import HamiltonianSpec, gibbs, populations


class TestTransitionMatrix:
    def test_identity_map(self):
        h = qubit_hamiltonian(1.0)
        tm = transition_matrix(KrausChannel((np.eye(2),)), h)
        np.testing.assert_allclose(tm.probs, np.eye(2), atol=1e-14)

    def test_scenario_a_literal_probabilities(self):
        p = ExampleAParams.default(1.0, 1.0)
        h = qubit_hamiltonian(1.0)
        tau = 0.8
        q, xi = p.q_schedule(tau), p.xi_schedule(tau)
        tm = transition_matrix(example_a_channel(p, tau), h, tau)
        assert abs(tm.probs[0, 1] - xi * q) < 1e-13
        assert abs(tm.probs[1, 0] - xi * (1 - q)) < 1e-13

    def test_scenario_b_closed_form_probabilities(self):
        # independent oracle: the populations relax exponentially toward
        # the thermal values, so p(g->e) = (1 - e^{-gbar tau}) p_e(beta)
        p = ExampleBParams(omega=1.0, gamma=1.0, beta_f=1.0)
        h = p.hamiltonian()
        l = lindblad_superop(example_b_generator(p))
        for tau in (0.2, 1.0, 4.0):
            tm = transition_matrix(evolve(l, tau), h, tau)
            reach = 1.0 - math.exp(-p.gamma_bar * tau)
            p_th = populations(gibbs(h, p.beta_f), h)
            assert abs(tm.probs[0, 1] - reach * p_th[1]) < 1e-12
            assert abs(tm.probs[1, 0] - reach * p_th[0]) < 1e-12

    def test_rows_stochastic_for_random_semigroups(self, rng):
        for d in (2, 3):
            gen = random_lindblad(rng, d)
            l = lindblad_superop(gen)
            for tau in (0.1, 1.0, 10.0):
                tm = transition_matrix(evolve(l, tau), gen.hamiltonian, tau)
                np.testing.assert_allclose(tm.probs.sum(axis=1), np.ones(d), atol=1e-9)
                assert tm.probs.min() > -1e-12


class TestExchangeDistribution:
    def test_zero_time_single_zero_gap(self, rng):
        gen = random_lindblad(rng, 2)
        dist = exchange_distribution(
            evolve(lindblad_superop(gen), 0.0), gen.hamiltonian, 1.5, 1.0, 0.0
        )
        assert len(dist.gaps) == 1
        assert dist.gaps[0].energy == 0.0
        assert abs(dist.gaps[0].p_plus - 1.0) < 1e-14

    def test_qubit_bookkeeping(self):
        p = ExampleAParams.default(1.0, 1.0)
        h = qubit_hamiltonian(1.0)
        beta_i, tau = 2.0, 0.7
        dist = exchange_distribution(example_a_channel(p, tau), h, beta_i, 1.0, tau)
        tm = transition_matrix(example_a_channel(p, tau), h, tau)
        p_init = populations(gibbs(h, beta_i), h)
        gap = dist.gap(1.0)
        assert abs(gap.p_plus - p_init[0] * tm.probs[0, 1]) < 1e-14
        assert abs(gap.p_minus - p_init[1] * tm.probs[1, 0]) < 1e-14

    def test_scenario_b_ratio_matches_prediction(self):
        # oracle: pairwise-balanced dynamics gives exactly e^{dbeta omega}
        p = ExampleBParams(omega=1.0, gamma=1.0, beta_f=1.0)
        l = lindblad_superop(example_b_generator(p))
        dist = exchange_distribution(evolve(l, 1.0), p.hamiltonian(), 2.0, 1.0, 1.0)
        rec = [r for r in qfr_ratio(dist) if abs(r.energy - 1.0) < 1e-9][0]
        assert abs(rec.ratio - math.exp(1.0)) < 1e-12
        assert rec.deviation < 1e-12

    def test_degenerate_gaps_accumulate(self, rng):
        # equally spaced levels: the two omega-sized gaps share one record
        h = HamiltonianSpec.from_matrix(np.diag([0.0, 1.0, 2.0]))
        gen = random_lindblad(rng, 3)
        gen = type(gen).canonical(h, gen.kossakowski)
        dist = exchange_distribution(evolve(lindblad_superop(gen), 0.5), h, 1.0, 0.5, 0.5)
        energies = [g.energy for g in dist.gaps]
        assert energies == [0.0, 1.0, 2.0]
        tm = transition_matrix(evolve(lindblad_superop(gen), 0.5), h, 0.5)
        p_init = populations(gibbs(h, 1.0), h)
        expected = p_init[0] * tm.probs[0, 1] + p_init[1] * tm.probs[1, 2]
        assert abs(dist.gap(1.0).p_plus - expected) < 1e-13

    def test_normalization_invariant(self, rng):
        # enforced by the constructor; exercise it across random dynamics
        for d in (2, 3):
            gen = random_lindblad(rng, d)
            l = lindblad_superop(gen)
            for tau in (0.05, 0.5, 5.0):
                dist = exchange_distribution(evolve(l, tau), gen.hamiltonian, 1.2, 0.8, tau)
                total = sum(g.p_plus for g in dist.gaps)
                total += sum(g.p_minus for g in dist.gaps if g.energy > 0)
                assert abs(total - 1.0) < 1e-9


class TestQfrRatio:
    def test_equal_temperatures_give_unit_ratio(self):
        gen = example_qdb_family(0.5, 0.2, 1.0, 1.0)
        l = lindblad_superop(gen)
        dist = exchange_distribution(evolve(l, 0.7), gen.hamiltonian, 1.0, 1.0, 0.7)
        for rec in qfr_ratio(dist):
            assert abs(rec.ratio - 1.0) < 1e-12

    def test_vanishing_release_probability_flagged_undefined(self):
        # beta_i large enough freezes the excited level: no release events
        p = ExampleBParams(omega=1.0, gamma=1.0, beta_f=1.0)
        l = lindblad_superop(example_b_generator(p))
        dist = exchange_distribution(evolve(l, 0.5), p.hamiltonian(), 60.0, 1.0, 0.5)
        reported = {round(r.energy, 9) for r in qfr_ratio(dist)}
        present = {round(g.energy, 9) for g in dist.gaps}
        assert 1.0 in present and 1.0 not in reported

    def test_ratio_time_independent_for_balanced_dynamics(self):
        gen = example_qdb_family(0.9, 0.1, 1.0, 0.6)
        l = lindblad_superop(gen)
        ratios = []
        for tau in (0.2, 1.0, 7.0):
            dist = exchange_distribution(evolve(l, tau), gen.hamiltonian, 1.7, 0.6, tau)
            rec = [r for r in qfr_ratio(dist) if abs(r.energy - 1.0) < 1e-9][0]
            ratios.append(rec.ratio)
        assert max(ratios) - min(ratios) < 1e-9


class TestPairwiseCondition:
    def test_balanced_generator_all_times(self):
        gen = example_qdb_family(0.5, 0.4, 1.0, 1.3)
        l = lindblad_superop(gen)
        for tau in (0.1, 1.0, 10.0):
            assert check_pairwise_condition(evolve(l, tau), gen.hamiltonian, 1.3) < 1e-10

    def test_reversal_balanced_maps_satisfy_pairwise_symmetry(self, rng):
        # maps passing the time-reversal balance check (with a reversal
        # fixing the Hamiltonian) inherit the pairwise transition symmetry
        from qdblab.balance import TimeReversal, WeightedSpace, check_qdb2
        from qdblab.dynamics import heisenberg_dual

        for _ in range(3):
            beta = rng.uniform(0.3, 1.5)
            gen = example_qdb_family(rng.uniform(0.1, 1.5), rng.uniform(0, 0.8), 1.0, beta)
            h = gen.hamiltonian
            space = WeightedSpace(gibbs(h, beta), 0.25)
            reversal = TimeReversal.conjugation(2)
            l = lindblad_superop(gen)
            for tau in (0.1, 1.0, 10.0):
                gmap = evolve(l, tau)
                assert check_qdb2(space, heisenberg_dual(gmap), reversal).passes
                assert check_pairwise_condition(gmap, h, beta) < 1e-10

    def test_thermalizing_map_asymptotically(self, rng):
        gen, h = thermal_circulation_qutrit(rng, beta_f=0.9)
        cls = classify(gen, h)
        assert cls.kind == "fpt" and abs(cls.beta_f - 0.9) < 1e-8
        l = lindblad_superop(gen)
        # finite time: the cyclic current breaks the pairwise symmetry
        assert check_pairwise_condition(evolve(l, 0.5), h, 0.9) > 1e-4
        tau_max = default_tau_max(cls)
        assert check_pairwise_condition(evolve(l, tau_max), h, 0.9) < 1e-8


class TestFptIdentity:
    def test_scenario_b_holds(self):
        p = ExampleBParams(omega=1.0, gamma=1.0, beta_f=1.0)
        l = lindblad_superop(example_b_generator(p))
        assert fpt_stationarity_identity(evolve(l, 1.0), p.hamiltonian(), 1.0) < 1e-12

    def test_scenario_a_defect_quantified(self):
        # oracle: the defect equals xi_tau * (q_inf - q_tau) exactly
        p = ExampleAParams.default(1.0, 1.0)
        h = qubit_hamiltonian(1.0)
        tau = 1.0
        defect = fpt_stationarity_identity(example_a_channel(p, tau), h, 1.0)
        expected = p.xi_schedule(tau) * (p.q_inf - p.q_schedule(tau))
        assert abs(defect - expected) < 1e-12
        assert defect > 1e-3


class TestClassify:
    def test_balanced_semigroup_is_fpt(self):
        gen = example_qdb_family(0.7, 0.3, 1.0, 1.4)
        cls = classify(gen, gen.hamiltonian)
        assert cls.kind == "fpt"
        assert abs(cls.beta_f - 1.4) < 1e-9
        assert cls.gamma_min > 0

    def test_scenario_a_family_thermalizing_not_fpt(self):
        p = ExampleAParams.default(1.0, 1.0)
        h = qubit_hamiltonian(1.0)
        cls = classify(lambda tau: example_a_channel(p, tau), h)
        assert cls.kind == "thermalizing"
        assert abs(cls.beta_f - 1.0) < 1e-7

    def test_scenario_a_constant_bias_is_fpt(self):
        p = ExampleAParams.fixed_point(1.0, 1.0)
        h = qubit_hamiltonian(1.0)
        cls = classify(lambda tau: example_a_channel(p, tau), h)
        assert cls.kind == "fpt"

    def test_generic_generator_not_thermal(self, rng):
        gen = random_lindblad(rng, 3)
        cls = classify(gen, gen.hamiltonian)
        assert cls.kind == "non_thermalizing"

    def test_unitary_family_raises_inconclusive(self):
        h = qubit_hamiltonian(1.0)

        def rotation_family(tau):
            u = matlin.expm(-1j * tau * np.array([[0, 0.5], [0.5, 0]], dtype=complex))
            return KrausChannel((u,))

        with pytest.raises(InconclusiveHorizon):
            classify(rotation_family, h)

    def test_pure_hamiltonian_semigroup_not_thermalizing(self, rng):
        from qdblab.dynamics import LindbladGenerator

        h = random_hamiltonian(rng, 2)
        gen = LindbladGenerator.canonical(h, np.zeros((3, 3)))
        cls = classify(gen, h)
        assert cls.kind == "non_thermalizing"

    def test_default_tau_max(self):
        assert default_tau_max(Classification(kind="fpt", gamma_min=0.5)) == 100.0
        assert default_tau_max(Classification(kind="thermalizing")) == 100.0


class TestAsymptoticRatioLaw:
    def test_thermalizing_maps_satisfy_ratio_law_at_horizon(self, rng):
        # the asymptotic ratio law needs thermalization only
        for _ in range(3):
            beta_f = rng.uniform(0.3, 1.2)
            beta_i = rng.uniform(0.0, 1.8)
            gen, h = thermal_circulation_qutrit(rng, beta_f=beta_f)
            cls = classify(gen, h)
            assert cls.kind == "fpt"
            tau_max = default_tau_max(cls)
            dist = exchange_distribution(
                evolve(lindblad_superop(gen), tau_max), h, beta_i, cls.beta_f, tau_max
            )
            for rec in qfr_ratio(dist, ratio_floor=1e-12):
                assert rec.deviation < 1e-6
