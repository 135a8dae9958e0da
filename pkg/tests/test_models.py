import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from rampmcmc.models import (
    BoltzmannTarget,
    DisorderSpec,
    IsingChain,
    RampSchedule,
    SKInstance,
    SpinConfiguration,
    ThreeSpinInstance,
    boltzmann,
    energy,
    energy_table,
    index_from_spins,
    instance_from_json,
    instance_to_json,
    ramp_value,
    sample_3spin,
    sample_sk,
    spins_from_index,
)


def brute_force_sk_energy(instance, index):
    # independent term-by-term oracle: explicit double loop over site pairs
    s = spins_from_index(index, instance.n_sites)
    total = 0.0
    m = 0
    for i in range(instance.n_sites):
        for j in range(i + 1, instance.n_sites):
            total += instance.couplings[m] * s[i] * s[j]
            m += 1
    for i in range(instance.n_sites):
        total += instance.fields[i] * s[i]
    return total


class TestEncoding:
    def test_bit_zero_is_spin_up(self):
        assert spins_from_index(0, 3).tolist() == [1, 1, 1]
        assert spins_from_index(0b101, 3).tolist() == [-1, 1, -1]

    def test_out_of_range_index_rejected(self):
        with pytest.raises(ValueError):
            SpinConfiguration(index=8, n_sites=3)

    @given(st.integers(min_value=1, max_value=12), st.data())
    @settings(max_examples=50, deadline=None)
    def test_round_trip(self, n, data):
        index = data.draw(st.integers(min_value=0, max_value=2**n - 1))
        assert index_from_spins(spins_from_index(index, n)) == index


class TestEnergy:
    def test_ising_all_up_is_ground(self):
        assert energy(IsingChain(4), SpinConfiguration(0, 4)) == -4

    def test_ising_alternating_fully_frustrated(self):
        x = index_from_spins(np.array([1, -1, 1, -1]))
        assert energy(IsingChain(4), SpinConfiguration(x, 4)) == 4

    def test_ising_single_flip_breaks_two_bonds(self):
        assert energy(IsingChain(8), SpinConfiguration(1, 8)) == -4

    def test_sk_matches_term_by_term_sum(self):
        instance = sample_sk(3, seed=11)
        for index in range(8):
            expected = brute_force_sk_energy(instance, index)
            got = energy(instance, SpinConfiguration(index, 3))
            assert got == pytest.approx(expected, abs=1e-14)

    def test_dimension_mismatch_rejected(self):
        with pytest.raises(ValueError):
            energy(IsingChain(4), SpinConfiguration(0, 5))


class TestEnergyTable:
    def test_n2_chain_double_counts_bond(self):
        assert energy_table(IsingChain(2)).tolist() == [-2.0, 2.0, 2.0, -2.0]

    def test_matches_scalar_energy_everywhere(self):
        instance = sample_3spin(5, seed=3)
        table = energy_table(instance)
        for index in range(32):
            assert table[index] == pytest.approx(
                energy(instance, SpinConfiguration(index, 5)), abs=1e-13
            )

    def test_minimum_equals_exhaustive_ground_search(self):
        for seed in (0, 1, 2):
            instance = sample_sk(8, seed=seed)
            table = energy_table(instance)
            ground = min(
                energy(instance, SpinConfiguration(x, 8)) for x in range(256)
            )
            assert table.min() == pytest.approx(ground, abs=1e-12)

    def test_zero_couplings_give_zero_table(self):
        instance = SKInstance(4, couplings=np.zeros(6), fields=np.zeros(4))
        assert np.all(energy_table(instance) == 0.0)

    def test_cap_is_named_in_error(self):
        with pytest.raises(ValueError, match="cap of 12"):
            energy_table(IsingChain(13), max_sites=12)

    def test_fieldless_sk_has_global_flip_symmetry(self):
        instance = SKInstance(6, couplings=sample_sk(6, seed=5).couplings, fields=np.zeros(6))
        table = energy_table(instance)
        flipped = table[np.arange(64) ^ 63]
        np.testing.assert_allclose(table, flipped, atol=1e-12)


class TestBoltzmann:
    def test_infinite_temperature_is_uniform(self):
        target = boltzmann(IsingChain(4), beta=0.0)
        np.testing.assert_allclose(target.probabilities, 1 / 16, atol=1e-15)

    def test_low_temperature_concentrates_on_ground_pair(self):
        target = boltzmann(IsingChain(4), beta=50.0)
        assert target.probabilities[0] == pytest.approx(0.5, abs=1e-10)
        assert target.probabilities[15] == pytest.approx(0.5, abs=1e-10)

    def test_matches_direct_enumeration(self):
        beta = 5.0
        table = energy_table(IsingChain(3))
        weights = [math.exp(-beta * e) for e in table]
        z = sum(weights)
        target = boltzmann(IsingChain(3), beta=beta)
        np.testing.assert_allclose(target.probabilities, np.array(weights) / z, rtol=1e-12)
        assert target.log_partition == pytest.approx(math.log(z), rel=1e-12)

    def test_rejects_nonfinite_beta(self):
        with pytest.raises(ValueError):
            boltzmann(IsingChain(3), beta=math.inf)

    @given(st.floats(min_value=0.01, max_value=10.0))
    @settings(max_examples=20, deadline=None)
    def test_normalized_positive_and_monotone(self, beta):
        instance = sample_sk(5, seed=77)
        table = energy_table(instance)
        target = boltzmann(instance, beta=beta, table=table)
        assert np.all(target.probabilities > 0)
        assert abs(target.probabilities.sum() - 1.0) < 1e-12
        order = np.argsort(table)
        assert np.all(np.diff(target.probabilities[order]) <= 1e-15)


class TestDisorderSampling:
    def test_sk_coupling_variance(self):
        # pool couplings from many instances: J ~ N(0, 1/N) at N = 10
        values = np.concatenate(
            [sample_sk(10, seed=s).couplings for s in range(2300)]
        )[:100_000]
        variance = values.var()
        standard_error = 0.1 * math.sqrt(2.0 / (len(values) - 1))
        assert abs(variance - 0.1) < 3 * standard_error

    def test_sk_fields_bounded(self):
        for seed in range(50):
            assert np.all(np.abs(sample_sk(6, seed=seed).fields) <= 0.25)

    def test_sk_deterministic(self):
        a, b = sample_sk(7, seed=123), sample_sk(7, seed=123)
        np.testing.assert_array_equal(a.couplings, b.couplings)
        np.testing.assert_array_equal(a.fields, b.fields)

    def test_3spin_coupling_variance(self):
        values = np.concatenate(
            [sample_3spin(10, seed=s).couplings for s in range(840)]
        )[:100_000]
        variance = values.var()
        expected = 3.0 / 100.0
        standard_error = expected * math.sqrt(2.0 / (len(values) - 1))
        assert abs(variance - expected) < 3 * standard_error

    def test_3spin_coupling_count(self):
        assert len(sample_3spin(10, seed=0).couplings) == math.comb(10, 3)

    def test_3spin_deterministic(self):
        np.testing.assert_array_equal(
            sample_3spin(6, seed=9).couplings, sample_3spin(6, seed=9).couplings
        )

    def test_size_preconditions(self):
        with pytest.raises(ValueError):
            sample_sk(1, seed=0)
        with pytest.raises(ValueError):
            sample_3spin(2, seed=0)

    def test_disorder_spec_replays_instances(self):
        spec = DisorderSpec(model="sk", n_sites=5, seed=42, n_instances=3)
        again = DisorderSpec(model="sk", n_sites=5, seed=42, n_instances=3)
        for a, b in zip(spec.instances(), again.instances()):
            np.testing.assert_array_equal(a.couplings, b.couplings)

    def test_instance_seeds_distinct(self):
        spec = DisorderSpec(model="3spin", n_sites=5, seed=1, n_instances=20)
        seeds = [spec.instance_seed(i) for i in range(20)]
        assert len(set(seeds)) == 20


class TestInstanceSerialization:
    def test_sk_round_trip(self):
        instance = sample_sk(5, seed=31)
        record = instance_to_json(instance, seed=31)
        rebuilt = instance_from_json(record)
        np.testing.assert_array_equal(rebuilt.couplings, instance.couplings)
        np.testing.assert_array_equal(rebuilt.fields, instance.fields)
        assert record["seed"] == 31

    def test_3spin_round_trip_tolerates_site_order(self):
        instance = sample_3spin(5, seed=8)
        record = instance_to_json(instance)
        record["couplings"]["sites"] = [list(reversed(s)) for s in record["couplings"]["sites"]]
        rebuilt = instance_from_json(record)
        np.testing.assert_array_equal(rebuilt.couplings, instance.couplings)

    def test_ising_round_trip(self):
        rebuilt = instance_from_json(instance_to_json(IsingChain(7)))
        assert isinstance(rebuilt, IsingChain)
        assert rebuilt.n_sites == 7

    def test_duplicate_coupling_rejected(self):
        record = instance_to_json(sample_sk(4, seed=1))
        record["couplings"]["sites"][1] = record["couplings"]["sites"][0]
        with pytest.raises(ValueError, match="duplicate"):
            instance_from_json(record)

    def test_missing_coupling_rejected(self):
        record = instance_to_json(sample_sk(4, seed=1))
        record["couplings"]["sites"] = record["couplings"]["sites"][:-1]
        record["couplings"]["values"] = record["couplings"]["values"][:-1]
        with pytest.raises(ValueError, match="expected 6 couplings"):
            instance_from_json(record)


class TestRampSchedule:
    def test_sin2_midpoint(self):
        s = RampSchedule.sin2(alpha=2.0, kappa=1.0)
        assert ramp_value(s, 1.0) == pytest.approx(0.5, abs=1e-15)

    def test_boundaries(self):
        for s in (RampSchedule.sin2(3.0, 2.0), RampSchedule.linear(3.0, 2.0)):
            assert ramp_value(s, 0.0) == 0.0
            assert ramp_value(s, 3.0) == 1.0
            assert ramp_value(s, 4.0) == 1.0  # plateau

    def test_linear_quarter(self):
        assert ramp_value(RampSchedule.linear(4.0, 0.0), 1.0) == pytest.approx(0.25)

    def test_outside_window_rejected(self):
        s = RampSchedule.sin2(1.0, 1.0)
        with pytest.raises(ValueError):
            ramp_value(s, 3.5)
        with pytest.raises(ValueError):
            ramp_value(s, -0.1)

    def test_quench_requires_zero_alpha(self):
        with pytest.raises(ValueError):
            RampSchedule("quench", alpha=1.0)

    @given(
        st.sampled_from(["sin2", "linear"]),
        st.floats(min_value=0.1, max_value=20.0),
        st.floats(min_value=0.0, max_value=50.0),
        st.floats(min_value=0.0, max_value=1.0),
    )
    @settings(max_examples=200, deadline=None)
    def test_time_reversal_symmetry_is_exact(self, kind, alpha, kappa, frac):
        s = RampSchedule(kind, alpha, kappa)
        t = frac * s.total_time
        mirrored = s.total_time - t
        # exactness is only meaningful when the reflection is representable
        assume(s.total_time - mirrored == t)
        assert ramp_value(s, t) == ramp_value(s, mirrored)

    def test_large_kappa_limit_restricts_to_ramp_up(self):
        s = RampSchedule.sin2(2.0)
        assert ramp_value(s, 1.0) == pytest.approx(0.5)
        with pytest.raises(ValueError):
            ramp_value(s, 2.5)
