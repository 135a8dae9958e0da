import math

import numpy as np
import pytest

from rampmcmc.freefermion import (
    bound_tail_term,
    classical_ground_mode,
    epsilon_k,
    ising_bound,
    ising_bound_detail,
    ising_bound_large_n,
    lz_eta_approx,
    mode_eta,
    mode_etas,
    mode_hamiltonian,
    mode_transition,
    momentum_sectors,
    plateau_excited_mode,
)
from rampmcmc.models import RampSchedule


def quench_eta_closed_form(k, h):
    eps = epsilon_k(k, h)
    theta = math.acos((h - math.cos(k)) / eps)
    return math.cos((theta + k) / 2) ** 2


class TestMomentumSectors:
    def test_cardinalities(self):
        for n in (4, 8, 12, 40):
            even, odd = momentum_sectors(n)
            assert len(even.momenta) == n // 2
            assert len(odd.momenta) == n // 2 - 1

    def test_momentum_values(self):
        even, odd = momentum_sectors(8)
        np.testing.assert_allclose(even.momenta, np.pi / 8 * np.array([1, 3, 5, 7]))
        np.testing.assert_allclose(odd.momenta, np.pi / 4 * np.array([1, 2, 3]))

    def test_all_momenta_interior(self):
        even, odd = momentum_sectors(30)
        for ks in (even.momenta, odd.momenta):
            assert np.all((ks > 0) & (ks < np.pi))

    def test_odd_size_rejected(self):
        with pytest.raises(ValueError, match="even"):
            momentum_sectors(7)


class TestModeStates:
    def test_epsilon_value(self):
        assert epsilon_k(np.pi / 2, 1.5) == pytest.approx(math.sqrt(3.25), rel=1e-14)

    def test_mode_hamiltonian_eigenvalues_are_twice_epsilon(self):
        k, h = 0.7, 1.5
        eigenvalues = np.linalg.eigvalsh(mode_hamiltonian(k, h, gamma=1.0))
        eps = epsilon_k(k, h)
        np.testing.assert_allclose(eigenvalues, [-2 * eps, 2 * eps], rtol=1e-12)

    def test_classical_ground_mode_is_zero_drive_ground_state(self):
        for k in (0.3, 1.1, 2.7):
            matrix = mode_hamiltonian(k, h=1.5, gamma=0.0)
            vec = classical_ground_mode(k)
            expected = -2 * epsilon_k(k, 0.0)
            np.testing.assert_allclose(matrix @ vec, expected * vec, atol=1e-12)

    def test_plateau_excited_mode_is_full_drive_excited_state(self):
        for k in (0.3, 1.1, 2.7):
            matrix = mode_hamiltonian(k, h=1.5, gamma=1.0)
            vec = plateau_excited_mode(k, 1.5)
            expected = 2 * epsilon_k(k, 1.5)
            np.testing.assert_allclose(matrix @ vec, expected * vec, atol=1e-12)


class TestModeEta:
    def test_quench_closed_form(self):
        ks = np.linspace(0.01, np.pi - 0.01, 100)
        for h in (0.5, 1.5):
            etas, _ = mode_etas(ks, h, RampSchedule.quench())
            expected = [quench_eta_closed_form(k, h) for k in ks]
            np.testing.assert_allclose(etas, expected, atol=1e-10)

    def test_norm_preserved_through_integration(self):
        for alpha in (1.0, 8.0, 20.0):
            result = mode_transition(0.9, 1.5, RampSchedule.sin2(alpha))
            assert result.norm_residual <= 1e-10

    def test_adiabatic_suppression(self):
        eta = mode_eta(np.pi / 4, 1.5, RampSchedule.sin2(50.0))
        assert eta <= 1e-3

    def test_f_bounds(self):
        for k in (0.2, 1.0, 2.0):
            for alpha in (0.0, 1.0, 5.0):
                result = mode_transition(k, 1.5, RampSchedule.sin2(alpha))
                assert 0.0 <= result.eta <= 1.0
                assert 0.5 <= result.f <= 1.0

    def test_insufficient_steps_raise(self):
        with pytest.raises(ValueError, match="step"):
            mode_eta(0.5, 1.5, RampSchedule.sin2(200.0), steps_per_unit_time=1)

    def test_momentum_domain_enforced(self):
        for bad in (0.0, np.pi, -0.3):
            with pytest.raises(ValueError):
                mode_eta(bad, 1.5, RampSchedule.quench())


class TestLzApprox:
    def test_zero_ramp_time_gives_unity(self):
        for k in (0.05, 0.4, 1.0):
            assert lz_eta_approx(k, 1.5, 0.0) == 1.0

    def test_critical_regime_value(self):
        assert lz_eta_approx(0.1, 1.5, 1.0) == pytest.approx(
            math.exp(-2 * np.pi / 1.5 * 0.01), rel=1e-12
        )

    def test_agreement_with_linear_ramp_integration(self):
        # the asymptotic form is the linear-sweep limit, so compare against
        # the linear schedule; points below the formula's validity floor
        # (finite-window tails dominate once eta has decayed past ~1e-4)
        # are excluded
        h = 1.5
        for alpha in (5.0, 10.0, 20.0, 50.0):
            for k in (0.05, 0.1, 0.2, 0.3):
                approx = lz_eta_approx(k, h, alpha)
                if approx < 1e-4:
                    continue
                exact = mode_eta(k, h, RampSchedule.linear(alpha))
                assert 0.5 <= exact / approx <= 2.0

    def test_gapped_regime_uses_swept_minimum_gap(self):
        k = 1.2
        h = 0.6
        grid = np.linspace(0.0, 1.0, 1001)
        gap = epsilon_k(k, grid * h).min()
        assert lz_eta_approx(k, h, 3.0) == pytest.approx(
            math.exp(-2 * np.pi / h * 3.0 * gap**2), rel=1e-9
        )


class TestIsingBound:
    def test_tail_term_formula(self):
        n, beta = 8, 5.0
        expected = math.exp(-4 * beta) / (2 - n * (n - 1) * math.exp(-4 * beta))
        assert bound_tail_term(n, beta) == pytest.approx(expected, rel=1e-14)

    def test_tail_denominator_guard(self):
        with pytest.raises(ValueError, match="too small"):
            ising_bound(10, 0.5, 1.5, RampSchedule.quench())

    def test_odd_size_rejected(self):
        with pytest.raises(ValueError):
            ising_bound(9, 5.0, 1.5, RampSchedule.quench())

    def test_zero_temperature_limit_keeps_only_sector_terms(self):
        detail = ising_bound_detail(8, 50.0, 1.5, RampSchedule.sin2(2.0))
        sector_part = sum(detail.sector_terms) / (8 * 7)
        assert detail.tail_term <= 1e-80
        assert detail.bound == pytest.approx(sector_part, rel=1e-12)

    def test_quench_bound_matches_closed_form_substitution(self):
        n, beta, h = 8, 5.0, 1.5
        total = 0.0
        for sector in momentum_sectors(n):
            etas = np.array([quench_eta_closed_form(k, h) for k in sector.momenta])
            f = 2 * etas**2 - 2 * etas + 1
            total += np.prod(f) * np.sum(1 / f - 1)
        expected = total / (n * (n - 1)) + bound_tail_term(n, beta)
        assert ising_bound(n, beta, h, RampSchedule.quench()) == pytest.approx(
            expected, rel=1e-12
        )

    def test_adiabatic_limit_leaves_only_tail(self):
        # by alpha = 150 even the smallest momentum mode is suppressed and
        # the sector sums drop below the temperature tail
        detail = ising_bound_detail(8, 5.0, 1.5, RampSchedule.sin2(150.0))
        assert sum(detail.sector_terms) / (8 * 7) < detail.tail_term


class TestCriticalScalingSchedule:
    def test_quadratic_ramp_time_schedule_gives_inverse_square_gap(self):
        # ramp times grown as N^2/64 keep the bound on a power law with
        # exponent near -2 across N = 8..40
        from rampmcmc.analysis import fit_scaling

        sizes = np.arange(8, 41, 4)
        values = np.array([
            ising_bound(int(n), 5.0, 1.5, RampSchedule.sin2(n * n / 64.0))
            for n in sizes
        ])
        fit = fit_scaling(sizes, values, 1e-3 * values, kind="power")
        assert -2.5 <= -fit.exponent <= -1.5


class TestLargeNBound:
    def test_matches_sector_sum_at_n32(self):
        schedule = RampSchedule.sin2(8.0)
        discrete = ising_bound(32, 5.0, 1.5, schedule)
        integral = ising_bound_large_n(32, 5.0, 1.5, schedule)
        assert integral == pytest.approx(discrete, rel=0.05)

    def test_no_transitions_leave_only_tail(self, monkeypatch):
        # with eta forced to zero (f identically 1) the leading term vanishes
        # exactly and only the temperature tail survives
        import rampmcmc.freefermion as ff

        monkeypatch.setattr(
            ff, "mode_etas", lambda ks, *a, **kw: (np.zeros(len(ks)), np.zeros(len(ks)))
        )
        value = ff.ising_bound_large_n(16, 5.0, 1.5, RampSchedule.sin2(10.0))
        assert value == bound_tail_term(16, 5.0)

    def test_quench_integral_form_tracks_closed_form_f(self):
        # integrand built from f = 1 - h^2 sin^2 k / (2 eps^2) must match the
        # computed one on the quadrature grid
        h = 1.5
        ks = np.linspace(0.0, np.pi, 513)[1:-1]
        etas, _ = mode_etas(ks, h, RampSchedule.quench())
        f = 2 * etas**2 - 2 * etas + 1
        closed = 1 - h**2 * np.sin(ks) ** 2 / (2 * epsilon_k(ks, h) ** 2)
        np.testing.assert_allclose(f, closed, atol=1e-12)

    def test_bad_quadrature_rejected(self):
        with pytest.raises(ValueError):
            ising_bound_large_n(16, 5.0, 1.5, RampSchedule.quench(), quad_points=7)
