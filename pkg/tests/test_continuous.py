import numpy as np
import pytest

from cavityfeedback import (
    CatParity,
    ContinuousParams,
    DensityMatrix,
    FockDim,
    TruncationError,
    cat_fidelity_analytic,
    cat_state,
    coherent_state,
    diagonal_band,
    evolve_continuous,
    evolve_continuous_grid,
    fidelity,
    fock_fidelity_analytic,
    fock_superposition,
    ideal_offdiagonal_decay,
    mean_amplitude_ideal,
    standard_phase_diffusion,
)
from conftest import random_density


def two_level_state(n, m, w_n, dim):
    return DensityMatrix.from_state(
        fock_superposition([(n, np.sqrt(w_n)), (m, np.sqrt(1.0 - w_n))], dim)
    )


class TestEvolveContinuous:
    def test_ideal_detection_preserves_diagonal_states(self):
        dim = FockDim(15)
        mat = np.diag([0.3, 0.4, 0.2, 0.1] + [0.0] * 12).astype(complex)
        rho0 = DensityMatrix(mat, dim)
        rho_t = evolve_continuous(rho0, ContinuousParams(1.0, 1.0), 3.0)
        assert np.max(np.abs(rho_t.elements - rho0.elements)) < 1e-9

    def test_pure_damping_of_one_photon(self):
        # closed-form relaxation of |1><1| in a vacuum bath
        dim = FockDim(7)
        rho0 = DensityMatrix.from_state(fock_superposition([(1, 1.0)], dim))
        gt = 0.8
        rho_t = evolve_continuous(rho0, ContinuousParams(1.0, 0.0), gt)
        expected = np.zeros((8, 8), dtype=complex)
        expected[1, 1] = np.exp(-gt)
        expected[0, 0] = 1.0 - np.exp(-gt)
        assert np.max(np.abs(rho_t.elements - expected)) < 1e-12

    def test_ideal_detection_matches_elementwise_oracle(self, dim63):
        cat = DensityMatrix.from_state(cat_state(np.sqrt(5.0), CatParity.ODD, dim63))
        evolved = evolve_continuous(cat, ContinuousParams(1.0, 1.0), 0.2)
        oracle = ideal_offdiagonal_decay(cat, 1.0, 0.2)
        assert np.max(np.abs(evolved.elements - oracle.elements)) < 1e-9
        assert abs(fidelity(cat, evolved) - fidelity(cat, oracle)) < 1e-9

    def test_trace_conservation(self):
        rho0 = random_density(31, 26, seed=2)
        for eta in (0.0, 0.4, 1.0):
            rho_t = evolve_continuous(rho0, ContinuousParams(1.0, eta), 0.7)
            assert abs(np.trace(rho_t.elements).real - 1.0) < 1e-9

    def test_band_closure(self):
        # support confined to one off-diagonal distance stays confined
        dim = FockDim(15)
        mat = np.zeros((16, 16), dtype=complex)
        mat[2, 2] = mat[5, 5] = 0.5
        mat[2, 5] = mat[5, 2] = 0.25
        rho0 = DensityMatrix(mat, dim)
        rho_t = evolve_continuous(rho0, ContinuousParams(1.0, 0.6), 0.5)
        out = np.array(rho_t.elements)
        for p in range(16):
            band = np.diagonal(out, offset=p)
            if p not in (0, 3):
                assert np.max(np.abs(band)) < 1e-12

    @pytest.mark.parametrize("seed", [0, 1])
    def test_ideal_oracle_equivalence_random(self, seed):
        rho0 = random_density(31, 26, seed)
        evolved = evolve_continuous(rho0, ContinuousParams(1.0, 1.0), 0.9)
        oracle = ideal_offdiagonal_decay(rho0, 1.0, 0.9)
        assert np.max(np.abs(evolved.elements - oracle.elements)) < 1e-9
        assert np.max(np.abs(np.diag(evolved.elements) - np.diag(rho0.elements))) < 1e-9

    def test_top_population_rejected(self):
        dim = FockDim(7)
        rho0 = DensityMatrix.from_state(fock_superposition([(7, 1.0)], dim))
        with pytest.raises(TruncationError):
            evolve_continuous(rho0, ContinuousParams(1.0, 0.5), 0.1)

    def test_negative_time_rejected(self, dim63):
        rho0 = DensityMatrix.from_state(coherent_state(1.0, dim63))
        with pytest.raises(ValueError):
            evolve_continuous(rho0, ContinuousParams(1.0, 0.5), -0.1)

    def test_grid_matches_single_shots(self):
        rho0 = random_density(15, 12, seed=9)
        times = np.linspace(0.0, 1.0, 6)
        params = ContinuousParams(1.0, 0.3)
        states = evolve_continuous_grid(rho0, params, times)
        for t, st in zip(times, states):
            single = evolve_continuous(rho0, params, t)
            assert np.max(np.abs(st.elements - single.elements)) < 1e-11

    def test_params_validation(self):
        with pytest.raises(ValueError):
            ContinuousParams(0.0, 0.5)
        with pytest.raises(ValueError):
            ContinuousParams(1.0, 1.5)


class TestDampedCatClosedForm:
    @pytest.mark.parametrize("gt", [0.1, 0.5, 1.5])
    def test_no_feedback_evolution_matches_coherent_superposition_form(self, gt, dim63):
        # vacuum damping sends the cat onto shrunken coherent components with
        # an interference weight exp(-2 |alpha|^2 (1 - e^(-gamma t)));
        # rebuild that matrix directly and compare elementwise
        a2 = 5.0
        alpha = np.sqrt(a2)
        cat = DensityMatrix.from_state(cat_state(alpha, CatParity.ODD, dim63))
        evolved = evolve_continuous(cat, ContinuousParams(1.0, 0.0), gt)

        beta = alpha * np.exp(-gt / 2.0)
        plus = coherent_state(beta, dim63).amplitudes
        minus = coherent_state(-beta, dim63).amplitudes
        weight = np.exp(-2.0 * a2 * (1.0 - np.exp(-gt)))
        norm = 1.0 / (2.0 * (1.0 - np.exp(-2.0 * a2)))
        expected = norm * (
            np.outer(plus, plus.conj())
            + np.outer(minus, minus.conj())
            - weight * (np.outer(minus, plus.conj()) + np.outer(plus, minus.conj()))
        )
        assert np.max(np.abs(evolved.elements - expected)) < 1e-9

    @pytest.mark.parametrize("gt", [0.2, 0.8])
    def test_vacuum_bath_routes_agree(self, gt):
        # band-exponential evolution at zero efficiency and the photon-loss
        # Kraus sum are independent implementations of the same channel
        from cavityfeedback import dissipation_map

        rho0 = random_density(31, 26, seed=11)
        via_bands = evolve_continuous(rho0, ContinuousParams(1.0, 0.0), gt)
        via_kraus = dissipation_map(rho0, gt)
        assert np.max(np.abs(via_bands.elements - via_kraus.elements)) < 1e-11


class TestClosedFormMaps:
    def test_identity_at_zero_time(self):
        rho0 = random_density(15, 12, seed=3)
        out = ideal_offdiagonal_decay(rho0, 1.0, 0.0)
        assert np.array_equal(out.elements, rho0.elements)

    def test_diagonal_untouched(self):
        rho0 = random_density(15, 12, seed=4)
        out = ideal_offdiagonal_decay(rho0, 1.0, 2.0)
        assert np.max(np.abs(np.diag(out.elements) - np.diag(rho0.elements))) == 0.0

    def test_sqrt_rate_factor(self):
        dim = FockDim(7)
        rho0 = two_level_state(1, 4, 0.5, dim)
        out = ideal_offdiagonal_decay(rho0, 1.0, 1.0)
        ratio = out.elements[4, 1] / rho0.elements[4, 1]
        assert abs(ratio - np.exp(-0.5)) < 1e-14

    def test_standard_rate_factor(self):
        dim = FockDim(7)
        rho0 = two_level_state(1, 4, 0.5, dim)
        out = standard_phase_diffusion(rho0, 1.0, 1.0)
        ratio = out.elements[4, 1] / rho0.elements[4, 1]
        assert abs(ratio - np.exp(-4.5)) < 1e-14

    def test_standard_diagonal_untouched(self):
        rho0 = random_density(15, 12, seed=5)
        out = standard_phase_diffusion(rho0, 1.0, 1.3)
        assert np.max(np.abs(np.diag(out.elements) - np.diag(rho0.elements))) == 0.0

    @pytest.mark.parametrize("seed", [6, 7])
    def test_sqrt_decay_dominates_standard(self, seed):
        rho0 = random_density(63, 50, seed)
        slow = ideal_offdiagonal_decay(rho0, 1.0, 0.7)
        fast = standard_phase_diffusion(rho0, 1.0, 0.7)
        assert np.all(np.abs(slow.elements) >= np.abs(fast.elements) - 1e-15)


class TestCatFidelityAnalytic:
    def test_unity_at_zero(self):
        assert cat_fidelity_analytic(5.0, CatParity.ODD, 1.0, 0.0) == pytest.approx(1.0)

    def test_long_time_limit_odd(self):
        assert abs(cat_fidelity_analytic(5.0, CatParity.ODD, 1.0, 50.0)) < 1e-10

    def test_matches_master_equation(self, dim63):
        cat = DensityMatrix.from_state(cat_state(np.sqrt(5.0), CatParity.ODD, dim63))
        rho_t = evolve_continuous(cat, ContinuousParams(1.0, 0.0), 0.2)
        numeric = fidelity(cat, rho_t)
        assert abs(numeric - cat_fidelity_analytic(5.0, CatParity.ODD, 1.0, 0.2)) < 1e-6

    def test_even_cat_long_time_reaches_vacuum_overlap(self, dim63):
        # an even cat relaxes to the vacuum, which it overlaps
        a2 = 3.3
        val = cat_fidelity_analytic(a2, CatParity.EVEN, 1.0, 60.0)
        cat = cat_state(np.sqrt(a2), CatParity.EVEN, dim63)
        assert abs(val - abs(cat.amplitudes[0]) ** 2) < 1e-10

    @pytest.mark.parametrize("eta_pair", [(0.25, 0.0), (0.5, 0.25), (0.75, 0.5), (1.0, 0.75)])
    def test_fidelity_ordering_in_eta(self, eta_pair, dim63):
        cat = DensityMatrix.from_state(cat_state(np.sqrt(5.0), CatParity.ODD, dim63))
        hi, lo = eta_pair
        for gt in (0.1, 0.2, 0.5, 1.0):
            f_hi = fidelity(cat, evolve_continuous(cat, ContinuousParams(1.0, hi), gt))
            f_lo = fidelity(cat, evolve_continuous(cat, ContinuousParams(1.0, lo), gt))
            assert f_hi >= f_lo - 1e-12


class TestFockFidelityAnalytic:
    def test_unity_at_zero(self):
        params = ContinuousParams(1.0, 0.5)
        assert fock_fidelity_analytic(1 / 3, 2 / 3, 2, 4, params, 0.0) == pytest.approx(1.0)

    def test_ideal_detection_form(self):
        # at full efficiency only the coherence decays, at the sqrt-spaced rate
        params = ContinuousParams(1.0, 1.0)
        a2, b2 = 1 / 3, 2 / 3
        for gt in (0.3, 1.0, 2.0):
            expected = a2**2 + b2**2 + 2 * a2 * b2 * np.exp(-gt * (3.0 - np.sqrt(8.0)))
            assert abs(fock_fidelity_analytic(a2, b2, 2, 4, params, gt) - expected) < 1e-14

    @pytest.mark.parametrize("eta", [0.0, 0.25, 0.5, 0.75, 1.0])
    def test_matches_master_equation(self, eta, dim63):
        params = ContinuousParams(1.0, eta)
        rho0 = two_level_state(2, 4, 1 / 3, dim63)
        for gt in (0.1, 0.5, 1.7):
            rho_t = evolve_continuous(rho0, params, gt)
            analytic = fock_fidelity_analytic(1 / 3, 2 / 3, 2, 4, params, gt)
            assert abs(fidelity(rho0, rho_t) - analytic) < 1e-6

    def test_precondition_checks(self):
        params = ContinuousParams(1.0, 0.5)
        with pytest.raises(ValueError):
            fock_fidelity_analytic(0.5, 0.5, 4, 2, params, 1.0)
        with pytest.raises(ValueError):
            fock_fidelity_analytic(0.6, 0.6, 2, 4, params, 1.0)


class TestMeanAmplitudeIdeal:
    def test_initial_value_coherent(self, dim63):
        rho = DensityMatrix.from_state(coherent_state(np.sqrt(3.3), dim63))
        assert abs(mean_amplitude_ideal(rho, 1.0, 0.0) - np.sqrt(3.3)) < 1e-8

    def test_number_state_has_no_amplitude(self):
        dim = FockDim(7)
        rho = DensityMatrix.from_state(fock_superposition([(1, 1.0)], dim))
        assert mean_amplitude_ideal(rho, 1.0, 2.0) == 0.0

    def test_semiclassical_decay_rate(self):
        # exact sqrt-spaced sum against the slow-decay estimate at nbar = 25
        nbar = 25.0
        dim = FockDim(127)
        rho = DensityMatrix.from_state(coherent_state(np.sqrt(nbar), dim))
        alpha = np.sqrt(nbar)
        for gt in (0.25, 0.5, 1.0):
            exact = mean_amplitude_ideal(rho, 1.0, gt)
            semi = np.exp(-gt / (8.0 * nbar)) * alpha
            assert abs(exact - semi) / abs(semi) < 0.05

    def test_matches_full_evolution(self, dim63):
        from cavityfeedback import mean_amplitude

        rho = DensityMatrix.from_state(coherent_state(np.sqrt(3.3), dim63))
        evolved = evolve_continuous(rho, ContinuousParams(1.0, 1.0), 0.6)
        assert abs(mean_amplitude(evolved) - mean_amplitude_ideal(rho, 1.0, 0.6)) < 1e-10


class TestDiagonalBand:
    def test_extraction(self):
        rho = random_density(7, 6, seed=8)
        band = diagonal_band(rho, 2)
        assert band.p == 2
        assert band.values.shape == (6,)
        assert np.array_equal(band.values, np.diagonal(rho.elements, offset=2))

    def test_band_index_validation(self):
        rho = random_density(7, 6, seed=8)
        with pytest.raises(ValueError):
            diagonal_band(rho, 8)
