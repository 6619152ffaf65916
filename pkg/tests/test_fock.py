import numpy as np
import pytest

from cavityfeedback import (
    CatParity,
    DegenerateCatError,
    DensityMatrix,
    DimMismatchError,
    FockDim,
    StateVector,
    TruncationError,
    cat_state,
    coherent_state,
    fidelity,
    fock_superposition,
    mean_amplitude,
    parity_expectation,
)
from conftest import random_density


class TestCoherentState:
    def test_vacuum(self, dim63):
        st = coherent_state(0.0, dim63)
        assert st.amplitudes[0] == 1.0
        assert np.all(st.amplitudes[1:] == 0.0)

    def test_mean_photon_number_by_direct_summation(self, dim63):
        st = coherent_state(np.sqrt(5.0), dim63)
        direct = sum(n * abs(c) ** 2 for n, c in enumerate(st.amplitudes))
        assert abs(direct - 5.0) < 1e-8
        assert abs(st.mean_photon_number() - 5.0) < 1e-8

    def test_norm(self, dim63):
        st = coherent_state(np.sqrt(3.3), dim63)
        assert abs(np.sum(np.abs(st.amplitudes) ** 2) - 1.0) < 1e-12

    def test_truncation_error_on_fat_tail(self):
        # |alpha|^2 = 4 passes the n_max/4 precondition at n_max = 16 but
        # leaves ~1e-7 of Poisson weight beyond the cutoff
        with pytest.raises(TruncationError):
            coherent_state(2.0, FockDim(16))

    def test_precondition_rejects_large_amplitude(self, dim63):
        with pytest.raises(ValueError):
            coherent_state(np.sqrt(20.0), dim63)

    def test_complex_amplitude_phases(self, dim63):
        alpha = 1.0 + 1.5j
        st = coherent_state(alpha, dim63)
        rho = DensityMatrix.from_state(st)
        assert abs(mean_amplitude(rho) - alpha) < 1e-8


class TestCatState:
    def test_odd_cat_even_amplitudes_vanish(self, dim63):
        st = cat_state(np.sqrt(5.0), CatParity.ODD, dim63)
        assert np.all(st.amplitudes[::2] == 0.0)

    def test_odd_cat_parity(self, dim63):
        rho = DensityMatrix.from_state(cat_state(np.sqrt(5.0), CatParity.ODD, dim63))
        assert abs(parity_expectation(rho) + 1.0) < 1e-12

    def test_even_cat_mean_photon_number(self, dim63):
        a2 = 3.3
        st = cat_state(np.sqrt(a2), CatParity.EVEN, dim63)
        direct = sum(n * abs(c) ** 2 for n, c in enumerate(st.amplitudes))
        assert abs(direct - a2 * np.tanh(a2)) < 1e-10
        assert abs(st.mean_photon_number() - direct) < 1e-12

    @pytest.mark.parametrize("a2", [0.5, 3.3, 5.0, 10.0])
    @pytest.mark.parametrize("parity", [CatParity.EVEN, CatParity.ODD])
    def test_closed_form_normalisation(self, a2, parity, dim63):
        # rebuild the amplitudes from the closed-form prefactor and check the
        # truncated norm directly
        alpha = np.sqrt(a2)
        base = coherent_state(alpha, dim63).amplitudes
        n = np.arange(dim63.size)
        keep = (n % 2 == 0) if parity is CatParity.EVEN else (n % 2 == 1)
        npm = 1.0 / np.sqrt(2.0 * (1.0 + parity.sign * np.exp(-2.0 * a2)))
        amps = np.where(keep, 2.0 * npm * base, 0.0)
        assert abs(np.sum(np.abs(amps) ** 2) - 1.0) < 1e-12

    def test_degenerate_odd_cat_rejected(self, dim63):
        with pytest.raises(DegenerateCatError):
            cat_state(1e-9, CatParity.ODD, dim63)


class TestFockSuperposition:
    def test_two_level_state(self, dim63):
        st = fock_superposition([(2, 1 / np.sqrt(3)), (4, np.sqrt(2.0 / 3.0))], dim63)
        assert abs(st.mean_photon_number() - 10.0 / 3.0) < 1e-12

    def test_vacuum(self, dim63):
        st = fock_superposition([(0, 1.0)], dim63)
        assert st.amplitudes[0] == 1.0

    def test_complex_coefficients(self, dim63):
        st = fock_superposition([(1, 1 / np.sqrt(2)), (3, 1j / np.sqrt(2))], dim63)
        assert abs(np.sum(np.abs(st.amplitudes) ** 2) - 1.0) < 1e-12
        assert abs(st.mean_photon_number() - 2.0) < 1e-12

    def test_index_above_cutoff(self):
        with pytest.raises(IndexError):
            fock_superposition([(5, 1.0)], FockDim(4))

    def test_unnormalised_coefficients_rejected(self, dim63):
        with pytest.raises(ValueError):
            fock_superposition([(0, 0.5), (1, 0.5)], dim63)


class TestParityExpectation:
    def test_vacuum(self, dim63):
        rho = DensityMatrix.from_state(fock_superposition([(0, 1.0)], dim63))
        assert parity_expectation(rho) == 1.0

    def test_equal_mixture(self):
        dim = FockDim(3)
        mat = np.diag([0.5, 0.5, 0.0, 0.0]).astype(complex)
        assert abs(parity_expectation(DensityMatrix(mat, dim))) < 1e-15

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_projector_identity(self, seed):
        rho = random_density(31, 28, seed)
        n = np.arange(32)
        p_even = np.sum(np.real(np.diag(rho.elements))[n % 2 == 0])
        p_odd = np.sum(np.real(np.diag(rho.elements))[n % 2 == 1])
        assert abs(parity_expectation(rho) - (p_even - p_odd)) < 1e-14


class TestFidelity:
    def test_pure_self_fidelity(self, dim63):
        rho = DensityMatrix.from_state(coherent_state(1.5, dim63))
        assert abs(fidelity(rho, rho) - 1.0) < 1e-12

    def test_orthogonal_states(self):
        dim = FockDim(3)
        r0 = DensityMatrix.from_state(fock_superposition([(0, 1.0)], dim))
        r1 = DensityMatrix.from_state(fock_superposition([(1, 1.0)], dim))
        assert fidelity(r0, r1) == 0.0

    def test_odd_cat_vs_vacuum(self, dim63):
        cat = DensityMatrix.from_state(cat_state(np.sqrt(5.0), CatParity.ODD, dim63))
        vac = DensityMatrix.from_state(fock_superposition([(0, 1.0)], dim63))
        assert abs(fidelity(cat, vac)) < 1e-15

    @pytest.mark.parametrize("seed", [3, 4])
    def test_symmetry(self, seed):
        a = random_density(15, 12, seed)
        b = random_density(15, 12, seed + 50)
        assert abs(fidelity(a, b) - fidelity(b, a)) < 1e-12

    def test_dim_mismatch(self):
        a = DensityMatrix.from_state(fock_superposition([(0, 1.0)], FockDim(3)))
        b = DensityMatrix.from_state(fock_superposition([(0, 1.0)], FockDim(4)))
        with pytest.raises(DimMismatchError):
            fidelity(a, b)

    @pytest.mark.parametrize("seed", [5, 6])
    def test_real_within_tolerance(self, seed):
        a = random_density(15, 12, seed)
        b = random_density(15, 12, seed + 100)
        raw = complex(np.vdot(a.elements, b.elements))
        assert abs(raw.imag) < 1e-12


class TestMeanAmplitude:
    def test_coherent_eigenvalue(self, dim63):
        rho = DensityMatrix.from_state(coherent_state(np.sqrt(3.3), dim63))
        assert abs(mean_amplitude(rho) - np.sqrt(3.3)) < 1e-8

    @pytest.mark.parametrize("parity", [CatParity.EVEN, CatParity.ODD])
    def test_cat_amplitude_cancels(self, parity, dim63):
        rho = DensityMatrix.from_state(cat_state(np.sqrt(5.0), parity, dim63))
        assert abs(mean_amplitude(rho)) < 1e-14

    def test_number_state(self):
        dim = FockDim(3)
        rho = DensityMatrix.from_state(fock_superposition([(1, 1.0)], dim))
        assert mean_amplitude(rho) == 0.0


class TestInvariantEnforcement:
    def test_state_norm_enforced(self):
        with pytest.raises(ValueError):
            StateVector(np.array([1.0, 0.5]), FockDim(1))

    def test_hermiticity_enforced(self):
        mat = np.array([[0.5, 0.1], [0.3, 0.5]], dtype=complex)
        with pytest.raises(ValueError):
            DensityMatrix(mat, FockDim(1))

    def test_trace_enforced(self):
        mat = np.diag([0.6, 0.6]).astype(complex)
        with pytest.raises(ValueError):
            DensityMatrix(mat, FockDim(1))

    def test_positivity_enforced(self):
        mat = np.diag([1.5, -0.5]).astype(complex)
        with pytest.raises(ValueError):
            DensityMatrix(mat, FockDim(1))

    def test_immutability(self, dim63):
        rho = DensityMatrix.from_state(coherent_state(1.0, dim63))
        with pytest.raises(ValueError):
            rho.elements[0, 0] = 2.0

    def test_dim_validation(self):
        with pytest.raises(ValueError):
            FockDim(0)
