import numpy as np
import pytest

from conftest import make_random_bath
from qbm import (
    DiscretizedBath,
    ModelParams,
    Spectrum,
    build_bath,
    dense_diagonalize_oracle,
    eigenvector_overlap,
    hamiltonian_matrix,
    overlap_matrix,
    secular_residual,
    solve_spectrum,
)
from qbm.errors import PoleEvaluation, RootNotBracketed


def moment_residuals(spec):
    """(|sum w - 1|, |sum a w - Omega|, relative second-moment residual)."""
    m2 = spec.omega0**2 + float(np.sum(spec.bath.couplings**2))
    return (
        abs(float(np.sum(spec.weights)) - 1.0),
        abs(float(spec.alphas @ spec.weights) - spec.omega0),
        abs(float(spec.alphas**2 @ spec.weights) - m2) / m2,
    )


class TestSecularResidual:
    def test_hand_value(self):
        bath = build_bath(ModelParams.explicit([1.0], [0.1]))
        # F(1.2) = 0.2 - 0.01/0.2
        assert secular_residual(1.2, bath, 1.0) == pytest.approx(0.15, rel=1e-15)

    def test_monotone_between_poles(self, ref_bath):
        xs = np.linspace(1.0006, 1.0174, 40)  # inside (omega_50, omega_51)
        vals = [secular_residual(x, ref_bath, 1.0) for x in xs]
        assert np.all(np.diff(vals) > 0.0)

    def test_pole_rejected(self, ref_bath):
        with pytest.raises(PoleEvaluation):
            secular_residual(float(ref_bath.omegas[10]), ref_bath, 1.0)


class TestTwoLevel:
    def test_symmetric_splitting(self, two_level):
        # resonant mode, g = 0.1: alpha = Omega -+ g, weights 1/2 each
        np.testing.assert_allclose(two_level.alphas, [0.9, 1.1], atol=1e-13)
        np.testing.assert_allclose(two_level.weights, [0.5, 0.5], atol=1e-13)

    def test_detuned_golden_ratio(self):
        # omega0 = 0, omega = 1, g = 1: alpha^2 - alpha - 1 = 0
        bath = build_bath(ModelParams.explicit([1.0], [1.0]))
        spec = solve_spectrum(bath, 0.0)
        golden = (1.0 + np.sqrt(5.0)) / 2.0
        np.testing.assert_allclose(
            spec.alphas, [1.0 - golden, golden], rtol=1e-14
        )
        # w = 1/(1 + 1/(alpha-1)^2) evaluated at the analytic roots
        want_w = 1.0 / (1.0 + 1.0 / (spec.alphas - 1.0) ** 2)
        np.testing.assert_allclose(spec.weights, want_w, rtol=1e-12)
        assert spec.weights[0] == pytest.approx(0.7236067977499789, rel=1e-12)

    def test_overlap_component(self):
        bath = build_bath(ModelParams.explicit([1.0], [1.0]))
        spec = solve_spectrum(bath, 0.0)
        assert eigenvector_overlap(spec, n=1, nu=0) == pytest.approx(
            -0.5257311121191336, rel=1e-12
        )

    def test_overlap_bounds(self, two_level):
        with pytest.raises(IndexError):
            eigenvector_overlap(two_level, n=0, nu=0)
        with pytest.raises(IndexError):
            eigenvector_overlap(two_level, n=2, nu=0)
        with pytest.raises(IndexError):
            eigenvector_overlap(two_level, n=1, nu=2)


class TestReferenceSpectrum:
    def test_interlacing(self, ref_spectrum, ref_bath):
        al = ref_spectrum.alphas
        om = ref_bath.omegas
        assert np.all(np.diff(al) > 0.0)
        assert np.all(al[:-1] < om)
        assert np.all(om < al[1:])

    def test_moment_sum_rules(self, ref_spectrum):
        r0, r1, r2 = moment_residuals(ref_spectrum)
        assert r0 <= 1e-12
        assert r1 <= 1e-10
        assert r2 <= 1e-9

    def test_against_dense_oracle(self, ref_spectrum, ref_bath):
        oracle = dense_diagonalize_oracle(ref_bath, 1.0)
        np.testing.assert_allclose(
            ref_spectrum.alphas, oracle.alphas, rtol=0.0, atol=1e-12
        )
        np.testing.assert_allclose(
            ref_spectrum.weights, oracle.weights, rtol=0.0, atol=1e-10
        )

    def test_roots_certified_by_sign_change(self, ref_spectrum, ref_bath):
        # each root carries a sign change of F in its immediate vicinity
        for a in ref_spectrum.alphas:
            h = 1e-9 * max(1.0, abs(a))
            assert secular_residual(a - h, ref_bath, 1.0) < 0.0
            assert secular_residual(a + h, ref_bath, 1.0) > 0.0

    def test_weights_in_range(self, ref_spectrum):
        assert np.all(ref_spectrum.weights > 0.0)
        assert np.all(ref_spectrum.weights <= 1.0)

    def test_tau_omega(self, ref_spectrum):
        assert ref_spectrum.tau_omega == pytest.approx(2.0 * np.pi, rel=1e-15)


class TestOverlapMatrix:
    def test_orthonormal_rows(self, ref_spectrum):
        c = overlap_matrix(ref_spectrum)
        gram = c @ c.T
        np.testing.assert_allclose(gram, np.eye(101), atol=1e-10)

    def test_column_zero_is_root_weight(self, ref_spectrum):
        c = overlap_matrix(ref_spectrum)
        np.testing.assert_allclose(
            c[:, 0], np.sqrt(ref_spectrum.weights), rtol=1e-15
        )

    def test_completeness_of_columns(self, ref_spectrum):
        c = overlap_matrix(ref_spectrum)
        np.testing.assert_allclose(c.T @ c, np.eye(101), atol=1e-10)


class TestRandomBaths:
    def test_properties_over_seeded_draws(self):
        rng = np.random.default_rng(20240817)
        for _ in range(20):
            n = int(rng.integers(1, 13))
            bath = make_random_bath(rng, n)
            omega0 = float(rng.uniform(0.5, 1.5))
            spec = solve_spectrum(bath, omega0)

            al, om = spec.alphas, bath.omegas
            assert np.all(np.diff(al) > 0.0)
            assert np.all(al[:-1] < om) and np.all(om < al[1:])

            r0, r1, r2 = moment_residuals(spec)
            assert max(r0, r1, r2) <= 1e-10

            oracle = dense_diagonalize_oracle(bath, omega0)
            np.testing.assert_allclose(al, oracle.alphas, atol=1e-9)
            np.testing.assert_allclose(
                spec.weights, oracle.weights, rtol=0.0, atol=1e-9
            )

    def test_far_detuned_outer_root(self):
        # system level far above the band: top root must still be found
        bath = build_bath(ModelParams.explicit([0.2, 0.3, 0.4], [0.05, 0.05, 0.05]))
        spec = solve_spectrum(bath, 5.0)
        assert spec.alphas[-1] > 4.9
        r0, _, _ = moment_residuals(spec)
        assert r0 <= 1e-12

    def test_strong_coupling_single_mode(self):
        bath = build_bath(ModelParams.explicit([1.0], [5.0]))
        spec = solve_spectrum(bath, 1.0)
        np.testing.assert_allclose(spec.alphas, [-4.0, 6.0], rtol=1e-13)
        np.testing.assert_allclose(spec.weights, [0.5, 0.5], rtol=1e-13)


class TestSpectrumValidation:
    def test_reordered_eigenvalues_rejected(self, ref_bath):
        spec = solve_spectrum(ref_bath, 1.0)
        with pytest.raises(RootNotBracketed):
            Spectrum(
                alphas=spec.alphas[::-1],
                weights=spec.weights,
                omega0=1.0,
                bath=ref_bath,
            )

    def test_non_interlacing_rejected(self, two_level):
        with pytest.raises(RootNotBracketed):
            Spectrum(
                alphas=np.array([1.05, 1.1]),  # both above the single pole
                weights=np.array([0.5, 0.5]),
                omega0=1.0,
                bath=two_level.bath,
            )

    def test_dense_oracle_size_guard(self):
        omegas = np.linspace(0.1, 5.0, 2001)
        bath = DiscretizedBath(omegas, np.full(2001, 0.01))
        with pytest.raises(ValueError):
            dense_diagonalize_oracle(bath, 1.0)


class TestDenseOracle:
    def test_matches_matrix_eigensystem(self, two_level):
        oracle = dense_diagonalize_oracle(two_level.bath, 1.0)
        h = hamiltonian_matrix(two_level.bath, 1.0)
        vals = np.linalg.eigvalsh(h)
        np.testing.assert_allclose(oracle.alphas, vals, rtol=1e-15)
        np.testing.assert_allclose(oracle.weights, [0.5, 0.5], atol=1e-14)
