"""Tests for measurement simulation and channel reconstruction."""

import numpy as np
import pytest

from unitom.channels import (
    choi_from_kraus,
    identity_channel,
    random_kraus_channel,
    unitary_channel,
)
from unitom.linalg import haar_unitary
from unitom.observables import build_observable_set, clifford_set_d2
from unitom.tomography import (
    ExpectationVector,
    ExperimentConfig,
    discriminate_pair,
    measure_exact,
    measure_operational,
    measure_sampled,
    process_fidelity,
    reconstruct_choi,
    reconstruct_unitary,
    run_experiment,
)

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)


@pytest.fixture(scope="module")
def set_d2():
    return build_observable_set(2, 1, "among_rank_q", seed=7)


@pytest.fixture(scope="module")
def set_d3():
    return build_observable_set(3, 1, "among_rank_q", seed=7)


class TestExpectationVector:
    def test_validation(self):
        with pytest.raises(ValueError, match="mode"):
            ExpectationVector(values=[0.0], mode="weird")
        with pytest.raises(ValueError, match="shots"):
            ExpectationVector(values=[0.0], mode="sampled")

    def test_values_bounded_by_scale(self, set_d2):
        vec = measure_exact(set_d2, unitary_channel(haar_unitary(2, 3)))
        scales = np.array([o.scale for o in set_d2.observables])
        assert np.all(np.abs(vec.values) <= scales + 1e-9)


class TestMeasureExact:
    def test_dual_path_agreement(self, set_d2):
        ch = identity_channel(2)
        exact = measure_exact(set_d2, ch).values
        operational = measure_operational(set_d2, ch).values
        assert np.abs(exact - operational).max() < 1e-10

    def test_equal_channels_equal_vectors(self, set_d3):
        u = haar_unitary(3, 5)
        va = measure_exact(set_d3, unitary_channel(u)).values
        vb = measure_exact(set_d3, unitary_channel(u)).values
        assert np.array_equal(va, vb)

    def test_distinct_unitaries_differ(self, set_d2):
        va = measure_exact(set_d2, unitary_channel(haar_unitary(2, 1))).values
        vb = measure_exact(set_d2, unitary_channel(haar_unitary(2, 2))).values
        assert np.abs(va - vb).max() > 1e-8

    def test_dimension_mismatch(self, set_d2):
        with pytest.raises(ValueError, match="match"):
            measure_exact(set_d2, identity_channel(3))


class TestMeasureSampled:
    def test_deterministic_per_seed(self, set_d2):
        ch = unitary_channel(haar_unitary(2, 0))
        a = measure_sampled(set_d2, ch, shots=100, seed=3).values
        b = measure_sampled(set_d2, ch, shots=100, seed=3).values
        assert np.array_equal(a, b)

    def test_converges_to_exact(self, set_d2):
        ch = unitary_channel(haar_unitary(2, 4))
        exact = measure_exact(set_d2, ch).values
        shots = 10**6
        sampled = measure_sampled(set_d2, ch, shots=shots, seed=1).values
        for o, e, s in zip(set_d2.observables, exact, sampled):
            stderr = o.scale / np.sqrt(shots)
            assert abs(e - s) < 5 * stderr

    def test_requires_positive_shots(self, set_d2):
        with pytest.raises(ValueError, match="shots"):
            measure_sampled(set_d2, identity_channel(2), shots=0, seed=0)


class TestDiscriminatePair:
    def test_same_channel_false(self, set_d2):
        u = haar_unitary(2, 7)
        assert not discriminate_pair(
            set_d2, unitary_channel(u), unitary_channel(u), tol=1e-8
        )

    def test_global_phase_false(self, set_d2):
        u = haar_unitary(2, 8)
        assert not discriminate_pair(
            set_d2,
            unitary_channel(u),
            unitary_channel(np.exp(0.73j) * u),
            tol=1e-8,
        )

    def test_identity_vs_bit_flip_true(self, set_d2):
        assert discriminate_pair(
            set_d2, identity_channel(2), unitary_channel(PAULI_X), tol=1e-8
        )

    def test_clifford_set_discriminates(self):
        cs = clifford_set_d2()
        assert discriminate_pair(
            cs, identity_channel(2), unitary_channel(PAULI_X), tol=1e-8
        )


class TestGradient:
    def test_matches_finite_differences(self):
        # directional derivative of the objective along random tangent
        # directions vs central differences
        from unitom.observables import hermitian_matrix_basis
        from unitom.tomography import _objective

        rng = np.random.default_rng(0)
        for d in (2, 3):
            obs_set = build_observable_set(d, 1, "among_rank_q", seed=1)
            hs = obs_set.raw_matrices()
            target = measure_exact(obs_set, unitary_channel(haar_unitary(d, 9))).values
            for trial in range(25):
                u = haar_unitary(d, 100 + trial)
                a = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
                a = (a + a.conj().T) / 2
                _, res, hw = _objective(hs, target, u)
                v = (1j * a @ u).reshape(-1)
                analytic = float(
                    np.sum(2.0 * res * (2.0 * (hw @ v.conj()).real))
                )
                eps = 1e-5
                from scipy.linalg import expm

                f_plus, _, _ = _objective(hs, target, expm(1j * eps * a) @ u)
                f_minus, _, _ = _objective(hs, target, expm(-1j * eps * a) @ u)
                numeric = (f_plus - f_minus) / (2 * eps)
                assert numeric == pytest.approx(
                    analytic, rel=1e-4, abs=1e-7
                )


class TestReconstructUnitary:
    def test_identity_target(self, set_d2):
        target = measure_exact(set_d2, identity_channel(2))
        result = reconstruct_unitary(set_d2, target, seed=1, truth=np.eye(2))
        assert result.converged
        assert result.residual < 1e-10
        assert result.fidelity_to_truth > 1 - 1e-6

    def test_objective_zero_at_truth(self, set_d3):
        u = haar_unitary(3, 11)
        target = measure_exact(set_d3, unitary_channel(u))
        from unitom.tomography import _objective

        f, _, _ = _objective(set_d3.raw_matrices(), target.values, u)
        assert f < 1e-18

    def test_recovers_random_truths(self, set_d2):
        for trial in range(10):
            u = haar_unitary(2, 300 + trial)
            target = measure_exact(set_d2, unitary_channel(u))
            result = reconstruct_unitary(set_d2, target, seed=trial, truth=u)
            assert result.fidelity_to_truth >= 1 - 1e-6

    def test_corrupted_target_fails_to_fit(self, set_d2):
        u = haar_unitary(2, 55)
        values = measure_exact(set_d2, unitary_channel(u)).values.copy()
        values[0] += 0.5
        target = ExpectationVector(values=values)
        result = reconstruct_unitary(set_d2, target, seed=0, restarts=5)
        assert not result.converged or result.residual > 1e-9

    def test_length_mismatch(self, set_d2):
        with pytest.raises(ValueError, match="length"):
            reconstruct_unitary(set_d2, ExpectationVector(values=[0.0]), seed=0)


class TestProcessFidelity:
    def test_phase_invariance(self):
        u = haar_unitary(3, 1)
        assert process_fidelity(u, np.exp(1.2j) * u) == pytest.approx(1.0)

    def test_orthogonal_unitaries(self):
        assert process_fidelity(np.eye(2), PAULI_X) == pytest.approx(0.0)


class TestReconstructChoi:
    def test_satisfies_constraints(self):
        obs_set = build_observable_set(2, 1, "among_all", seed=3)
        ch = unitary_channel(haar_unitary(2, 17))
        target = measure_exact(obs_set, ch)
        j, residual = reconstruct_choi(obs_set, target, max_iters=2000)
        assert residual < 1e-6
        assert np.linalg.eigvalsh(j).min() > -1e-8
        from unitom.linalg import partial_trace_y

        assert np.abs(partial_trace_y(j, 2, 2) - np.eye(2)).max() < 1e-6


class TestRunExperiment:
    def test_discrimination_rate(self):
        report = run_experiment(
            ExperimentConfig(mode="discriminate", d=2, trials=20, seed=3)
        )
        assert report.success_rate == 1.0
        assert len(report.outcomes) == 20

    def test_reconstruction_rate(self):
        report = run_experiment(
            ExperimentConfig(mode="reconstruct", d=2, trials=5, seed=3)
        )
        assert report.success_rate == 1.0

    def test_zero_trials(self):
        report = run_experiment(
            ExperimentConfig(mode="discriminate", d=2, trials=0, seed=3)
        )
        assert report.success_rate is None
        assert report.outcomes == ()

    def test_config_validation(self):
        with pytest.raises(ValueError, match="mode"):
            ExperimentConfig(mode="bogus", d=2)
        with pytest.raises(ValueError, match="trials"):
            ExperimentConfig(mode="discriminate", d=2, trials=-1)

    def test_deterministic(self):
        a = run_experiment(ExperimentConfig(mode="discriminate", d=2, trials=5, seed=9))
        b = run_experiment(ExperimentConfig(mode="discriminate", d=2, trials=5, seed=9))
        assert a.outcomes == b.outcomes
