"""Tests for observable construction, scaling, and POVM decomposition."""

import numpy as np
import pytest

from unitom.channels import (
    apply_extended,
    choi_from_kraus,
    random_kraus_channel,
    unitary_channel,
)
from unitom.linalg import haar_unitary, hs_inner, max_entangled_state, operator_norm
from unitom.observables import (
    AmbientSpace,
    InteractiveObservable,
    ambient_complement_basis,
    build_observable_set,
    clifford_set_d2,
    decompose_observable,
    expectation,
    hermitian_matrix_basis,
    scale_to_unit,
)
from unitom.subspaces import build_rank3_unital, hermitian_coords

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)


class TestAmbientSpace:
    def test_dimensions(self):
        assert AmbientSpace("Q_all", 2).dim == 12
        assert AmbientSpace("Q_unital", 2).dim == 9
        assert AmbientSpace("Q_all", 3).dim == 72
        assert AmbientSpace("Q_unital", 3).dim == 64

    def test_membership(self):
        q_all = AmbientSpace("Q_all", 2)
        q_uni = AmbientSpace("Q_unital", 2)
        xz = np.kron(PAULI_X, PAULI_Z)
        assert q_all.contains(xz) and q_uni.contains(xz)
        # I (x) Z is traceless on neither marginal pattern required
        iz = np.kron(np.eye(2), PAULI_Z)
        assert not q_all.contains(iz)

    def test_generators_orthogonal_to_members(self):
        q = AmbientSpace("Q_unital", 2)
        member = np.kron(PAULI_X, PAULI_Z)
        for g in q.complement_generators():
            assert abs(hs_inner(g, member)) < 1e-12

    def test_bad_tag(self):
        with pytest.raises(ValueError, match="ambient"):
            AmbientSpace("Q_other", 2)


class TestAmbientComplementBasis:
    def test_empty_subspace_gives_full_ambient(self):
        basis = ambient_complement_basis([], AmbientSpace("Q_all", 2))
        assert len(basis) == 12

    def test_explicit_d2_count(self):
        v = build_rank3_unital(2, seed=0)
        basis = ambient_complement_basis(v, AmbientSpace("Q_unital", 2))
        assert len(basis) == 6

    def test_d3_count(self):
        v = build_rank3_unital(3, seed=1)
        basis = ambient_complement_basis(v, AmbientSpace("Q_unital", 3))
        assert len(basis) == 26

    def test_orthonormal_and_orthogonal_to_subspace(self):
        v = build_rank3_unital(2, seed=0)
        ambient = AmbientSpace("Q_unital", 2)
        basis = ambient_complement_basis(v, ambient)
        coords = np.stack([hermitian_coords(h) for h in basis])
        assert np.allclose(coords @ coords.T, np.eye(len(basis)), atol=1e-12)
        for h in basis:
            assert ambient.contains(h)
            for elem in v.elements:
                assert abs(hs_inner(h, elem)) < 1e-9

    def test_membership_violation_raises(self):
        with pytest.raises(ValueError, match="membership"):
            ambient_complement_basis([np.eye(4)], AmbientSpace("Q_all", 2))

    def test_dependent_subspace_raises(self):
        v = build_rank3_unital(2, seed=0)
        doubled = list(v.elements) + [v.elements[0]]
        with pytest.raises(ValueError, match="not independent"):
            ambient_complement_basis(doubled, AmbientSpace("Q_unital", 2))


class TestScaleToUnit:
    def test_identity(self):
        scaled, c = scale_to_unit(np.eye(4, dtype=complex))
        assert c == pytest.approx(2.0)
        assert np.allclose(scaled, np.eye(4) / 2)

    def test_pauli_tensor(self):
        scaled, c = scale_to_unit(np.kron(PAULI_X, PAULI_Z))
        assert c == pytest.approx(2.0)
        assert operator_norm(scaled) == pytest.approx(0.5)

    def test_idempotent(self):
        scaled, _ = scale_to_unit(np.kron(PAULI_X, PAULI_Z))
        again, c2 = scale_to_unit(scaled)
        assert c2 == pytest.approx(1.0)
        assert np.allclose(again, scaled)

    def test_zero_matrix(self):
        with pytest.raises(ValueError, match="zero"):
            scale_to_unit(np.zeros((4, 4)))


class TestDecomposeObservable:
    def test_zero_observable_is_fair_coin(self):
        dec = decompose_observable(np.zeros((4, 4), dtype=complex))
        assert np.allclose(dec.p_plus, np.eye(4) / 2)
        assert np.allclose(dec.p_minus, np.eye(4) / 2)
        assert np.allclose(dec.xi, max_entangled_state(2))

    def test_povm_validity(self):
        h, _ = scale_to_unit(np.kron(PAULI_X, PAULI_Z))
        dec = decompose_observable(h)
        for p in (dec.p_plus, dec.p_minus):
            assert np.linalg.eigvalsh(p).min() >= -1e-10
        assert np.allclose(dec.p_plus + dec.p_minus, np.eye(4), atol=1e-10)
        assert np.allclose(dec.q_plus + dec.q_minus, np.eye(4) / 2, atol=1e-12)

    def test_pauli_tensor_q_spectrum(self):
        h, _ = scale_to_unit(np.kron(PAULI_X, PAULI_Z))
        dec = decompose_observable(h)
        evals = np.sort(np.linalg.eigvalsh(dec.q_plus))
        for lam in evals:
            assert min(abs(lam), abs(lam - 0.5), abs(lam - 0.25)) < 1e-12

    def test_norm_bound_enforced(self):
        with pytest.raises(ValueError, match="norm"):
            decompose_observable(np.kron(PAULI_X, PAULI_Z))  # norm 1 > 1/2

    def test_expectation_identity_random_pairs(self):
        # both paths computed independently for 100 random (H, channel) pairs
        rng = np.random.default_rng(0)
        for d in (2, 3):
            n = d * d
            for trial in range(50):
                a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
                h, _ = scale_to_unit((a + a.conj().T) / 2)
                dec = decompose_observable(h)
                ch = random_kraus_channel(d, int(rng.integers(1, 4)), seed=trial)
                j = choi_from_kraus(ch)
                rho = apply_extended(ch, dec.xi)
                povm = (
                    np.trace(dec.p_plus @ rho).real - np.trace(dec.p_minus @ rho).real
                )
                assert abs(povm - hs_inner(h, j)) < 1e-10


class TestExpectation:
    def test_uniform_observable_on_tp_channel(self):
        for d in (2, 3):
            ch = random_kraus_channel(d, 2, seed=3)
            j = choi_from_kraus(ch)
            h = np.eye(d * d) / d**2
            assert expectation(h, j) == pytest.approx(1.0 / d, abs=1e-12)


class TestBuildObservableSet:
    @pytest.mark.parametrize(
        "d,q,question,count",
        [
            (2, 1, "among_rank_q", 6),
            (3, 1, "among_rank_q", 26),
            (2, 1, "among_all", 10),
            (3, 1, "among_all", 32),
            (2, 1, "among_unital", 7),
            (3, 1, "among_unital", 28),
            (3, 2, "among_rank_q", 48),
        ],
    )
    def test_counts(self, d, q, question, count):
        obs_set = build_observable_set(d, q, question, seed=7)
        assert len(obs_set) == count

    def test_observables_orthogonal_to_subspace(self):
        obs_set = build_observable_set(3, 1, "among_all", seed=2)
        for o in obs_set.observables:
            assert obs_set.ambient.contains(o.h)
            for elem in obs_set.subspace.elements:
                assert abs(hs_inner(o.h, elem)) < 1e-9

    def test_rank_q_reorientation(self):
        # for q >= 2 the high-rank subspace is swapped into tr_Y = 0 form
        obs_set = build_observable_set(3, 2, "among_rank_q", seed=2)
        assert obs_set.ambient.tag == "Q_all"
        for elem in obs_set.subspace.elements:
            assert obs_set.ambient.contains(elem)

    def test_deterministic_per_seed(self):
        a = build_observable_set(2, 1, "among_all", seed=5)
        b = build_observable_set(2, 1, "among_all", seed=5)
        for x, y in zip(a.observables, b.observables):
            assert np.array_equal(x.h, y.h)

    def test_unknown_question(self):
        with pytest.raises(ValueError, match="question"):
            build_observable_set(2, 1, "among_bogus", seed=0)

    def test_scaling_invariance_of_difference_pattern(self):
        # positive rescaling never changes which components differ
        obs_set = build_observable_set(2, 1, "among_rank_q", seed=1)
        ch_a = unitary_channel(haar_unitary(2, 1))
        ch_b = unitary_channel(haar_unitary(2, 2))
        ja, jb = choi_from_kraus(ch_a), choi_from_kraus(ch_b)
        diff = np.array([hs_inner(o.h, ja - jb) for o in obs_set.observables])
        scaled_diff = np.array(
            [hs_inner(3.7 * o.h, ja - jb) for o in obs_set.observables]
        )
        assert np.array_equal(np.abs(diff) > 1e-10, np.abs(scaled_diff) > 1e-10)


class TestCliffordSet:
    def test_six_hermitian_traceless_observables(self):
        cs = clifford_set_d2()
        assert len(cs) == 6
        ambient = AmbientSpace("Q_unital", 2)
        for o in cs.observables:
            assert np.allclose(o.h, o.h.conj().T, atol=1e-14)
            assert ambient.contains(o.h)

    def test_orthogonal_to_explicit_basis(self):
        cs = clifford_set_d2()
        v = build_rank3_unital(2, seed=0)
        for o in cs.observables:
            for elem in v.elements:
                assert abs(hs_inner(o.h, elem)) < 1e-12

    def test_linearly_independent(self):
        coords = np.stack([hermitian_coords(o.h) for o in clifford_set_d2().observables])
        s = np.linalg.svd(coords, compute_uv=False)
        assert s[-1] > 1e-9 * s[0]

    def test_spans_computed_complement(self):
        cs = clifford_set_d2()
        comp = ambient_complement_basis(
            build_rank3_unital(2, seed=0), AmbientSpace("Q_unital", 2)
        )
        a = np.stack([hermitian_coords(h) for h in comp])
        b = np.stack([hermitian_coords(o.h) for o in cs.observables])
        proj_a = a.T @ a  # rows of a are orthonormal
        assert np.abs(b - b @ proj_a).max() < 1e-10
        bq, _ = np.linalg.qr(b.T)
        assert np.abs(a - a @ (bq @ bq.T)).max() < 1e-10


def test_hermitian_matrix_basis_spans():
    basis = hermitian_matrix_basis(3)
    assert len(basis) == 9
    coords = np.stack([hermitian_coords(m) for m in basis])
    assert np.linalg.matrix_rank(coords) == 9


def test_interactive_observable_from_hermitian():
    obs = InteractiveObservable.from_hermitian(np.kron(PAULI_X, PAULI_Z))
    assert obs.scale == pytest.approx(2.0)
    assert operator_norm(obs.h / obs.scale) == pytest.approx(0.5)
