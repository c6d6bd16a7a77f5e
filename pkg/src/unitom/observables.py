"""Interactive observables: complement bases, scaling, and POVM realization.

An interactive observable is a d^2 x d^2 Hermitian matrix H whose
expectation on a channel Phi is tr(H J(Phi)). When ||H||_op <= 1/d it is
realized operationally by sending half of a maximally entangled state
through the channel and measuring a binary POVM {P+, P-} on the output.

Observable sets are orthonormal bases of V^perp within an ambient
partial-trace-zero space Q, where V is a discriminating subspace; their
cardinality is dim(Q) - dim(V).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import null_space

from .linalg import (
    as_hermitian,
    hs_inner,
    max_entangled_state,
    operator_norm,
    partial_trace_x,
    partial_trace_y,
    swap_xy,
)
from .subspaces import (
    SubspaceBasis,
    build_high_rank,
    build_pos_eig,
    build_pos_eig_unital,
    build_rank3_unital,
    coords_to_hermitian,
    hermitian_coords,
)

MEMBERSHIP_ATOL = 1e-10
ORTHOGONALITY_ATOL = 1e-9
NORM_BOUND_ATOL = 1e-12

QUESTIONS = ("among_rank_q", "among_all", "among_unital")


@dataclass(frozen=True)
class AmbientSpace:
    """One of the two ambient Hermitian spaces with vanishing partial traces.

    ``Q_all`` demands tr_Y(H) = 0 (dimension d^4 - d^2); ``Q_unital``
    additionally demands tr_X(H) = 0 (dimension d^4 - 2d^2 + 1).
    """

    tag: str
    d: int

    def __post_init__(self):
        if self.tag not in ("Q_all", "Q_unital"):
            raise ValueError(f"unknown ambient tag {self.tag!r}")
        if self.d < 2:
            raise ValueError("d must be at least 2")

    @property
    def dim(self) -> int:
        d = self.d
        return d**4 - d**2 if self.tag == "Q_all" else d**4 - 2 * d**2 + 1

    def contains(self, h: np.ndarray, atol: float = MEMBERSHIP_ATOL) -> bool:
        d = self.d
        scale = 1.0 + float(np.abs(h).max())
        if float(np.abs(partial_trace_y(h, d, d)).max()) > atol * scale:
            return False
        if self.tag == "Q_unital":
            if float(np.abs(partial_trace_x(h, d, d)).max()) > atol * scale:
                return False
        return True

    def complement_generators(self) -> list:
        """Hermitian matrices spanning the orthogonal complement of Q.

        {I (x) M} for Q_all; additionally {N (x) I} for Q_unital (the two
        families overlap in I (x) I, which the downstream null-space
        computation absorbs).
        """
        d = self.d
        eye = np.eye(d)
        gens = [np.kron(eye, m) for m in hermitian_matrix_basis(d)]
        if self.tag == "Q_unital":
            gens.extend(np.kron(m, eye) for m in hermitian_matrix_basis(d))
        return gens


def hermitian_matrix_basis(n: int) -> list:
    """The n^2 standard Hermitian basis matrices of size n."""
    basis = []
    for a in range(n):
        e = np.zeros((n, n), dtype=complex)
        e[a, a] = 1.0
        basis.append(e)
    for a in range(n):
        for b in range(a + 1, n):
            e = np.zeros((n, n), dtype=complex)
            e[a, b] = e[b, a] = 1.0
            basis.append(e)
            f = np.zeros((n, n), dtype=complex)
            f[a, b] = 1j
            f[b, a] = -1j
            basis.append(f)
    return basis


def ambient_complement_basis(v, ambient: AmbientSpace) -> list:
    """Orthonormal (HS) basis of V^perp within the ambient space.

    ``v`` is a SubspaceBasis or an iterable of Hermitian matrices, each of
    which must already lie in the ambient space. The complement is the
    full-space orthogonal complement of span(V union Q^perp), so its
    cardinality is dim(Q) - |V|; a mismatch signals dependent input and
    raises.
    """
    elements = list(v.elements) if isinstance(v, SubspaceBasis) else list(v)
    n = ambient.d ** 2
    for h in elements:
        if not ambient.contains(h):
            raise ValueError("subspace element violates ambient membership")
    rows = [hermitian_coords(h) for h in elements]
    rows.extend(hermitian_coords(g) for g in ambient.complement_generators())
    null = null_space(np.stack(rows))
    expected = ambient.dim - len(elements)
    if null.shape[1] != expected:
        raise ValueError(
            f"complement dimension {null.shape[1]} != expected {expected}; "
            "the subspace elements are not independent inside the ambient space"
        )
    return [coords_to_hermitian(col, n) for col in null.T]


def scale_to_unit(h: np.ndarray) -> tuple:
    """Rescale so the operator norm is exactly 1/d; returns (H/c, c = d*||H||)."""
    h = np.asarray(h)
    n = h.shape[0]
    d = round(np.sqrt(n))
    if d * d != n:
        raise ValueError(f"matrix size {n} is not a perfect square")
    norm = operator_norm(h)
    if norm == 0.0:
        raise ValueError("cannot scale the zero matrix")
    c = d * norm
    return h / c, c


@dataclass(frozen=True)
class ObservableDecomposition:
    """Operational realization of a norm-bounded interactive observable."""

    xi: np.ndarray
    p_plus: np.ndarray
    p_minus: np.ndarray
    q_plus: np.ndarray
    q_minus: np.ndarray


def decompose_observable(h: np.ndarray) -> ObservableDecomposition:
    """Input state and binary POVM realizing a bounded observable.

    Requires ||H||_op <= 1/d. With H = H+ - H- the positive/negative
    parts, the interactive measurement is
    Q_pm = H_pm + (I/d - H+ - H-)/2, and the output POVM is P_pm = d*Q_pm:
    the output state (Phi (x) id)(xi) equals J(Phi)/d entry for entry under
    the row-major pairing of the reference system, so
    tr(P_pm rho_out) = tr(Q_pm J(Phi)) holds identically.
    """
    h = as_hermitian(h)
    n = h.shape[0]
    d = round(np.sqrt(n))
    if d * d != n:
        raise ValueError(f"matrix size {n} is not a perfect square")
    if operator_norm(h) > 1.0 / d + NORM_BOUND_ATOL:
        raise ValueError("observable exceeds the operator-norm bound 1/d")
    evals, vecs = np.linalg.eigh(h)
    pos = np.where(evals > NORM_BOUND_ATOL, evals, 0.0)
    neg = np.where(evals < -NORM_BOUND_ATOL, -evals, 0.0)
    h_plus = (vecs * pos) @ vecs.conj().T
    h_minus = (vecs * neg) @ vecs.conj().T
    slack = (np.eye(n) / d - h_plus - h_minus) / 2
    q_plus = h_plus + slack
    q_minus = h_minus + slack
    return ObservableDecomposition(
        xi=max_entangled_state(d),
        p_plus=d * q_plus,
        p_minus=d * q_minus,
        q_plus=q_plus,
        q_minus=q_minus,
    )


@dataclass(frozen=True)
class InteractiveObservable:
    """Hermitian H with scale c (||H/c||_op = 1/d) and the POVM for H/c."""

    h: np.ndarray
    scale: float
    decomposition: ObservableDecomposition

    @classmethod
    def from_hermitian(cls, h: np.ndarray) -> "InteractiveObservable":
        h = as_hermitian(h)
        h_scaled, c = scale_to_unit(h)
        return cls(h=h, scale=c, decomposition=decompose_observable(h_scaled))


def expectation(h: np.ndarray, j: np.ndarray) -> float:
    """Expectation tr(H J) of measuring observable H on a Choi matrix J."""
    return hs_inner(h, j)


@dataclass(frozen=True)
class ObservableSet:
    """Ordered interactive observables discriminating a channel class."""

    observables: tuple
    d: int
    q: int
    question: str
    seed: int
    ambient: AmbientSpace
    subspace: SubspaceBasis | None = None

    def __len__(self) -> int:
        return len(self.observables)

    def raw_matrices(self) -> np.ndarray:
        return np.stack([o.h for o in self.observables])


def _select_subspace(d: int, q: int, question: str, seed: int):
    """Discriminating subspace and ambient space for a tomography question."""
    if question == "among_rank_q":
        if q == 1:
            return build_rank3_unital(d, seed), AmbientSpace("Q_unital", d)
        basis = build_high_rank(d, q, seed)
        # built with tr_X = 0; reorient into the tr_Y = 0 ambient space
        swapped = SubspaceBasis(
            basis.kind,
            tuple(swap_xy(h, d) for h in basis.elements),
            basis.claimed_dim,
            basis.seed,
        )
        return swapped, AmbientSpace("Q_all", d)
    if question == "among_all":
        return build_pos_eig(d, q, seed), AmbientSpace("Q_all", d)
    if question == "among_unital":
        return build_pos_eig_unital(d, q, seed), AmbientSpace("Q_unital", d)
    raise ValueError(f"unknown question {question!r}")


def build_observable_set(d: int, q: int, question: str, seed: int) -> ObservableSet:
    """Interactive observables answering a tomography question at (d, q).

    ``among_rank_q``: identify channels with at most q Kraus operators;
    ``among_all``: distinguish such channels from all channels;
    ``among_unital``: distinguish them among unital channels.
    """
    basis, ambient = _select_subspace(d, q, question, seed)
    complement = ambient_complement_basis(basis, ambient)
    observables = tuple(InteractiveObservable.from_hermitian(h) for h in complement)
    return ObservableSet(
        observables=observables,
        d=d,
        q=q,
        question=question,
        seed=seed,
        ambient=ambient,
        subspace=basis,
    )


def clifford_set_d2() -> ObservableSet:
    """The six local Clifford observables for unitary tomography at d = 2."""
    x = np.array([[0, 1], [1, 0]], dtype=complex)
    y = np.array([[0, -1j], [1j, 0]], dtype=complex)
    z = np.array([[1, 0], [0, -1]], dtype=complex)
    had = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
    s = np.array([[1, 0], [0, 1j]], dtype=complex)
    sd = s.conj().T
    ops = (
        np.kron(x, z),
        np.kron(had, y),
        np.kron((1 - 1j) * sd @ had @ s, s @ x),
        np.kron(y, z),
        np.kron(z @ had @ z, x),
        np.kron((1 - 1j) * s @ had @ sd, x @ s),
    )
    observables = tuple(InteractiveObservable.from_hermitian(o) for o in ops)
    return ObservableSet(
        observables=observables,
        d=2,
        q=1,
        question="among_rank_q",
        seed=0,
        ambient=AmbientSpace("Q_unital", 2),
        subspace=None,
    )
