"""Quantum channels as Kraus operator lists and their Choi representations."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .linalg import haar_unitary, max_entangled_state, partial_trace_x, partial_trace_y

TP_ATOL = 1e-10


@dataclass(frozen=True)
class KrausChannel:
    """A completely positive map given by a list of d_out x d_in Kraus operators."""

    kraus_ops: tuple = field()

    def __post_init__(self):
        ops = tuple(np.asarray(a, dtype=complex) for a in self.kraus_ops)
        if not ops:
            raise ValueError("a channel needs at least one Kraus operator")
        shape = ops[0].shape
        if len(shape) != 2 or any(a.shape != shape for a in ops):
            raise ValueError("Kraus operators must all share one 2-D shape")
        object.__setattr__(self, "kraus_ops", ops)

    @property
    def d_in(self) -> int:
        return self.kraus_ops[0].shape[1]

    @property
    def d_out(self) -> int:
        return self.kraus_ops[0].shape[0]

    @property
    def q(self) -> int:
        return len(self.kraus_ops)

    def is_trace_preserving(self, atol: float = TP_ATOL) -> bool:
        s = sum(a.conj().T @ a for a in self.kraus_ops)
        return bool(np.abs(s - np.eye(self.d_in)).max() <= atol)

    def apply(self, rho: np.ndarray) -> np.ndarray:
        rho = np.asarray(rho)
        return sum(a @ rho @ a.conj().T for a in self.kraus_ops)


@dataclass(frozen=True)
class ChoiMatrix:
    """d^2 x d^2 Choi matrix on Y (x) X, with the flags it is claimed to satisfy."""

    matrix: np.ndarray
    d: int
    flags: tuple = ()

    def check_flags(self, atol: float = TP_ATOL) -> None:
        j, d = self.matrix, self.d
        if "psd" in self.flags:
            if np.linalg.eigvalsh(j).min() < -atol:
                raise ValueError("Choi matrix flagged psd has a negative eigenvalue")
        if "tp" in self.flags:
            if np.abs(partial_trace_y(j, d, d) - np.eye(d)).max() > atol:
                raise ValueError("tr_Y(J) != I for a matrix flagged trace-preserving")
        if "unital" in self.flags:
            if np.abs(partial_trace_x(j, d, d) - np.eye(d)).max() > atol:
                raise ValueError("tr_X(J) != I for a matrix flagged unital")


def choi_from_kraus(ch: KrausChannel) -> np.ndarray:
    """Choi matrix J = sum_ij Phi(|i><j|) (x) |i><j| of a Kraus channel.

    Equals sum_k w_k w_k^dag with w_k the row-major flattening of the k-th
    Kraus operator, so rank(J) <= q and J is PSD.
    """
    if ch.d_in != ch.d_out:
        raise ValueError("Choi representation here assumes d_in == d_out")
    n = ch.d_in * ch.d_out
    j = np.zeros((n, n), dtype=complex)
    for a in ch.kraus_ops:
        w = a.reshape(n)
        j += np.outer(w, w.conj())
    return j


def apply_extended(ch: KrausChannel, state: np.ndarray) -> np.ndarray:
    """Apply (Phi (x) id_Z) to a state on X (x) Z.

    The state's first tensor factor must have dimension d_in; the second
    factor is untouched.
    """
    state = np.asarray(state, dtype=complex)
    if state.ndim != 2 or state.shape[0] != state.shape[1]:
        raise ValueError("state must be a square matrix")
    d_in = ch.d_in
    dz, rem = divmod(state.shape[0], d_in)
    if rem != 0:
        raise ValueError(
            f"state dimension {state.shape[0]} does not factor through d_in={d_in}"
        )
    out = np.zeros((ch.d_out * dz,) * 2, dtype=complex)
    eye_z = np.eye(dz)
    for a in ch.kraus_ops:
        ext = np.kron(a, eye_z)
        out += ext @ state @ ext.conj().T
    return out


def identity_channel(d: int) -> KrausChannel:
    return KrausChannel((np.eye(d, dtype=complex),))


def unitary_channel(u: np.ndarray) -> KrausChannel:
    return KrausChannel((np.asarray(u, dtype=complex),))


def depolarizing_channel(d: int) -> KrausChannel:
    """The completely depolarizing channel X -> tr(X) I/d."""
    ops = []
    for i in range(d):
        for j in range(d):
            e = np.zeros((d, d), dtype=complex)
            e[i, j] = 1.0 / np.sqrt(d)
            ops.append(e)
    return KrausChannel(tuple(ops))


def random_kraus_channel(d: int, q: int, seed: int) -> KrausChannel:
    """Random CPTP channel with q Kraus operators via a Haar isometry.

    The first d columns of a Haar unitary on C^(qd) are split into q blocks
    of size d x d, which satisfy sum A_i^dag A_i = I exactly.
    """
    if q < 1:
        raise ValueError("need at least one Kraus operator")
    w = haar_unitary(q * d, seed)[:, :d]
    ops = tuple(w[i * d : (i + 1) * d, :] for i in range(q))
    return KrausChannel(ops)


def choi_via_entangled_state(ch: KrausChannel) -> np.ndarray:
    """J(Phi) computed as d * (Phi (x) id)(|phi+><phi+|); oracle path."""
    d = ch.d_in
    return d * apply_extended(ch, max_entangled_state(d))
