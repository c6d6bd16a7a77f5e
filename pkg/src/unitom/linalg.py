"""Dense complex linear algebra on bipartite matrices.

All square matrices of size d*d are interpreted with tensor-factor order
Y (x) X: the matrix is a d x d grid of d x d blocks, blocks indexed by the
output system Y and block contents living on the input system X.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

#: Maximum relative deviation |H - H^dag| tolerated when a matrix is
#: promoted to Hermitian; below this the matrix is exactly symmetrized.
HERMITIAN_ATOL = 1e-12


def as_hermitian(m, atol: float = HERMITIAN_ATOL) -> np.ndarray:
    """Validate that ``m`` is (numerically) Hermitian and symmetrize it.

    Returns (m + m^dag)/2 exactly, so downstream code can rely on
    H == H.conj().T holding to the last bit.

    Raises
    ------
    ValueError
        If ``m`` is not square, contains non-finite entries, or deviates
        from Hermiticity by more than ``atol * (1 + max|m|)``.
    """
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix contains NaN or Inf entries")
    scale = 1.0 + float(np.abs(a).max()) if a.size else 1.0
    dev = float(np.abs(a - a.conj().T).max()) if a.size else 0.0
    if dev > atol * scale:
        raise ValueError(f"matrix is not Hermitian: max deviation {dev:.3e}")
    return (a + a.conj().T) / 2


def hs_inner(a: np.ndarray, b: np.ndarray) -> float:
    """Hilbert-Schmidt inner product tr(AB) of two Hermitian matrices.

    Real by Hermiticity of both arguments, and symmetric in them.
    """
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return float(np.einsum("ij,ji->", a, b).real)


def _split_bipartite(h: np.ndarray, d_y: int, d_x: int) -> np.ndarray:
    h = np.asarray(h)
    n = d_y * d_x
    if h.shape != (n, n):
        raise ValueError(
            f"matrix of shape {h.shape} does not factor as ({d_y}*{d_x})^2"
        )
    return h.reshape(d_y, d_x, d_y, d_x)


def partial_trace_x(h: np.ndarray, d_y: int, d_x: int) -> np.ndarray:
    """Trace out the input system X: entry (i, j) is the trace of block (i, j)."""
    return np.einsum("iaja->ij", _split_bipartite(h, d_y, d_x))


def partial_trace_y(h: np.ndarray, d_y: int, d_x: int) -> np.ndarray:
    """Trace out the output system Y: the sum of the diagonal blocks."""
    return np.einsum("iaib->ab", _split_bipartite(h, d_y, d_x))


def max_entangled_state(d: int) -> np.ndarray:
    """Density matrix of the canonical maximally entangled state on X (x) Z.

    |phi+> = (1/sqrt(d)) sum_i |i>_X |i>_Z; both partial traces equal I/d.
    """
    if d < 1:
        raise ValueError("dimension must be at least 1")
    v = np.eye(d, dtype=complex).reshape(d * d) / np.sqrt(d)
    return np.outer(v, v.conj())


def haar_unitary(d: int, seed: int) -> np.ndarray:
    """Haar-random d x d unitary, deterministic for a given seed.

    QR of a complex standard Gaussian with the R diagonal phase-normalized,
    which makes the distribution exactly Haar.
    """
    if d < 1:
        raise ValueError("dimension must be at least 1")
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    q, r = np.linalg.qr(z / np.sqrt(2))
    phases = np.diagonal(r).copy()
    phases /= np.abs(phases)
    return q * phases


def operator_norm(h: np.ndarray) -> float:
    """Largest singular value; for Hermitian input, max |eigenvalue|."""
    return float(np.linalg.norm(np.asarray(h), 2))


def default_rank_tol(h: np.ndarray) -> float:
    """Scale-aware eigenvalue threshold: 1e-8 * max(1, ||H||_op)."""
    return 1e-8 * max(1.0, operator_norm(h))


@dataclass(frozen=True)
class SpectralSummary:
    """Eigenvalue census of a Hermitian matrix at threshold ``tol``."""

    eigenvalues: np.ndarray
    n_pos: int
    n_neg: int
    rank: int
    tol: float

    @property
    def dim(self) -> int:
        return len(self.eigenvalues)


def spectral_summary(h: np.ndarray, tol: float | None = None) -> SpectralSummary:
    """Eigenvalues of Hermitian ``h`` with signed counts above threshold.

    ``tol`` defaults to :func:`default_rank_tol`. Eigensolver failures are
    propagated, never silently zeroed.
    """
    h = np.asarray(h)
    if tol is None:
        tol = default_rank_tol(h)
    if tol <= 0:
        raise ValueError("tolerance must be positive")
    evals = np.linalg.eigvalsh(h)
    n_pos = int(np.sum(evals > tol))
    n_neg = int(np.sum(evals < -tol))
    rank = int(np.sum(np.abs(evals) > tol))
    return SpectralSummary(
        eigenvalues=evals, n_pos=n_pos, n_neg=n_neg, rank=rank, tol=tol
    )


def swap_xy(h: np.ndarray, d: int) -> np.ndarray:
    """Exchange the Y and X tensor factors of a d^2 x d^2 matrix."""
    g = _split_bipartite(h, d, d)
    return np.ascontiguousarray(g.transpose(1, 0, 3, 2).reshape(d * d, d * d))
