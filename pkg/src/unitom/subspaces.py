"""Discriminating-subspace constructions.

Four families of real subspaces of d^2 x d^2 Hermitian matrices are built:

* ``V2q``       every nonzero element has rank >= 2q+1, tr_X = 0,
* ``V2_unital`` rank >= 3 with both partial traces zero (q = 1 only),
* ``Vqp``       >= q+1 positive and q+1 negative eigenvalues, tr_Y = 0,
* ``Vqp_unital`` the same eigenvalue condition with both traces zero.

The first two place columns of constrained totally-nonsingular matrices
along upper diagonals of the d^2 x d^2 grid; the last two place them along
upper-triangular anti-diagonals and repair the partial traces by exact
top-left-block and per-block corrections.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .linalg import default_rank_tol, partial_trace_x, partial_trace_y, spectral_summary
from .tns import RankProfile, gen_both_tr0_tns, gen_full_tns, gen_tr0_tns

#: Certification effort while generating column sources; the resulting basis
#: is re-verified as a whole, so per-source certification stays light.
CONSTRUCT_BUDGET = 20_000
CONSTRUCT_SAMPLES = 150

VALID_TAGS = ("V2q", "V2_unital", "Vqp", "Vqp_unital")

#: Maximum absolute deviation allowed in the exact partial-trace constraints.
TRACE_EXACT_ATOL = 1e-12

INDEPENDENCE_RTOL = 1e-9


class SubspaceRangeError(ValueError):
    """Raised for parameter sets whose subspace would be empty or undefined."""


@dataclass(frozen=True)
class SubspaceKind:
    tag: str
    d: int
    q: int

    def __post_init__(self):
        if self.tag not in VALID_TAGS:
            raise ValueError(f"unknown subspace tag {self.tag!r}")
        if self.d < 2 or self.q < 1:
            raise SubspaceRangeError("need d >= 2 and q >= 1")
        if self.tag == "V2_unital" and self.q != 1:
            raise SubspaceRangeError("the rank-3 unital family is defined for q = 1")


@dataclass(frozen=True)
class SubspaceBasis:
    kind: SubspaceKind
    elements: tuple
    claimed_dim: int
    seed: int

    def __post_init__(self):
        if len(self.elements) != self.claimed_dim:
            raise ValueError(
                f"basis has {len(self.elements)} elements but claims "
                f"dimension {self.claimed_dim}"
            )


# ---------------------------------------------------------------------------
# dimension formulas


def anti_diag_length(d: int, k: int) -> int:
    """Length of the k-th strictly-upper anti-diagonal of a d x d grid."""
    if not 1 <= k <= 2 * d - 3:
        raise ValueError(f"anti-diagonal index {k} out of range for d={d}")
    return (k + 1) // 2 if k < d else (2 * d - k - 1) // 2


def index_set_iq(d: int, q: int) -> set:
    """Block-grid anti-diagonals whose stretched version keeps length > q."""
    return {
        k for k in range(1, 2 * d - 2) if anti_diag_length(d * d, d * k) >= q + 1
    }


def _anti_diag_entries(n: int, k: int) -> list:
    """0-indexed entries of the k-th (1-based) strictly-upper anti-diagonal.

    Ordered from lower-left to upper-right, matching how column data is
    laid down.
    """
    lo = max(0, k - n + 1)
    hi = (k - 1) // 2
    return [(i, k - i) for i in range(hi, lo - 1, -1)]


def _anti_diag_budget(d: int, q: int, k: int, unital: bool) -> tuple:
    """(entries, usable column count) for one global anti-diagonal."""
    n = d * d
    entries = _anti_diag_entries(n, k)
    ell = len(entries)
    # entries forced to zero by the tr_Y repair (top-left block) and, for the
    # unital family, by the per-block trace repair (block top-left corners)
    z = sum(1 for i, j in entries if j < d)
    w = sum(1 for i, j in entries if i % d == 0 and j % d == 0) if unital else 0
    return entries, max(ell - q - z - w, 0)


def v2q_dim(d: int, q: int) -> int:
    if 2 * q + 1 > d * d:
        raise SubspaceRangeError(f"rank demand 2q+1={2*q+1} exceeds d^2={d*d}")
    base = (d * d - 2 * q) ** 2
    if d % 2 == 1:
        corr = (d - (2 * q + d - 1) // d) ** 2
    else:
        corr = (d - (2 * q + d - 2) // d) ** 2
    dim = base - corr
    if dim <= 0:
        raise SubspaceRangeError(f"V2q is empty for d={d}, q={q}")
    return dim


def v2_unital_dim(d: int) -> int:
    if d == 2:
        return 3
    return d**4 - 6 * d**2 + 2 * d + 5


def vqp_dim(d: int, q: int) -> int:
    if d * d < 2 * q + 2:
        raise SubspaceRangeError(f"eigenvalue demand q+1={q+1} infeasible at d={d}")
    dim = (
        d**4
        - (4 * q + 1) * d**2
        + 4 * q**2
        + 2 * q
        - (d - q - 1) * max(d - q, 0)
    )
    if dim <= 0:
        raise SubspaceRangeError(f"Vqp is empty for d={d}, q={q}")
    return dim


def vqp_unital_dim(d: int, q: int) -> int:
    # Counted by direct enumeration of per-anti-diagonal budgets; the closed
    # expression with the I_q correction over-counts at small d.
    if d * d < 2 * q + 2:
        raise SubspaceRangeError(f"eigenvalue demand q+1={q+1} infeasible at d={d}")
    n = d * d
    dim = sum(
        2 * _anti_diag_budget(d, q, k, unital=True)[1] for k in range(1, 2 * n - 2)
    )
    if dim <= 0:
        raise SubspaceRangeError(f"Vqp_unital is empty for d={d}, q={q}")
    return dim


def dim_formula(kind: SubspaceKind) -> int:
    if kind.tag == "V2q":
        return v2q_dim(kind.d, kind.q)
    if kind.tag == "V2_unital":
        return v2_unital_dim(kind.d)
    if kind.tag == "Vqp":
        return vqp_dim(kind.d, kind.q)
    return vqp_unital_dim(kind.d, kind.q)


# ---------------------------------------------------------------------------
# diagonal placement engine (V2q, V2_unital)


def place_diagonal(n: int, t: int, column: np.ndarray) -> np.ndarray:
    """Real template with ``column`` laid along upper diagonal offset ``t``."""
    column = np.asarray(column, dtype=float)
    if len(column) != n - t:
        raise ValueError("column length must match the diagonal length")
    m = np.zeros((n, n))
    idx = np.arange(n - t)
    m[idx, idx + t] = column
    return m


def hermitians_from_template(m: np.ndarray, on_main_diagonal: bool) -> list:
    """One real-diagonal element, or the (D + D^T, i(D - D^T)) pair."""
    if on_main_diagonal:
        return [m.astype(complex)]
    return [(m + m.T).astype(complex), 1j * m - 1j * m.T]


def _near_diag_permutation(d: int, t: int) -> np.ndarray:
    """Row permutation aligning a grouped traceless matrix with diagonal t.

    The source matrix (k = d - t groups of d consecutive rows, then
    t*(d-1) free rows) is reordered so group a lands on positions
    {a + u*d} of the diagonal and free rows fill positions with
    residue >= d - t, making the strided tr_Y sums vanish exactly.
    """
    ell = d * d - t
    k = d - t
    perm = np.empty(ell, dtype=int)
    for a in range(k):
        for u in range(d):
            perm[a + u * d] = a * d + u
    free_positions = [p for p in range(ell) if p % d >= d - t]
    for idx, p in enumerate(free_positions):
        perm[p] = d * k + idx
    return perm


def _diag_column_source(d, q, t, unital, seed):
    """Certified column matrix for upper diagonal ``t``, or None if unused."""
    n = d * d
    ell = n - t
    gen_kw = dict(
        seed=seed,
        max_attempts=16,
        exhaustive_budget=CONSTRUCT_BUDGET,
        sample_count=CONSTRUCT_SAMPLES,
    )
    if t % d == 0:
        # runs along the main diagonals of k blocks; zero block traces need
        # the grouped-row generator
        k = d - t // d
        r = d * k - 2 * q
        if r <= 0:
            return None
        if unital and t == 0:
            c = RankProfile("both_tr0", d=d).f(r, (d - 1) ** 2)
            if c <= 0:
                return None
            return gen_both_tr0_tns(d, cols=c, **gen_kw)[0]
        c = r - min(r // d, k)
        if c <= 0:
            return None
        return gen_tr0_tns(d, k, 1, cols=c, **gen_kw)[0]
    if unital and t < d:
        # near diagonal: strided tr_Y groups, handled by row permutation
        k = d - t
        m = t * (d - 1) + 1
        r = ell - 2 * q
        c = r - min(r // d, k)
        if c <= 0:
            return None
        v = gen_tr0_tns(d, k, m, cols=c, **gen_kw)[0]
        return v[_near_diag_permutation(d, t)]
    c = ell - 2 * q
    if c <= 0:
        return None
    return gen_full_tns(ell, cols=c, **gen_kw)[0]


def _build_on_diagonals(d: int, q: int, unital: bool, seed: int) -> list:
    n = d * d
    rng = np.random.default_rng(seed)
    elements = []
    for t in range(n):
        sub_seed = int(rng.integers(2**63))
        source = _diag_column_source(d, q, t, unital, sub_seed)
        if source is None:
            continue
        for col in source.T:
            template = place_diagonal(n, t, col)
            elements.extend(hermitians_from_template(template, on_main_diagonal=t == 0))
    return elements


def build_high_rank(d: int, q: int, seed: int) -> SubspaceBasis:
    """Basis of V2q: rank >= 2q+1 with tr_X = 0 (proof orientation)."""
    kind = SubspaceKind("V2q", d, q)
    dim = v2q_dim(d, q)
    elements = _build_on_diagonals(d, q, unital=False, seed=seed)
    return SubspaceBasis(kind, tuple(elements), dim, seed)


#: The explicit rank-3 basis with two vanishing partial traces at d = 2.
_D2_UNITAL_BASIS = (
    np.diag([1.0, -1.0, -1.0, 1.0]).astype(complex),
    np.array(
        [
            [0, 1, 0, 0],
            [1, 0, 2, 0],
            [0, 2, 0, -1],
            [0, 0, -1, 0],
        ],
        dtype=complex,
    ),
    np.array(
        [
            [0, 1j, 0, 0],
            [-1j, 0, 2j, 0],
            [0, -2j, 0, -1j],
            [0, 0, 1j, 0],
        ],
        dtype=complex,
    ),
)


def build_rank3_unital(d: int, seed: int) -> SubspaceBasis:
    """Basis of V2_unital: rank >= 3 with both partial traces zero."""
    kind = SubspaceKind("V2_unital", d, 1)
    dim = v2_unital_dim(d)
    if d == 2:
        return SubspaceBasis(kind, _D2_UNITAL_BASIS, dim, seed)
    elements = _build_on_diagonals(d, 1, unital=True, seed=seed)
    return SubspaceBasis(kind, tuple(elements), dim, seed)


# ---------------------------------------------------------------------------
# anti-diagonal placement engine (Vqp, Vqp_unital)


def anti_diag_element(
    d: int, k: int, column: np.ndarray, imaginary: bool, unital: bool
) -> np.ndarray:
    """One Hermitian basis element from column data on anti-diagonal ``k``.

    The column is laid along the strictly-upper anti-diagonal from
    lower-left to upper-right, reflected Hermitian below, the sum of the
    diagonal blocks is subtracted from the top-left block (tr_Y = 0), and
    for the unital family every block's trace is cancelled on its top-left
    entry (tr_X = 0).
    """
    n = d * d
    entries = _anti_diag_entries(n, k)
    column = np.asarray(column, dtype=float)
    if len(column) != len(entries):
        raise ValueError("column length must match the anti-diagonal length")
    upper = np.zeros((n, n), dtype=complex)
    for (i, j), val in zip(entries, column):
        upper[i, j] = val
    h = 1j * upper - 1j * upper.T if imaginary else upper + upper.T
    h[0:d, 0:d] -= partial_trace_y(h, d, d)
    if unital:
        for bi in range(d):
            for bj in range(d):
                blk = h[bi * d : (bi + 1) * d, bj * d : (bj + 1) * d]
                blk[0, 0] -= np.trace(blk)
    return h


def _build_on_anti_diagonals(d: int, q: int, unital: bool, seed: int) -> list:
    n = d * d
    rng = np.random.default_rng(seed)
    elements = []
    for k in range(1, 2 * n - 2):
        sub_seed = int(rng.integers(2**63))
        entries, c = _anti_diag_budget(d, q, k, unital)
        if c == 0:
            continue
        source = gen_full_tns(
            len(entries),
            cols=c,
            seed=sub_seed,
            exhaustive_budget=CONSTRUCT_BUDGET,
            sample_count=CONSTRUCT_SAMPLES,
        )[0]
        for col in source.T:
            elements.append(anti_diag_element(d, k, col, imaginary=False, unital=unital))
            elements.append(anti_diag_element(d, k, col, imaginary=True, unital=unital))
    return elements


def build_pos_eig(d: int, q: int, seed: int) -> SubspaceBasis:
    """Basis of Vqp: >= q+1 positive and negative eigenvalues, tr_Y = 0."""
    kind = SubspaceKind("Vqp", d, q)
    dim = vqp_dim(d, q)
    elements = _build_on_anti_diagonals(d, q, unital=False, seed=seed)
    return SubspaceBasis(kind, tuple(elements), dim, seed)


def build_pos_eig_unital(d: int, q: int, seed: int) -> SubspaceBasis:
    """Basis of Vqp_unital: the Vqp eigenvalue demand with both traces zero."""
    kind = SubspaceKind("Vqp_unital", d, q)
    dim = vqp_unital_dim(d, q)
    elements = _build_on_anti_diagonals(d, q, unital=True, seed=seed)
    return SubspaceBasis(kind, tuple(elements), dim, seed)


_BUILDERS = {
    "V2q": lambda d, q, seed: build_high_rank(d, q, seed),
    "V2_unital": lambda d, q, seed: build_rank3_unital(d, seed),
    "Vqp": lambda d, q, seed: build_pos_eig(d, q, seed),
    "Vqp_unital": lambda d, q, seed: build_pos_eig_unital(d, q, seed),
}


def build_subspace(kind: SubspaceKind, seed: int) -> SubspaceBasis:
    return _BUILDERS[kind.tag](kind.d, kind.q, seed)


# ---------------------------------------------------------------------------
# verification


def hermitian_coords(h: np.ndarray) -> np.ndarray:
    """Coordinates of a Hermitian matrix in an orthonormal real basis.

    The map is an isometry: dot products of coordinate vectors equal the
    Hilbert-Schmidt inner product tr(AB).
    """
    h = np.asarray(h)
    n = h.shape[0]
    iu = np.triu_indices(n, k=1)
    sqrt2 = np.sqrt(2.0)
    return np.concatenate(
        [h.diagonal().real, sqrt2 * h[iu].real, sqrt2 * h[iu].imag]
    )


def coords_to_hermitian(x: np.ndarray, n: int) -> np.ndarray:
    """Inverse of :func:`hermitian_coords`."""
    x = np.asarray(x, dtype=float)
    h = np.zeros((n, n), dtype=complex)
    iu = np.triu_indices(n, k=1)
    m = len(iu[0])
    h[np.diag_indices(n)] = x[:n]
    vals = (x[n : n + m] + 1j * x[n + m :]) / np.sqrt(2.0)
    h[iu] = vals
    h[iu[1], iu[0]] = vals.conj()
    return h


def _trace_constraints(kind: SubspaceKind):
    d = kind.d
    if kind.tag == "V2q":
        return [lambda h: partial_trace_x(h, d, d)]
    if kind.tag == "Vqp":
        return [lambda h: partial_trace_y(h, d, d)]
    return [lambda h: partial_trace_x(h, d, d), lambda h: partial_trace_y(h, d, d)]


@dataclass(frozen=True)
class SubspacePropertyReport:
    trials: int
    min_rank_seen: int
    min_pos_eigs_seen: int
    min_neg_eigs_seen: int
    independence_sigma_min: float
    constraint_max_dev: float
    passed: bool
    failures: tuple = field(default_factory=tuple)


def verify_subspace(
    basis: SubspaceBasis, trials: int = 1000, seed: int = 0
) -> SubspacePropertyReport:
    """Check trace constraints, independence and sampled spectral demands.

    For each trial a unit-sphere coefficient vector forms a combination
    whose spectral summary must meet the kind's requirement: rank >= 2q+1
    (V2q, V2_unital) or >= q+1 eigenvalues of each sign (Vqp families).
    """
    if trials < 1:
        raise ValueError("need at least one trial")
    kind = basis.kind
    d, q = kind.d, kind.q
    failures = []

    max_dev = 0.0
    for h in basis.elements:
        for constraint in _trace_constraints(kind):
            dev = float(np.abs(constraint(h)).max())
            scale = 1.0 + float(np.abs(h).max())
            max_dev = max(max_dev, dev)
            if dev > TRACE_EXACT_ATOL * scale:
                failures.append(("trace_constraint", dev))

    coords = np.stack([hermitian_coords(h) for h in basis.elements])
    svals = np.linalg.svd(coords, compute_uv=False)
    sigma_ratio = float(svals[-1] / svals[0]) if svals[0] > 0 else 0.0
    if sigma_ratio <= INDEPENDENCE_RTOL:
        failures.append(("independence", sigma_ratio))

    rng = np.random.default_rng(seed)
    stack = np.stack(basis.elements)
    min_rank = np.iinfo(np.int64).max
    min_pos = np.iinfo(np.int64).max
    min_neg = np.iinfo(np.int64).max
    rank_demand = 2 * q + 1 if kind.tag in ("V2q", "V2_unital") else 0
    for trial in range(trials):
        coeff = rng.standard_normal(len(basis.elements))
        coeff /= np.linalg.norm(coeff)
        combo = np.tensordot(coeff, stack, axes=1)
        summary = spectral_summary(combo, tol=default_rank_tol(combo))
        min_rank = min(min_rank, summary.rank)
        min_pos = min(min_pos, summary.n_pos)
        min_neg = min(min_neg, summary.n_neg)
        if rank_demand:
            if summary.rank < rank_demand:
                failures.append(("rank", trial, summary.rank))
        elif summary.n_pos < q + 1 or summary.n_neg < q + 1:
            failures.append(("eigs", trial, summary.n_pos, summary.n_neg))
    return SubspacePropertyReport(
        trials=trials,
        min_rank_seen=int(min_rank),
        min_pos_eigs_seen=int(min_pos),
        min_neg_eigs_seen=int(min_neg),
        independence_sigma_min=sigma_ratio,
        constraint_max_dev=max_dev,
        passed=not failures,
        failures=tuple(failures[:20]),
    )
