"""Generation and certification of totally-nonsingular-style matrices.

Three families are produced:

* plain totally nonsingular rectangles (every square submatrix nonsingular),
* matrices whose rows sum to zero in k consecutive groups of d while every
  r x f(r) submatrix, f(r) = r - min(floor(r/d), k), keeps full rank,
* square matrices of size d^2 whose rows sum to zero both in consecutive
  groups of d and in the d strided groups {a, a+d, ...}, with
  f(r) = min(r - g(r), (d-1)^2) where g(r) is the largest number of
  independent group-sum relations supported on some r rows: s consecutive
  and t strided complete groups fit in s*d + t*d - s*t rows and contribute
  s + t relations (2d - 1 when all 2d groups are present).

Free entries are drawn uniformly from [-1, 1]; the constrained rows are exact
negations/sums of free rows, so the linear constraints hold to the last bit.
Rank guarantees hold almost surely for such draws and are certified by
sampling (or exhaustively when small enough).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from math import comb

import numpy as np

#: Full-rank threshold: smallest singular value relative to the largest.
RANK_RTOL = 1e-9

#: Above this many submatrices, certification switches to random sampling.
EXHAUSTIVE_BUDGET = 2_000_000

SAMPLE_COUNT = 10_000


@dataclass(frozen=True)
class RankProfile:
    """Which r x f(r) submatrices of a matrix must have full column rank.

    ``kind`` is one of ``full_tns``, ``tr0`` (params d, k, m) or
    ``both_tr0`` (param d).
    """

    kind: str
    d: int = 0
    k: int = 0
    m: int = 0

    def f(self, r: int, cols: int) -> int:
        if self.kind == "full_tns":
            return min(r, cols)
        if self.kind == "tr0":
            return min(r - min(r // self.d, self.k), cols)
        if self.kind == "both_tr0":
            return min(r - self._both_relations(r), (self.d - 1) ** 2, cols)
        raise ValueError(f"unknown profile kind {self.kind!r}")

    def _both_relations(self, r: int) -> int:
        """Most independent group-sum relations supported on some r rows."""
        d = self.d
        best = 0
        for s in range(d + 1):
            for t in range(d + 1):
                if s * d + t * d - s * t <= r:
                    rel = 2 * d - 1 if s == d and t == d else s + t
                    best = max(best, rel)
        return best

    def r_range(self, rows: int) -> range:
        if self.kind == "tr0":
            # the profile guarantee covers r < dk + m only
            return range(1, min(rows, self.d * self.k + self.m - 1) + 1)
        return range(1, rows + 1)

    def binding_pairs(self, rows: int, cols: int) -> list[tuple[int, int]]:
        """Minimal (r, c) checks implying every r x f(r) requirement.

        f is nondecreasing in r, so for each achieved column count c it is
        enough to check the smallest r with f(r) = c; larger r contain those
        submatrices.
        """
        pairs: dict[int, int] = {}
        for r in self.r_range(rows):
            c = self.f(r, cols)
            if c >= 1 and c not in pairs:
                pairs[c] = r
        return sorted((r, c) for c, r in pairs.items())


@dataclass(frozen=True)
class TnsReport:
    """Evidence from a rank-profile certification run."""

    exhaustive: bool
    submatrices_checked: int
    min_singular_value_seen: float
    violations: tuple = field(default_factory=tuple)

    @property
    def passed(self) -> bool:
        return not self.violations


def _submatrix_full_rank(sub: np.ndarray, rtol: float = RANK_RTOL) -> float:
    """Return sigma_min/sigma_max of ``sub`` (0.0 for a zero matrix)."""
    s = np.linalg.svd(sub, compute_uv=False)
    if s[0] == 0.0:
        return 0.0
    return float(s[-1] / s[0])


def verify_rank_profile(
    v: np.ndarray,
    profile: RankProfile,
    exhaustive_budget: int = EXHAUSTIVE_BUDGET,
    sample_count: int = SAMPLE_COUNT,
    seed: int = 0,
) -> TnsReport:
    """Certify that ``v`` satisfies its rank profile.

    All binding (r, c) pairs are checked exhaustively if their total
    submatrix count fits the budget; otherwise ``sample_count`` uniformly
    random row/column index sets are tested per pair. Violations are
    reported (sorted), never raised.
    """
    v = np.asarray(v, dtype=float)
    rows, cols = v.shape
    pairs = profile.binding_pairs(rows, cols)
    total = sum(comb(rows, r) * comb(cols, c) for r, c in pairs)
    exhaustive = total <= exhaustive_budget
    rng = np.random.default_rng(seed)

    violations = []
    checked = 0
    min_ratio = np.inf
    for r, c in pairs:
        if exhaustive:
            index_pairs = itertools.product(
                itertools.combinations(range(rows), r),
                itertools.combinations(range(cols), c),
            )
        else:
            index_pairs = (
                (
                    tuple(np.sort(rng.choice(rows, size=r, replace=False))),
                    tuple(np.sort(rng.choice(cols, size=c, replace=False))),
                )
                for _ in range(sample_count)
            )
        for ridx, cidx in index_pairs:
            ratio = _submatrix_full_rank(v[np.ix_(ridx, cidx)])
            checked += 1
            min_ratio = min(min_ratio, ratio)
            if ratio <= RANK_RTOL:
                violations.append((ridx, cidx))
    return TnsReport(
        exhaustive=exhaustive,
        submatrices_checked=checked,
        min_singular_value_seen=float(min_ratio) if checked else 0.0,
        violations=tuple(sorted(violations)),
    )


def vandermonde(alphas) -> np.ndarray:
    """Vandermonde matrix of strictly increasing positive nodes.

    Entry (i, j) = alphas[i] ** j; totally nonsingular by the classical
    determinant formula.
    """
    a = np.asarray(alphas, dtype=float)
    if a.ndim != 1 or len(a) == 0:
        raise ValueError("need a non-empty 1-D list of nodes")
    if a[0] <= 0 or np.any(np.diff(a) <= 0):
        raise ValueError("nodes must be strictly increasing and positive")
    return np.vander(a, increasing=True)


def _certified(
    build,
    profile: RankProfile,
    seed: int,
    max_attempts: int,
    exhaustive_budget: int,
    sample_count: int,
) -> tuple[np.ndarray, TnsReport]:
    rng = np.random.default_rng(seed)
    for attempt in range(max_attempts):
        v = build(rng)
        report = verify_rank_profile(
            v,
            profile,
            exhaustive_budget=exhaustive_budget,
            sample_count=sample_count,
            seed=seed + attempt,
        )
        if report.passed:
            return v, report
    raise RuntimeError(
        f"failed to certify a {profile.kind} matrix after {max_attempts} attempts; "
        "this signals a bug or a degenerate RNG stream"
    )


def gen_full_tns(
    rows: int,
    cols: int | None = None,
    seed: int = 0,
    max_attempts: int = 16,
    exhaustive_budget: int = EXHAUSTIVE_BUDGET,
    sample_count: int = SAMPLE_COUNT,
) -> tuple[np.ndarray, TnsReport]:
    """Random rows x cols matrix certified against the full TNS profile."""
    cols = rows if cols is None else cols
    profile = RankProfile("full_tns")

    def build(rng):
        return rng.uniform(-1.0, 1.0, size=(rows, cols))

    return _certified(build, profile, seed, max_attempts, exhaustive_budget, sample_count)


def gen_tr0_tns(
    d: int,
    k: int,
    m: int,
    seed: int = 0,
    cols: int | None = None,
    max_attempts: int = 16,
    exhaustive_budget: int = EXHAUSTIVE_BUDGET,
    sample_count: int = SAMPLE_COUNT,
) -> tuple[np.ndarray, TnsReport]:
    """Matrix of size (dk + m - 1) whose k consecutive d-row groups sum to zero.

    The last row of each group is the exact negation of the sum of the
    others; the trailing m - 1 rows are free. Column count defaults to
    square but may be reduced when fewer columns are consumed downstream.
    """
    if d < 1 or k < 1 or m < 1:
        raise ValueError("d, k, m must all be at least 1")
    rows = d * k + m - 1
    cols = rows if cols is None else cols
    profile = RankProfile("tr0", d=d, k=k, m=m)

    def build(rng):
        v = np.empty((rows, cols))
        for j in range(k):
            free = rng.uniform(-1.0, 1.0, size=(d - 1, cols))
            v[j * d : j * d + d - 1] = free
            v[j * d + d - 1] = -free.sum(axis=0)
        if m > 1:
            v[d * k :] = rng.uniform(-1.0, 1.0, size=(m - 1, cols))
        return v

    return _certified(build, profile, seed, max_attempts, exhaustive_budget, sample_count)


def gen_both_tr0_tns(
    d: int,
    seed: int = 0,
    cols: int | None = None,
    max_attempts: int = 16,
    exhaustive_budget: int = EXHAUSTIVE_BUDGET,
    sample_count: int = SAMPLE_COUNT,
) -> tuple[np.ndarray, TnsReport]:
    """d^2-row matrix whose consecutive and strided d-row groups both sum to zero.

    Rows are indexed (j, a) -> j*d + a. The (d-1)^2 rows with j, a < d-1 are
    free; row (j, d-1) closes consecutive group j, row (d-1, a) closes
    strided group a, and the corner row is determined consistently by both.
    """
    if d < 2:
        raise ValueError("d must be at least 2")
    rows = d * d
    cols = rows if cols is None else cols
    profile = RankProfile("both_tr0", d=d)

    def build(rng):
        v = np.empty((rows, cols))
        free = rng.uniform(-1.0, 1.0, size=(d - 1, d - 1, cols))
        for j in range(d - 1):
            for a in range(d - 1):
                v[j * d + a] = free[j, a]
            v[j * d + d - 1] = -free[j].sum(axis=0)
        for a in range(d - 1):
            v[(d - 1) * d + a] = -free[:, a].sum(axis=0)
        v[d * d - 1] = free.sum(axis=(0, 1))
        return v

    return _certified(build, profile, seed, max_attempts, exhaustive_budget, sample_count)


@dataclass(frozen=True)
class ComboZeroReport:
    """Outcome of random column-combination zero-count trials."""

    trials: int
    max_zeros_seen: int
    allowed_zeros: int

    @property
    def passed(self) -> bool:
        return self.max_zeros_seen <= self.allowed_zeros


def col_combo_zero_bound(
    v: np.ndarray, c: int, r: int, trials: int = 100, seed: int = 0
) -> ComboZeroReport:
    """Check that random c-column combinations have at most r - 1 near-zeros.

    Coefficients are drawn from the unit sphere and re-drawn while any
    coefficient magnitude falls below 1e-3, so every selected column
    genuinely participates.
    """
    v = np.asarray(v, dtype=float)
    rows, cols = v.shape
    if not (1 <= c <= r <= rows):
        raise ValueError("need 1 <= c <= r <= rows")
    rng = np.random.default_rng(seed)
    max_zeros = 0
    for _ in range(trials):
        cidx = rng.choice(cols, size=c, replace=False)
        while True:
            coeff = rng.standard_normal(c)
            coeff /= np.linalg.norm(coeff)
            if np.abs(coeff).min() >= 1e-3:
                break
        combo = v[:, cidx] @ coeff
        tau = 1e-9 * max(np.linalg.norm(v[:, cidx], axis=0).max(), 1e-300)
        max_zeros = max(max_zeros, int(np.sum(np.abs(combo) < tau)))
    return ComboZeroReport(trials=trials, max_zeros_seen=max_zeros, allowed_zeros=r - 1)
