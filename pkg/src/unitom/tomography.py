"""Measurement simulation and channel reconstruction from expectation values."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from .channels import (
    KrausChannel,
    apply_extended,
    choi_from_kraus,
    random_kraus_channel,
    unitary_channel,
)
from .linalg import haar_unitary, hs_inner, partial_trace_y
from .observables import ObservableSet, build_observable_set, clifford_set_d2

DEFAULT_RESTARTS = 20
DEFAULT_MAX_ITERS = 2000
DEFAULT_TOL = 1e-10

#: Process-fidelity success threshold |tr(U^dag V)|/d >= 1 - this.
FIDELITY_SLACK = 1e-6


@dataclass(frozen=True)
class ExpectationVector:
    """Real expectation values aligned with an ObservableSet."""

    values: np.ndarray
    mode: str = "exact"
    shots: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))
        if self.mode not in ("exact", "sampled"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.mode == "sampled" and (self.shots is None or self.shots < 1):
            raise ValueError("sampled mode requires shots >= 1")

    def __len__(self) -> int:
        return len(self.values)


def _check_dims(obs_set: ObservableSet, ch: KrausChannel) -> None:
    if ch.d_in != obs_set.d or ch.d_out != obs_set.d:
        raise ValueError(
            f"channel dimension {ch.d_out}x{ch.d_in} does not match d={obs_set.d}"
        )


def measure_exact(obs_set: ObservableSet, ch: KrausChannel) -> ExpectationVector:
    """Exact expectations tr(H_i J(Phi)) for every observable."""
    _check_dims(obs_set, ch)
    j = choi_from_kraus(ch)
    values = np.array([hs_inner(o.h, j) for o in obs_set.observables])
    return ExpectationVector(values=values, mode="exact")


def measure_operational(obs_set: ObservableSet, ch: KrausChannel) -> ExpectationVector:
    """Exact expectations via the entangled-input/POVM path.

    Agrees with :func:`measure_exact` to machine precision; kept as an
    independent oracle for the operational decomposition.
    """
    _check_dims(obs_set, ch)
    values = []
    for o in obs_set.observables:
        dec = o.decomposition
        rho = apply_extended(ch, dec.xi)
        p_plus = float(np.einsum("ij,ji->", dec.p_plus, rho).real)
        p_minus = float(np.einsum("ij,ji->", dec.p_minus, rho).real)
        values.append(o.scale * (p_plus - p_minus))
    return ExpectationVector(values=np.array(values), mode="exact")


def measure_sampled(
    obs_set: ObservableSet, ch: KrausChannel, shots: int, seed: int
) -> ExpectationVector:
    """Finite-shot estimates: per observable, `shots` Bernoulli outcomes.

    p+ = tr(P+ rho_out); the reported value is c * (2 p_hat - 1) with
    standard error c / sqrt(shots).
    """
    if shots < 1:
        raise ValueError("shots must be at least 1")
    _check_dims(obs_set, ch)
    rng = np.random.default_rng(seed)
    values = []
    for o in obs_set.observables:
        dec = o.decomposition
        rho = apply_extended(ch, dec.xi)
        p_plus = float(np.einsum("ij,ji->", dec.p_plus, rho).real)
        p_plus = min(max(p_plus, 0.0), 1.0)
        hits = rng.binomial(shots, p_plus)
        values.append(o.scale * (2.0 * hits / shots - 1.0))
    return ExpectationVector(values=np.array(values), mode="sampled", shots=shots)


def discriminate_pair(
    obs_set: ObservableSet, ch_a: KrausChannel, ch_b: KrausChannel, tol: float
) -> bool:
    """True iff the exact expectation vectors differ in some component by > tol."""
    va = measure_exact(obs_set, ch_a).values
    vb = measure_exact(obs_set, ch_b).values
    return bool(np.abs(va - vb).max() > tol)


# ---------------------------------------------------------------------------
# unitary reconstruction


@dataclass(frozen=True)
class ReconstructionResult:
    recovered: KrausChannel
    residual: float
    restarts_used: int
    converged: bool
    fidelity_to_truth: float | None = None


def process_fidelity(u: np.ndarray, v: np.ndarray) -> float:
    """|tr(U^dag V)| / d: unitary channel fidelity, phase-invariant."""
    d = u.shape[0]
    return float(np.abs(np.trace(u.conj().T @ v)) / d)


def _objective(hs: np.ndarray, target: np.ndarray, u: np.ndarray):
    """Least-squares value and residuals for f(U) = sum (w*H_i w - m_i)^2."""
    w = u.reshape(-1)
    hw = hs @ w
    res = (w.conj() @ hw.T).real - target
    return float(res @ res), res, hw


def _riemannian_descent(hs, target, u, max_iters, tol):
    """Gradient descent on the unitary group with backtracking line search."""
    d = u.shape[0]
    f, res, hw = _objective(hs, target, u)
    step = 1.0
    for _ in range(max_iters):
        if f < tol:
            break
        # Euclidean gradient 2 sum_i r_i H_i w, folded back to a d x d matrix
        g = 2.0 * (res @ hw).reshape(d, d)
        # skew-Hermitian descent generator; exp(-s S) U stays unitary
        s_gen = g @ u.conj().T - u @ g.conj().T
        g_norm2 = float(np.abs(s_gen) .max()) ** 2
        if g_norm2 < 1e-30:
            break
        improved = False
        for _ in range(40):
            u_try = expm(-step * s_gen) @ u
            f_try, res_try, hw_try = _objective(hs, target, u_try)
            if f_try < f:
                u, f, res, hw = u_try, f_try, res_try, hw_try
                step *= 1.5
                improved = True
                break
            step *= 0.5
        if not improved:
            break
    return u, f


def _gauss_newton_polish(hs, target, u, basis, iters=40):
    """Damped Gauss-Newton in the tangent parameterization U <- e^{iA} U."""
    d = u.shape[0]
    m = hs.shape[0]
    f, res, hw = _objective(hs, target, u)
    lam = 1e-8
    for _ in range(iters):
        if f < 1e-26:
            break
        # Jacobian of residuals w.r.t. Hermitian tangent coordinates
        tangents = np.stack([(1j * b @ u).reshape(-1) for b in basis])
        jac = 2.0 * (hw @ tangents.conj().T).real.reshape(m, len(basis))
        a = jac.T @ jac + lam * np.eye(len(basis))
        try:
            delta = np.linalg.solve(a, -jac.T @ res)
        except np.linalg.LinAlgError:
            break
        gen = np.tensordot(delta, basis, axes=1)
        u_try = expm(1j * gen) @ u
        f_try, res_try, hw_try = _objective(hs, target, u_try)
        if f_try < f:
            u, f, res, hw = u_try, f_try, res_try, hw_try
            lam = max(lam / 4, 1e-12)
        else:
            lam *= 10
            if lam > 1e6:
                break
    return u, f


def _tangent_basis(d: int) -> np.ndarray:
    from .observables import hermitian_matrix_basis

    return np.stack(hermitian_matrix_basis(d))


def reconstruct_unitary(
    obs_set: ObservableSet,
    target: ExpectationVector,
    seed: int = 0,
    restarts: int = DEFAULT_RESTARTS,
    max_iters: int = DEFAULT_MAX_ITERS,
    tol: float = DEFAULT_TOL,
    truth: np.ndarray | None = None,
) -> ReconstructionResult:
    """Recover a unitary channel from expectation values by manifold descent.

    Minimizes f(U) = sum_i (tr(H_i J(U . U^dag)) - m_i)^2 over the unitary
    group, restarting from Haar-random points; each restart runs projected
    gradient descent with exponential-map retraction followed by a damped
    Gauss-Newton polish. ``converged`` means the best residual fell below
    ``tol``.
    """
    if len(target) != len(obs_set):
        raise ValueError("target length does not match the observable set")
    d = obs_set.d
    hs = obs_set.raw_matrices()
    basis = _tangent_basis(d)
    m_target = target.values
    rng = np.random.default_rng(seed)

    best_u = None
    best_f = np.inf
    used = 0
    for attempt in range(max(restarts, 1)):
        used = attempt + 1
        u0 = haar_unitary(d, int(rng.integers(2**63)))
        u, f = _riemannian_descent(hs, m_target, u0, max_iters=max_iters, tol=tol**2)
        u, f = _gauss_newton_polish(hs, m_target, u, basis)
        if f < best_f:
            best_u, best_f = u, f
        if best_f < tol**2:
            break
    residual = float(np.sqrt(best_f))
    fidelity = process_fidelity(truth, best_u) if truth is not None else None
    return ReconstructionResult(
        recovered=unitary_channel(best_u),
        residual=residual,
        restarts_used=used,
        converged=residual < tol,
        fidelity_to_truth=fidelity,
    )


def reconstruct_choi(
    obs_set: ObservableSet,
    target: ExpectationVector,
    max_iters: int = 5000,
    tol: float = 1e-9,
) -> tuple:
    """Experimental rank-agnostic recovery of a Choi matrix.

    Alternating projections between the affine set {tr(H_i J) = m_i,
    tr_Y(J) = I} and the PSD cone. No uniqueness or convergence guarantee
    beyond the convexity of both sets; returned as (J, residual).
    """
    d = obs_set.d
    n = d * d
    from .observables import hermitian_matrix_basis
    from .subspaces import coords_to_hermitian, hermitian_coords

    # affine constraints in orthonormal Hermitian coordinates
    rows = [hermitian_coords(o.h) for o in obs_set.observables]
    rhs = list(target.values)
    eye_d = np.eye(d)
    for m in hermitian_matrix_basis(d):
        lift = np.kron(eye_d, m) / 1.0
        rows.append(hermitian_coords(lift))
        rhs.append(float(np.trace(m @ eye_d).real))
    a = np.stack(rows)
    b = np.array(rhs)
    pinv = np.linalg.pinv(a)

    j = np.eye(n, dtype=complex) / d
    for _ in range(max_iters):
        x = hermitian_coords(j)
        x = x + pinv @ (b - a @ x)
        j_aff = coords_to_hermitian(x, n)
        evals, vecs = np.linalg.eigh(j_aff)
        j_new = (vecs * np.maximum(evals, 0.0)) @ vecs.conj().T
        if float(np.abs(j_new - j).max()) < tol:
            j = j_new
            break
        j = j_new
    residual = float(np.linalg.norm(a @ hermitian_coords(j) - b))
    return j, residual


# ---------------------------------------------------------------------------
# experiments


@dataclass(frozen=True)
class ExperimentConfig:
    mode: str  # "discriminate" | "reconstruct"
    d: int
    q: int = 1
    question: str = "among_rank_q"
    trials: int = 0
    seed: int = 0
    shots: int | None = None
    tol: float = 1e-8
    pair_type: str = "unitary_unitary"  # or "unitary_cptp"
    restarts: int = DEFAULT_RESTARTS

    def __post_init__(self):
        if self.mode not in ("discriminate", "reconstruct"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.trials < 0:
            raise ValueError("trials must be nonnegative")


@dataclass(frozen=True)
class ExperimentReport:
    config: ExperimentConfig
    outcomes: tuple
    success_rate: float | None
    wall_clock_s: float
    errors: tuple = field(default_factory=tuple)


def run_experiment(config: ExperimentConfig, obs_set: ObservableSet | None = None) -> ExperimentReport:
    """Run independent discrimination or reconstruction trials and aggregate.

    Per-trial seeds are derived from the config seed; trial errors are
    recorded in the report, not raised.
    """
    t0 = time.time()
    if obs_set is None:
        obs_set = build_observable_set(config.d, config.q, config.question, config.seed)
    rng = np.random.default_rng(config.seed)
    outcomes = []
    errors = []
    for trial in range(config.trials):
        trial_seed = int(rng.integers(2**63))
        try:
            outcomes.append(_run_trial(config, obs_set, trial, trial_seed))
        except Exception as exc:  # recorded, not thrown
            errors.append((trial, repr(exc)))
            outcomes.append({"trial": trial, "success": False, "error": repr(exc)})
    successes = sum(1 for o in outcomes if o.get("success"))
    rate = successes / config.trials if config.trials else None
    return ExperimentReport(
        config=config,
        outcomes=tuple(outcomes),
        success_rate=rate,
        wall_clock_s=time.time() - t0,
        errors=tuple(errors),
    )


def _run_trial(config: ExperimentConfig, obs_set: ObservableSet, trial: int, seed: int):
    d = config.d
    if config.mode == "discriminate":
        u = haar_unitary(d, seed)
        ch_a = unitary_channel(u)
        if config.pair_type == "unitary_cptp":
            ch_b = random_kraus_channel(d, 2, seed + 1)
        else:
            ch_b = unitary_channel(haar_unitary(d, seed + 1))
        dist = float(
            np.linalg.norm(choi_from_kraus(ch_a) - choi_from_kraus(ch_b))
        )
        success = discriminate_pair(obs_set, ch_a, ch_b, config.tol)
        return {"trial": trial, "success": success, "choi_distance": dist}
    truth = haar_unitary(d, seed)
    ch = unitary_channel(truth)
    if config.shots:
        target = measure_sampled(obs_set, ch, config.shots, seed + 1)
    else:
        target = measure_exact(obs_set, ch)
    result = reconstruct_unitary(
        obs_set, target, seed=seed + 2, restarts=config.restarts, truth=truth
    )
    success = result.fidelity_to_truth is not None and (
        result.fidelity_to_truth >= 1.0 - FIDELITY_SLACK
    )
    return {
        "trial": trial,
        "success": bool(success),
        "fidelity": result.fidelity_to_truth,
        "residual": result.residual,
        "restarts_used": result.restarts_used,
    }
