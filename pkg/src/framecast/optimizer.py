"""Alternating eigenvalue optimization of the sender/fiducial state pair.

One round: contract the tensor with the current fiducial amplitudes, take the
top eigenvector as the sender state, then renormalize it per block to get the
next fiducial state. A few rounds reach a joint fixed point at which the
fiducial amplitudes are the per-block normalization of the sender amplitudes.

A derivative-free direct search over unconstrained amplitudes (small n only)
serves as an independent cross-check, and sweeps over n feed the asymptotic
power-law fits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .basis import block_slice, flat_index, total_dim
from .coefficients import Objective, SparseCoefficientTensor, cached_tensor, g_element
from .objective import (
    AliceState,
    FiducialState,
    ObjectiveMatrix,
    build_m,
    expected_value,
    mse_per_axis_from_lambda,
)

DEFAULT_TOL = 1e-12
DEFAULT_MAX_ITER = 200

# a trajectory decrease beyond this signals a broken quadratic form, not noise
DECREASE_ABORT = 1e-9


@dataclass(frozen=True)
class OptimizationResult:
    """Best state pair found, its objective value, and the convergence record."""

    a: AliceState
    b: FiducialState
    lam: float
    lambda_trajectory: tuple
    iterations: int
    converged: bool

    def to_json(self) -> dict:
        return {
            "n": self.a.n,
            "lambda": self.lam,
            "iterations": self.iterations,
            "converged": self.converged,
            "lambda_trajectory": list(self.lambda_trajectory),
            "alice": self.a.to_json(),
            "fiducial": self.b.to_json(),
        }


@dataclass(frozen=True)
class SweepRow:
    """One level size in a sweep: n, d = n^2, objective value, per-axis error."""

    n: int
    d: int
    lam: float
    mse_per_axis: float
    converged: bool

    def __post_init__(self):
        if self.d != self.n * self.n:
            raise ValueError("d must equal n^2")


def _gauge_fixed(vec: np.ndarray) -> np.ndarray:
    """Rotate the global phase so the largest-magnitude component is real positive."""
    pivot = int(np.argmax(np.abs(vec)))
    phase = vec[pivot]
    if abs(phase) == 0.0:
        return vec
    return vec * (np.conj(phase) / abs(phase))


def top_eigenpair(m: ObjectiveMatrix) -> tuple[float, AliceState]:
    """Largest eigenvalue and a unit eigenvector, phase-gauged."""
    w, v = np.linalg.eigh(m.matrix)
    vec = _gauge_fixed(v[:, -1])
    return float(w[-1]), AliceState(m.n, vec)


def b_from_a(a: AliceState) -> FiducialState:
    """Per-block renormalized copy of the sender amplitudes.

    Blocks with no weight (norm below 1e-14) are set to the uniform vector and
    recorded in uniform_filled_blocks; the fixed-point relation leaves them
    unconstrained.
    """
    vec = np.array(a.a, dtype=complex)
    filled = []
    for j in range(a.n):
        sl = block_slice(j)
        nrm = np.linalg.norm(vec[sl])
        if nrm < 1e-14:
            vec[sl] = 1.0 / math.sqrt(2 * j + 1)
            filled.append(j)
        else:
            vec[sl] /= nrm
    return FiducialState(a.n, vec, uniform_filled_blocks=tuple(filled))


def _initial_fiducial(init, n: int, rng: np.random.Generator) -> FiducialState:
    if isinstance(init, FiducialState):
        if init.n != n:
            raise ValueError("initial fiducial state has wrong n")
        return init
    if init == "uniform":
        return FiducialState.uniform(n)
    if init == "random":
        return FiducialState.random(n, rng)
    raise ValueError(f"unknown init {init!r}")


def fixed_point_optimize(
    tensor: SparseCoefficientTensor,
    n: int,
    init="uniform",
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    seed: int | None = None,
) -> OptimizationResult:
    """Alternate eigenvector extraction and per-block renormalization.

    Stops once the objective value moves by less than tol and the gauge-fixed
    sender state by less than sqrt(tol) between rounds; otherwise runs to
    max_iter and reports converged=False. A decrease of the trajectory beyond
    1e-9 aborts: the quadratic form must make that impossible.
    """
    if tol <= 0 or max_iter < 1:
        raise ValueError("tol must be positive and max_iter >= 1")
    rng = np.random.default_rng(seed)
    b = _initial_fiducial(init, n, rng)
    lam_prev = None
    a_prev = None
    trajectory = []
    converged = False
    iterations = 0
    for iterations in range(1, max_iter + 1):
        m = build_m(tensor, b)
        w, v = np.linalg.eigh(m.matrix)
        lam = float(w[-1])
        vec = v[:, -1]
        # inside a degenerate top eigenspace, stay close to the previous state
        top = np.nonzero(w > lam - 1e-12)[0]
        if a_prev is not None and top.size > 1:
            proj = v[:, top] @ (v[:, top].conj().T @ a_prev)
            nrm = np.linalg.norm(proj)
            if nrm > 1e-8:
                vec = proj / nrm
        vec = _gauge_fixed(vec)
        if lam_prev is not None and lam < lam_prev - DECREASE_ABORT:
            raise RuntimeError(
                f"objective decreased from {lam_prev!r} to {lam!r} at iteration "
                f"{iterations}; trajectory: {trajectory + [lam]}"
            )
        trajectory.append(lam)
        if (
            lam_prev is not None
            and abs(lam - lam_prev) < tol
            and np.linalg.norm(vec - a_prev) < math.sqrt(tol)
        ):
            converged = True
            a_prev, lam_prev = vec, lam
            b = b_from_a(AliceState(n, vec))
            break
        a_prev, lam_prev = vec, lam
        b = b_from_a(AliceState(n, vec))
    a = AliceState(n, a_prev)
    lam_final = expected_value(build_m(tensor, b), a)
    return OptimizationResult(
        a=a,
        b=b,
        lam=lam_final,
        lambda_trajectory=tuple(trajectory),
        iterations=iterations,
        converged=converged,
    )


def z_sector_matrix(n: int, m: int) -> np.ndarray:
    """Tridiagonal z-objective block for magnetic number m, blocks j >= |m|."""
    js = list(range(abs(m), n))
    mat = np.zeros((len(js), len(js)))
    for i, j in enumerate(js):
        for i2, k in enumerate(js):
            if abs(j - k) <= 1:
                mat[i, i2] = g_element(j, k, m, m)
    return mat


def optimize_z_single_m(n: int, m: int) -> OptimizationResult:
    """z-axis optimum restricted to one magnetic number.

    The z tensor couples equal magnetic numbers only, so fixing m reduces the
    problem to the tridiagonal block of couplings between adjacent j; the top
    eigenvector embeds as a full state pair concentrated at that m.
    """
    if abs(m) > n - 1:
        raise ValueError(f"|m| must be <= n-1, got m={m}, n={n}")
    sector = z_sector_matrix(n, m)
    w, v = np.linalg.eigh(sector)
    lam = float(w[-1])
    vec_sector = _gauge_fixed(v[:, -1])
    a_vec = np.zeros(total_dim(n), dtype=complex)
    b_vec = np.zeros(total_dim(n), dtype=complex)
    for i, j in enumerate(range(abs(m), n)):
        a_vec[flat_index(j, m)] = vec_sector[i]
        b_vec[flat_index(j, m)] = 1.0
    # blocks below |m| cannot hold this magnetic number; they carry no sender
    # weight, so give them the uniform fiducial vector
    filled = tuple(range(abs(m)))
    for j in filled:
        b_vec[block_slice(j)] = 1.0 / math.sqrt(2 * j + 1)
    return OptimizationResult(
        a=AliceState(n, a_vec),
        b=FiducialState(n, b_vec, uniform_filled_blocks=filled),
        lam=lam,
        lambda_trajectory=(lam,),
        iterations=1,
        converged=True,
    )


def _unpack_search_vector(x: np.ndarray, n: int) -> tuple[AliceState, FiducialState] | None:
    # line searches may probe wild points; anything non-normalizable is rejected
    if not np.all(np.isfinite(x)):
        return None
    d = total_dim(n)
    a_raw = x[:d] + 1j * x[d : 2 * d]
    b_raw = x[2 * d : 3 * d] + 1j * x[3 * d :]
    a_norm = np.linalg.norm(a_raw)
    if not np.isfinite(a_norm) or a_norm < 1e-12:
        return None
    a = AliceState(n, a_raw / a_norm)
    b_vec = np.empty_like(b_raw)
    for j in range(n):
        sl = block_slice(j)
        nrm = np.linalg.norm(b_raw[sl])
        if not np.isfinite(nrm) or nrm < 1e-12:
            return None
        b_vec[sl] = b_raw[sl] / nrm
    return a, FiducialState(n, b_vec)


def direct_search_optimize(
    tensor: SparseCoefficientTensor,
    n: int,
    restarts: int = 4,
    seed: int = 0,
) -> OptimizationResult:
    """Powell-style direct search over unconstrained real and imaginary parts.

    Validation oracle for small n (n <= 4): every evaluation projects onto the
    normalization constraints, so the search explores exactly the admissible
    set without needing the fixed-point structure.
    """
    if n > 4:
        raise ValueError("direct search is a small-n validation tool (n <= 4)")
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    rng = np.random.default_rng(seed)
    d = total_dim(n)

    def negated(x):
        pair = _unpack_search_vector(x, n)
        if pair is None:
            return 1e6
        a, b = pair
        return -expected_value(build_m(tensor, b), a)

    best = None
    best_pair = None
    evaluations = 0
    values = []
    for _ in range(restarts):
        x0 = rng.standard_normal(4 * d)
        with np.errstate(over="ignore", invalid="ignore"):
            res = minimize(
                negated,
                x0,
                method="Powell",
                options={"maxiter": 20000, "xtol": 1e-10, "ftol": 1e-13},
            )
        evaluations += int(res.nfev)
        values.append(-float(res.fun))
        if best is None or res.fun < best.fun:
            best = res
            best_pair = _unpack_search_vector(res.x, n)
    a, b = best_pair
    return OptimizationResult(
        a=a,
        b=b,
        lam=float(-best.fun),
        lambda_trajectory=tuple(values),
        iterations=evaluations,
        converged=bool(best.success),
    )


def sweep(
    objective: Objective,
    n_from: int,
    n_to: int,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    restarts: int = 3,
    seed: int = 0,
) -> list[SweepRow]:
    """Best fixed-point result per n, uniform init plus seeded random restarts."""
    if n_from < 1 or n_to < n_from:
        raise ValueError("need 1 <= n_from <= n_to")
    rows = []
    for n in range(n_from, n_to + 1):
        tensor = cached_tensor(objective, n - 1)
        best = fixed_point_optimize(tensor, n, init="uniform", tol=tol, max_iter=max_iter)
        for restart in range(restarts):
            candidate = fixed_point_optimize(
                tensor, n, init="random", tol=tol, max_iter=max_iter,
                seed=seed * 1000 + n * 10 + restart,
            )
            if candidate.lam > best.lam:
                best = candidate
        rows.append(
            SweepRow(
                n=n,
                d=n * n,
                lam=best.lam,
                mse_per_axis=mse_per_axis_from_lambda(best.lam, objective),
                converged=best.converged,
            )
        )
    return rows


def fit_asymptote(rows: list[SweepRow], n_min_for_fit: int) -> tuple[float, float]:
    """Least-squares power law mse = prefactor * d**exponent over rows with n >= n_min."""
    used = [row for row in rows if row.n >= n_min_for_fit]
    if len(used) < 3:
        raise ValueError("need at least 3 rows at or above n_min_for_fit")
    log_d = np.log([row.d for row in used])
    log_mse = np.log([row.mse_per_axis for row in used])
    exponent, intercept = np.polyfit(log_d, log_mse, 1)
    return float(np.exp(intercept)), float(exponent)
