"""Reference reconstruction methods for benchmark comparison.

Two standard approaches to low-rank state estimation from expectation
values y_m = Tr(E_m rho): projected gradient descent on the factorized
model rho = AA^H (rank fixed, trace relaxed to ||A||_F <= 1), and an
accelerated proximal solve of the nuclear-norm-penalized least-squares
surrogate of the constrained trace-norm program. Both finish with the
same physicality projection as the main pipeline.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidRankError, ShapeError, StepSizeError
from .measure import MeasurementRecord
from .patterns import SelectionPattern
from .qcore import project_to_physical
from .reconstruct import ReconstructionResult

__all__ = [
    "BMConfig",
    "NuclearConfig",
    "bm_qst",
    "nuclear_qst",
    "bm_objective_and_gradient",
    "matched_budget",
]


@dataclass(frozen=True)
class BMConfig:
    """Settings for the factorized least-squares solver.

    step_rule is "backtracking" (shrink by beta until the Armijo
    condition with constant armijo_c holds, starting from step_size) or
    "fixed" (constant step_size). seed controls the Gaussian start.

    The default iteration budget is deliberately modest. This solver is
    a plain first-order method kept as a comparison baseline; raise
    max_iter (a few hundred) when a fully converged factorization is
    the goal rather than a benchmark point.
    """

    rank: int
    max_iter: int = 25
    grad_tol: float = 1e-7
    step_rule: str = "backtracking"
    step_size: float = 1.0
    beta: float = 0.5
    armijo_c: float = 1e-4
    seed: int = 0

    def __post_init__(self):
        if self.rank < 1:
            raise InvalidRankError(f"rank {self.rank} must be at least 1")
        if self.grad_tol <= 0 or self.step_size <= 0:
            raise ShapeError("tolerances and step sizes must be positive")
        if self.step_rule not in ("backtracking", "fixed"):
            raise ShapeError(f"unknown step rule {self.step_rule!r}")
        if not (0 < self.beta < 1):
            raise ShapeError("beta must lie in (0, 1)")


@dataclass(frozen=True)
class NuclearConfig:
    """Settings for the nuclear-norm surrogate solver.

    mu = None selects the weight per instance on a 5-point logarithmic
    grid against a held-out tenth of the measurements.
    """

    mu: float = None
    max_iter: int = 500
    obj_tol: float = 1e-9

    def __post_init__(self):
        if self.mu is not None and not self.mu > 0:
            raise ShapeError("mu must be positive")
        if self.obj_tol < 0:
            raise ShapeError("obj_tol must be nonnegative")


def _stacked(rec: MeasurementRecord):
    if not rec.observables:
        raise ShapeError("measurement record is empty")
    E = np.stack([o.data for o in rec.observables])
    return E, np.asarray(rec.outcomes, dtype=float)


def bm_objective_and_gradient(rec: MeasurementRecord, A: np.ndarray):
    """Objective ||y - M(AA^H)||^2 and its real-pair gradient 4 sum g_m E_m A.

    The gradient is the derivative with respect to the stacked real and
    imaginary parts of A: entrywise Re/Im of the returned matrix match
    the partial derivatives in those coordinates.
    """
    E, y = _stacked(rec)
    A = np.asarray(A, dtype=complex)
    g = np.einsum("mij,ji->m", E, A @ A.conj().T).real - y
    grad = 4.0 * (np.tensordot(g, E, axes=(0, 0)) @ A)
    return float(g @ g), grad


def _trace_ball_projection(A: np.ndarray) -> np.ndarray:
    nrm = np.linalg.norm(A)
    return A / nrm if nrm > 1.0 else A


def bm_qst(rec: MeasurementRecord, cfg: BMConfig) -> ReconstructionResult:
    """Projected gradient descent on the factorized model rho = AA^H.

    Starts from a Gaussian A scaled onto the constraint sphere, projects
    onto ||A||_F <= 1 after every step, and stops when the Euclidean
    gradient norm falls below grad_tol or the iteration budget runs out.
    """
    E, y = _stacked(rec)
    D = rec.dim
    M = len(y)
    rng = np.random.default_rng(cfg.seed)
    A = rng.standard_normal((D, cfg.rank)) + 1j * rng.standard_normal((D, cfg.rank))
    A /= np.linalg.norm(A)

    def objective(mat):
        g = np.einsum("mij,ji->m", E, mat @ mat.conj().T).real - y
        return float(g @ g), g

    f, g = objective(A)
    f0 = f
    iterations = 0
    converged = False
    grad_norm = float("inf")
    for iterations in range(1, cfg.max_iter + 1):
        grad = 4.0 * (np.tensordot(g, E, axes=(0, 0)) @ A)
        grad_norm = float(np.linalg.norm(grad))
        if grad_norm <= cfg.grad_tol:
            converged = True
            break
        if cfg.step_rule == "fixed":
            # overflow here is the divergence signal, not an error
            with np.errstate(over="ignore", invalid="ignore"):
                A = _trace_ball_projection(A - cfg.step_size * grad)
                f, g = objective(A)
            if not np.isfinite(f):
                raise StepSizeError(
                    f"objective diverged at step {cfg.step_size}; use backtracking")
        else:
            t = cfg.step_size
            accepted = False
            while t > 1e-14:
                cand = _trace_ball_projection(A - t * grad)
                f_new, g_new = objective(cand)
                if np.isfinite(f_new) and f_new <= f - cfg.armijo_c * t * grad_norm ** 2:
                    A, f, g = cand, f_new, g_new
                    accepted = True
                    break
                t *= cfg.beta
            if not accepted:
                # no step length makes progress: numerically stationary
                break

    raw = A @ A.conj().T
    diagnostics = {
        "objective_initial": f0,
        "objective_final": f,
        "grad_norm_final": grad_norm,
        "iterations": iterations,
        "converged": converged,
        "budget": M,
    }
    return ReconstructionResult(project_to_physical(raw), raw, "bm", diagnostics)


def _eig_soft_threshold(W: np.ndarray, tau: float):
    w, V = np.linalg.eigh((W + W.conj().T) / 2)
    thr = np.sign(w) * np.maximum(np.abs(w) - tau, 0.0)
    return (V * thr) @ V.conj().T, float(np.abs(thr).sum())


def _lipschitz(E: np.ndarray) -> float:
    # largest eigenvalue of X -> M^adj(M(X)), exactly, via the Gram
    # matrix of the flattened observables (M is small, D^2 may not be)
    V = E.reshape(E.shape[0], -1)
    gram = V @ V.conj().T
    lam = float(np.linalg.eigvalsh(gram)[-1])
    return max(lam, np.finfo(float).tiny)


def _fista(E, y, mu, max_iter, obj_tol):
    D = E.shape[1]
    step = 1.0 / (2.0 * _lipschitz(E) * 1.01)
    X = np.zeros((D, D), dtype=complex)
    Z = X
    t_k = 1.0
    f_prev = None
    nuc = 0.0
    converged = False
    iterations = 0
    for iterations in range(1, max_iter + 1):
        g = np.einsum("mij,ji->m", E, Z).real - y
        grad = 2.0 * np.tensordot(g, E, axes=(0, 0))
        X_new, nuc = _eig_soft_threshold(Z - step * grad, step * mu)
        t_next = (1.0 + np.sqrt(1.0 + 4.0 * t_k * t_k)) / 2.0
        Z = X_new + ((t_k - 1.0) / t_next) * (X_new - X)
        X, t_k = X_new, t_next
        r = np.einsum("mij,ji->m", E, X).real - y
        f = float(r @ r) + mu * nuc
        if f_prev is not None and abs(f_prev - f) <= obj_tol * max(1.0, abs(f)):
            converged = True
            f_prev = f
            break
        f_prev = f
    return X, f_prev, converged, iterations


def nuclear_qst(rec: MeasurementRecord, cfg: NuclearConfig) -> ReconstructionResult:
    """Accelerated proximal solve of the nuclear-norm surrogate.

    Minimizes ||y - M(X)||^2 + mu ||X||_* over Hermitian X with
    eigenvalue soft-thresholding as the proximal step. Non-convergence
    within max_iter is reported in the diagnostics, not raised.
    """
    E, y = _stacked(rec)
    mu_grid = []
    holdout_errors = []
    if cfg.mu is not None:
        mu = float(cfg.mu)
    else:
        ref = float(np.max(np.abs(np.linalg.eigvalsh(
            np.tensordot(y, E, axes=(0, 0))))))
        mu_grid = list(ref * np.logspace(-3.0, 1.0, 5))
        hold = np.arange(len(y)) % 10 == 0
        if hold.all():
            mu = mu_grid[0]
        else:
            for cand in mu_grid:
                Xc, _, _, _ = _fista(E[~hold], y[~hold], cand, cfg.max_iter, cfg.obj_tol)
                resid = np.einsum("mij,ji->m", E[hold], Xc).real - y[hold]
                holdout_errors.append(float(resid @ resid))
            mu = mu_grid[int(np.argmin(holdout_errors))]

    X, f_final, converged, iterations = _fista(E, y, mu, cfg.max_iter, cfg.obj_tol)
    diagnostics = {
        "mu": mu,
        "mu_grid": tuple(mu_grid),
        "holdout_errors": tuple(holdout_errors),
        "objective_final": f_final,
        "iterations": iterations,
        "converged": converged,
        "budget": len(y),
    }
    return ReconstructionResult(project_to_physical(X), X, "nuclear", diagnostics)


def matched_budget(D: int, pattern: SelectionPattern) -> int:
    """Observable count equalizing budgets across acquisition styles.

    Twice the unique strictly-upper cells of the pattern (real and
    imaginary parts) plus the D diagonal settings.
    """
    upper = set()
    for b in pattern.blocks:
        for r in b.indices:
            for c in b.indices:
                if r < c:
                    upper.add((r, c))
    return 2 * len(upper) + D
