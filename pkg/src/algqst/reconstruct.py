"""End-to-end reconstruction from observed principal submatrices.

The pipeline: per-block truncated eigendecompositions, padded-basis
fusion into a global column-space estimate, then one of two finishing
solves. The columnwise solve recovers each column of the state from its
observed entries through the restricted basis; the eigenvalue solve fits
the R eigenvalues to every observed cell at once. A final projection
returns a valid state regardless of noise.
"""

from __future__ import annotations

import json
from contextlib import contextmanager
from dataclasses import dataclass, field
from types import MappingProxyType

import numpy as np

from .errors import (
    AlgQSTError,
    DegenerateEigenvalueSystemError,
    IllConditionedColumnError,
    InvalidStateError,
    ShapeError,
    UnderDeterminedColumnError,
)
from .qcore import DensityMatrix, _freeze, project_to_physical, save_density
from .subspace import (
    SubspaceEstimate,
    block_top_eigvecs,
    global_subspace_dense,
    global_subspace_matfree,
    padded_basis,
)

__all__ = [
    "EigenvalueEstimate",
    "ReconstructionOptions",
    "ReconstructionResult",
    "complete_columns",
    "estimate_eigenvalues",
    "algebraic_qst",
    "save_result",
]

_COND_LIMIT = 1e8


@dataclass(frozen=True)
class EigenvalueEstimate:
    """Fitted spectrum for the rank-R model UDiag(values)U^H."""

    values: np.ndarray = field(repr=False)
    trace_residual: float = 0.0

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float).copy()
        if vals.ndim != 1:
            raise ShapeError(f"values must be a vector, got shape {vals.shape}")
        if not np.all(np.isfinite(vals)):
            raise InvalidStateError("eigenvalue estimate contains non-finite values")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)


@dataclass(frozen=True)
class ReconstructionOptions:
    """Knobs for :func:`algebraic_qst`.

    method picks the finishing solve ("columnwise" or "eigenvalue").
    subspace_solver is "auto" (dense below dense_threshold, matrix-free
    at or above), "dense", or "matfree". clip_eigenvalues applies only to
    the eigenvalue method.
    """

    method: str = "columnwise"
    subspace_solver: str = "auto"
    dense_threshold: int = 128
    matfree_tol: float = 1e-10
    matfree_max_iter: int = 500
    clip_eigenvalues: bool = True

    def __post_init__(self):
        if self.method not in ("columnwise", "eigenvalue"):
            raise ShapeError(f"unknown method {self.method!r}")
        if self.subspace_solver not in ("auto", "dense", "matfree"):
            raise ShapeError(f"unknown subspace solver {self.subspace_solver!r}")


@dataclass(frozen=True)
class ReconstructionResult:
    """A physical estimate plus the raw pre-projection matrix."""

    rho_hat: DensityMatrix
    raw_estimate: np.ndarray = field(repr=False)
    method: str = "columnwise"
    diagnostics: object = None

    def __post_init__(self):
        object.__setattr__(self, "raw_estimate", _freeze(self.raw_estimate))
        diag = dict(self.diagnostics) if self.diagnostics else {}
        object.__setattr__(self, "diagnostics", MappingProxyType(diag))


def _basis_matrix(U) -> np.ndarray:
    return U.basis if isinstance(U, SubspaceEstimate) else np.asarray(U, dtype=complex)


def complete_columns(U, subs) -> np.ndarray:
    """Recover the full matrix column by column through the global basis.

    For each column c, the entries observed in blocks containing c give a
    least-squares system (S^T U) x = observed values; the estimated
    column is U x. Every block contributes its own rows, so a cell seen
    through several blocks enters once per block.
    """
    Um = _basis_matrix(U)
    D, R = Um.shape
    rho = np.zeros((D, D), dtype=complex)
    for c in range(D):
        vals, parts, covered = [], [], set()
        for s in subs:
            idx = s.indices.zero_based()
            pos = np.nonzero(idx == c)[0]
            if len(pos):
                parts.append(Um[idx, :])
                vals.append(s.data[:, pos[0]])
                covered.update(idx.tolist())
        if len(covered) < R:
            raise UnderDeterminedColumnError(c + 1)
        A = np.vstack(parts)
        sv = np.linalg.svd(A, compute_uv=False)
        if sv[-1] == 0 or sv[0] / sv[-1] > _COND_LIMIT:
            raise IllConditionedColumnError(c + 1)
        x, *_ = np.linalg.lstsq(A, np.concatenate(vals), rcond=None)
        rho[:, c] = Um @ x
    return rho


def estimate_eigenvalues(U, subs, clip_and_renormalize: bool = True) -> EigenvalueEstimate:
    """Fit the R model eigenvalues to every observed cell.

    Each observed cell (r, c) contributes the equation
    (U[r, :] * conj(U[c, :])) lam = observed value; real and imaginary
    parts are stacked into one real least-squares problem since lam is
    real. Negative entries are clipped and the sum renormalized to one
    unless disabled.
    """
    Um = _basis_matrix(U)
    R = Um.shape[1]
    rows, rhs = [], []
    for s in subs:
        idx = s.indices.zero_based()
        for i, r in enumerate(idx):
            for j, c in enumerate(idx):
                rows.append(Um[r, :] * np.conj(Um[c, :]))
                rhs.append(s.data[i, j])
    if len(rows) < R:
        raise DegenerateEigenvalueSystemError(
            f"{len(rows)} observed cells cannot determine {R} eigenvalues")
    A = np.array(rows)
    y = np.array(rhs)
    Ar = np.vstack([A.real, A.imag])
    yr = np.concatenate([y.real, y.imag])
    if np.linalg.matrix_rank(Ar) < R:
        raise DegenerateEigenvalueSystemError(
            f"design matrix rank below {R}; cells do not separate the eigenvalues")
    lam, *_ = np.linalg.lstsq(Ar, yr, rcond=None)
    residual = abs(float(lam.sum()) - 1.0)
    if clip_and_renormalize:
        lam = np.clip(lam, 0.0, None)
        if lam.sum() > 0:
            lam = lam / lam.sum()
    return EigenvalueEstimate(lam, residual)


def _align_to_eigenbasis(Um: np.ndarray, subs) -> np.ndarray:
    """Rotate a column-space basis onto the model eigenbasis.

    The fused basis fixes only the span; the diagonal model
    U diag(lam) U^H additionally needs eigenvector-aligned columns. This
    fits the full Hermitian compression B (rho ~ U B U^H) to the observed
    cells by real least squares and returns U rotated by B's descending
    eigenvectors. Noiseless, B is exactly U^H rho U.
    """
    R = Um.shape[1]
    pairs = [(k, l) for k in range(R) for l in range(k + 1, R)]
    rows, rhs = [], []
    for s in subs:
        idx = s.indices.zero_based()
        for i, r in enumerate(idx):
            for j, c in enumerate(idx):
                outer = Um[r, :, None] * np.conj(Um[c, None, :])
                row = np.empty(R * R, dtype=complex)
                row[:R] = np.diagonal(outer)
                for q, (k, l) in enumerate(pairs):
                    row[R + q] = outer[k, l] + outer[l, k]
                    row[R + len(pairs) + q] = 1j * (outer[k, l] - outer[l, k])
                rows.append(row)
                rhs.append(s.data[i, j])
    A = np.array(rows)
    y = np.array(rhs)
    theta, *_ = np.linalg.lstsq(np.vstack([A.real, A.imag]),
                                np.concatenate([y.real, y.imag]), rcond=None)
    B = np.zeros((R, R), dtype=complex)
    B[np.arange(R), np.arange(R)] = theta[:R]
    for q, (k, l) in enumerate(pairs):
        B[k, l] = theta[R + q] + 1j * theta[R + len(pairs) + q]
        B[l, k] = np.conj(B[k, l])
    w, W = np.linalg.eigh(B)
    return Um @ W[:, np.argsort(w)[::-1]]


@contextmanager
def _stage(name):
    # re-raise with the pipeline stage prepended, keeping type and payload
    try:
        yield
    except AlgQSTError as e:
        detail = e.args[0] if e.args else e.__class__.__name__
        e.args = (f"stage {name}: {detail}",) + e.args[1:]
        raise


def algebraic_qst(subs, R: int, options: ReconstructionOptions = None) -> ReconstructionResult:
    """Full pipeline from observed submatrices to a physical state estimate.

    Fuses per-block eigenbases into a global subspace (dense SVD below
    the size threshold, matrix-free iteration above), finishes with the
    configured solve, and projects onto the physical set. Errors from any
    stage carry the stage name.
    """
    opts = options or ReconstructionOptions()
    if not subs:
        raise ShapeError("need at least one observed submatrix")
    D = max(b.indices.indices[-1] for b in subs)

    locals_, eigvals, gaps = [], [], []
    with _stage("block_eigvecs"):
        for s in subs:
            u, w = block_top_eigvecs(s, R)
            locals_.append(u)
            eigvals.append(w)
            full = np.linalg.eigvalsh(s.data)
            gaps.append(float(full[-R] - full[-R - 1]) if len(full) > R else float("inf"))
    delta_estimate = float(min(w[-1] for w in eigvals))

    with _stage("padded_basis"):
        bases = [padded_basis(u, s.indices, D) for u, s in zip(locals_, subs)]

    use_dense = opts.subspace_solver == "dense" or (
        opts.subspace_solver == "auto" and D < opts.dense_threshold)
    with _stage("global_subspace"):
        if use_dense:
            est = global_subspace_dense(bases, R, block_eigvals=eigvals)
        else:
            est = global_subspace_matfree(bases, R, tol=opts.matfree_tol,
                                          max_iter=opts.matfree_max_iter,
                                          block_eigvals=eigvals)

    diagnostics = {
        "method": opts.method,
        "subspace_solver": "dense" if use_dense else "matfree",
        "delta_estimate": delta_estimate,
        "block_gaps": tuple(gaps),
        "subspace_warnings": est.warnings,
    }
    if opts.method == "columnwise":
        with _stage("columnwise_ls"):
            raw = complete_columns(est, subs)
    else:
        with _stage("eigenvalue_ls"):
            # the fused basis fixes only the span; align columns first so
            # the diagonal model can represent the state
            aligned = _align_to_eigenbasis(est.basis, subs)
            lam_est = estimate_eigenvalues(aligned, subs, opts.clip_eigenvalues)
            raw = (aligned * lam_est.values) @ aligned.conj().T
            diagnostics["trace_residual"] = lam_est.trace_residual

    diagnostics["block_fit_fro"] = tuple(
        float(np.linalg.norm(raw[np.ix_(s.indices.zero_based(), s.indices.zero_based())]
                             - s.data)) for s in subs)

    with _stage("physicality_projection"):
        rho_hat = project_to_physical(raw)
    return ReconstructionResult(rho_hat, raw, opts.method, diagnostics)


def save_result(res: ReconstructionResult, state_path: str, diagnostics_path: str) -> None:
    """Write the physical estimate and a JSON diagnostics companion."""
    save_density(res.rho_hat, state_path)

    def clean(v):
        if isinstance(v, (tuple, list)):
            return [clean(x) for x in v]
        if isinstance(v, np.ndarray):
            return [clean(x) for x in v.tolist()]
        if isinstance(v, (np.floating, np.integer)):
            return v.item()
        return v

    payload = {k: clean(v) for k, v in res.diagnostics.items()}
    payload["method"] = res.method
    with open(diagnostics_path, "w") as fh:
        json.dump(payload, fh)
