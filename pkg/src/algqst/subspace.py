"""Global column-space recovery from local principal submatrices.

Each observed block contributes its top-R eigenvectors. Padding those
with identity columns on the block's complement gives orthonormal bases
whose concatenation Q_tot has the true column space as its dominant
left-singular subspace. Small problems take the dense SVD route; large
ones use a Chebyshev-filtered block iteration that touches the aggregate
projector P_tot = sum_l Q^(l) Q^(l)H only through matrix-vector products.

The action of P_tot splits as diag(w) + sum_l S_l u^(l) u^(l)H S_l^T with
w_i = L - (number of blocks covering row i), so one application costs
O(R sum|r_l| + D) instead of O(D^2). The spectrum lies inside
[max(0, L - cmax), L], which fixes the Chebyshev damping interval a
priori; cmax is the largest cover count.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import (
    AmbiguousSubspaceWarning,
    BoundInapplicableError,
    InsufficientBlockSizeError,
    InvalidBasisError,
    NonConvergedError,
    ShapeError,
)
from .measure import ObservedSubmatrix
from .patterns import IndexSet
from .qcore import _freeze

__all__ = [
    "PaddedBasis",
    "SubspaceEstimate",
    "ErrorBudget",
    "block_top_eigvecs",
    "padded_basis",
    "global_subspace_dense",
    "global_subspace_matfree",
    "chordal_distance",
    "subspace_error_bound",
    "perblock_projector_bound",
    "save_basis",
    "load_basis",
]

_GRAM_TOL = 1e-10
_TIE_TOL = 1e-10


@dataclass(frozen=True)
class PaddedBasis:
    """Local block basis embedded in the ambient dimension.

    Holds the structured form of [S_{r} u, S_{r^c}]: the local basis on
    the block rows plus identity columns on the complement. The dense
    D x (R + |r^c|) matrix is materialized on demand only.
    """

    block_indices: IndexSet
    local_basis: np.ndarray = field(repr=False)
    complement_indices: IndexSet
    ambient_dim: int

    def __post_init__(self):
        u = _freeze(self.local_basis)
        if u.ndim != 2 or u.shape[0] != len(self.block_indices):
            raise ShapeError(f"local basis shape {u.shape} does not match "
                             f"{len(self.block_indices)} block rows")
        gram = u.conj().T @ u
        dev = np.max(np.abs(gram - np.eye(u.shape[1])))
        if dev > _GRAM_TOL:
            raise InvalidBasisError(f"local basis Gram deviation {dev:.3e}")
        both = set(self.block_indices) | set(self.complement_indices)
        if (both != set(range(1, self.ambient_dim + 1))
                or set(self.block_indices) & set(self.complement_indices)):
            raise ShapeError("block and complement must partition the index range")
        object.__setattr__(self, "local_basis", u)

    @property
    def rank(self) -> int:
        return self.local_basis.shape[1]

    def dense(self) -> np.ndarray:
        """Materialize the padded basis as a dense orthonormal matrix."""
        D = self.ambient_dim
        R = self.rank
        comp = self.complement_indices.zero_based()
        Q = np.zeros((D, R + len(comp)), dtype=complex)
        Q[self.block_indices.zero_based(), :R] = self.local_basis
        Q[comp, R + np.arange(len(comp))] = 1.0
        return Q


@dataclass(frozen=True)
class SubspaceEstimate:
    """Orthonormal D x R basis for the estimated global column space."""

    basis: np.ndarray = field(repr=False)
    block_eigvals: tuple = ()
    warnings: tuple = ()

    def __post_init__(self):
        u = _freeze(self.basis)
        if u.ndim != 2:
            raise ShapeError(f"basis must be 2-D, got shape {u.shape}")
        dev = np.max(np.abs(u.conj().T @ u - np.eye(u.shape[1])))
        if dev > _GRAM_TOL:
            raise InvalidBasisError(f"basis Gram deviation {dev:.3e}")
        object.__setattr__(self, "basis", u)
        object.__setattr__(self, "block_eigvals",
                           tuple(np.asarray(v, dtype=float) for v in self.block_eigvals))

    @property
    def rank(self) -> int:
        return self.basis.shape[1]


@dataclass(frozen=True)
class ErrorBudget:
    """Measured quantities feeding the subspace perturbation bound.

    epsilon bounds, for every block, the spectral norm of the residual
    between the rank-R truncation of the noisy block and the exact
    block; delta lower bounds the R-th eigenvalue of every noisy block;
    block_sizes are the |r_l|; sigma_min_ptot is the smallest singular
    value of the concatenated padded-basis matrix, i.e. the square root
    of the aggregate projector sum's smallest eigenvalue.
    """

    epsilon: float
    delta: float
    block_sizes: tuple
    sigma_min_ptot: float

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.block_sizes)
        if not sizes or any(s < 1 for s in sizes):
            raise ShapeError("block sizes must be a nonempty list of positive counts")
        if not (np.isfinite(self.epsilon) and np.isfinite(self.delta)
                and np.isfinite(self.sigma_min_ptot)):
            raise BoundInapplicableError("budget quantities must be finite")
        if self.epsilon < 0:
            raise BoundInapplicableError("epsilon must be nonnegative")
        object.__setattr__(self, "block_sizes", sizes)


def block_top_eigvecs(sub: ObservedSubmatrix, R: int):
    """Top-R eigenpairs of one observed block, eigenvalues descending.

    Ordering is by descending signed value: exact blocks are PSD, and on
    noisy blocks this keeps the dominant PSD directions rather than
    promoting large negative noise eigenvalues.
    """
    m = len(sub.indices)
    if m < R:
        raise InsufficientBlockSizeError(
            f"block of size {m} cannot supply a rank-{R} basis")
    w, V = np.linalg.eigh(sub.data)
    order = np.argsort(w)[::-1][:R]
    return V[:, order], w[order]


def padded_basis(local: np.ndarray, r_l: IndexSet, D: int) -> PaddedBasis:
    """Embed a local block basis: [S_{r_l} u, S_{r_l^c}] in structured form."""
    if not isinstance(r_l, IndexSet):
        r_l = IndexSet(tuple(r_l))
    if r_l.indices and r_l.indices[-1] > D:
        raise ShapeError(f"block index {r_l.indices[-1]} exceeds dimension {D}")
    comp = IndexSet(tuple(sorted(set(range(1, D + 1)) - set(r_l.indices))))
    return PaddedBasis(r_l, np.asarray(local, dtype=complex), comp, D)


def _check_bases(bases) -> tuple:
    if not bases:
        raise ShapeError("need at least one padded basis")
    D = bases[0].ambient_dim
    R = bases[0].rank
    for b in bases:
        if b.ambient_dim != D:
            raise ShapeError(f"mixed ambient dimensions {D} and {b.ambient_dim}")
        if b.rank != R:
            raise ShapeError(f"mixed local ranks {R} and {b.rank}")
    return D, R


def global_subspace_dense(bases, R: int, block_eigvals=()) -> SubspaceEstimate:
    """Fuse padded bases by a dense SVD of their concatenation.

    Returns the top-R left singular vectors of Q_tot = [Q^(1) ... Q^(L)].
    A singular-value tie at the cut (within 1e-10) means the subspace is
    not unique; the estimate is still returned, carrying a warning.
    """
    D, _ = _check_bases(bases)
    q_tot = np.hstack([b.dense() for b in bases])
    if R < 1 or R > min(q_tot.shape):
        raise ShapeError(f"rank {R} outside [1, {min(q_tot.shape)}]")
    U, s, _ = np.linalg.svd(q_tot, full_matrices=False)
    notes = ()
    if len(s) > R and s[R - 1] - s[R] < _TIE_TOL:
        msg = (f"singular values {R} and {R + 1} of the concatenated basis tie "
               f"within {_TIE_TOL:.0e}; the fused subspace is not unique")
        warnings.warn(AmbiguousSubspaceWarning(msg))
        notes = (msg,)
    return SubspaceEstimate(U[:, :R], tuple(block_eigvals), notes)


def _ptot_buffers(bases):
    # flattened 0-based row indices per block + stacked local bases
    D, R = _check_bases(bases)
    L = len(bases)
    idx_list = [b.block_indices.zero_based() for b in bases]
    idx_flat = np.concatenate(idx_list)
    idx_off = np.zeros(L + 1, dtype=np.intp)
    np.cumsum([len(i) for i in idx_list], out=idx_off[1:])
    u_stack = np.ascontiguousarray(np.vstack([b.local_basis for b in bases]))
    w = np.full(D, float(L))
    cover = np.zeros(D)
    for idx in idx_list:
        w[idx] -= 1.0
        cover[idx] += 1.0
    return w, idx_flat.astype(np.intp), idx_off, u_stack, int(cover.max()), L


def _make_action(bases):
    w, idx_flat, idx_off, u_stack, cmax, L = _ptot_buffers(bases)

    def act(V):
        V = np.ascontiguousarray(V, dtype=np.complex128)
        return kernels.ptot_apply(V, w, idx_flat, idx_off, u_stack)

    return act, cmax, L


def global_subspace_matfree(bases, R: int, tol: float = 1e-10,
                            max_iter: int = 500, block_eigvals=(),
                            init_seed: int = 0) -> SubspaceEstimate:
    """Fuse padded bases without forming Q_tot or P_tot.

    Runs Chebyshev-filtered block subspace iteration on the aggregate
    projector action. The exact spectral enclosure [max(0, L - cmax), L]
    gives the damping interval, and the filter degree adapts to the
    Ritz-value gap each sweep. Converged when every one of the R Ritz
    pairs has residual norm at most tol.

    The eigenvalue crowding here is severe (the gap ratio behind the cut
    can sit within 1e-4 of 1), which plain subspace iteration cannot
    resolve in reasonable sweeps; the filter turns each sweep into a
    polynomial in P_tot chosen to damp exactly the unwanted interval.
    """
    D, _ = _check_bases(bases)
    if tol <= 0:
        raise ShapeError("tolerance must be positive")
    if R < 1 or R > D:
        raise ShapeError(f"rank {R} outside [1, {D}]")
    if R == D:
        return SubspaceEstimate(np.eye(D, dtype=complex), tuple(block_eigvals))

    act, cmax, L = _make_action(bases)
    rng = np.random.default_rng(init_seed)
    nb = min(R + 4, D)
    X = rng.standard_normal((D, nb)) + 1j * rng.standard_normal((D, nb))
    X, _ = np.linalg.qr(X)

    lam_hi = float(L)
    a0 = max(0.0, L - cmax)
    best_U, best_res = None, None
    for _ in range(max_iter):
        Y = act(X)
        H = X.conj().T @ Y
        H = (H + H.conj().T) / 2
        theta, W = np.linalg.eigh(H)
        order = np.argsort(theta)[::-1]
        theta, W = theta[order], W[:, order]
        U = X @ W
        PU = Y @ W
        res = np.linalg.norm(PU[:, :R] - U[:, :R] * theta[:R], axis=0)
        if best_res is None or res.max() < best_res.max():
            best_U, best_res = U[:, :R], res
        if np.all(res < tol):
            return SubspaceEstimate(U[:, :R], tuple(block_eigvals))

        # damp [a0, b] just below the R-th Ritz value; degree from the
        # Chebyshev growth rate at that point
        gap = max(theta[R - 1] - theta[R], 1e-14)
        b = min(theta[R] + 0.05 * gap, lam_hi * (1 - 1e-14))
        c, h = (a0 + b) / 2, (b - a0) / 2
        t_r = (theta[R - 1] - c) / h
        acosh = math.acosh(max(t_r, 1 + 1e-15))
        deg = int(np.clip(np.ceil(6.0 / max(acosh, 1e-8)), 8, 400))
        Xp = X
        Xc = (act(X) - c * X) / h
        for k in range(deg - 1):
            Xn = 2.0 * (act(Xc) - c * Xc) / h - Xp
            Xp, Xc = Xc, Xn
            if (k + 1) % 10 == 0:
                s = np.linalg.norm(Xc, axis=0)
                s[s == 0] = 1.0
                Xc = Xc / s
                Xp = Xp / s
        X, _ = np.linalg.qr(Xc)

    raise NonConvergedError(
        f"no convergence in {max_iter} sweeps; worst residual {best_res.max():.3e}",
        best_basis=best_U, residuals=best_res)


def _as_basis(X) -> np.ndarray:
    if isinstance(X, SubspaceEstimate):
        X = X.basis
    X = np.asarray(X, dtype=complex)
    if X.ndim != 2:
        raise ShapeError(f"basis must be 2-D, got shape {X.shape}")
    dev = np.max(np.abs(X.conj().T @ X - np.eye(X.shape[1])))
    if dev > 1e-8:
        raise InvalidBasisError(f"basis Gram deviation {dev:.3e} exceeds 1e-08")
    return X


def chordal_distance(X, Y) -> float:
    """Chordal distance (1/sqrt(2))||XX^H - YY^H||_F between column spans."""
    X = _as_basis(X)
    Y = _as_basis(Y)
    if X.shape[0] != Y.shape[0]:
        raise ShapeError(f"ambient dimensions differ: {X.shape[0]} vs {Y.shape[0]}")
    diff = X @ X.conj().T - Y @ Y.conj().T
    return float(np.linalg.norm(diff) / np.sqrt(2))


def subspace_error_bound(b: ErrorBudget) -> float:
    """Chordal-distance bound for the fused subspace under block noise.

    Evaluates eps * sqrt(2 sum|r_l|) / (delta * sigma_min). Requires the
    spectral gap to dominate the noise (delta > eps >= 0) and a positive
    sigma_min; otherwise the bound is vacuous and an error is raised.
    """
    if not b.delta > b.epsilon >= 0:
        raise BoundInapplicableError(
            f"need delta > epsilon >= 0, got delta={b.delta:.3e} epsilon={b.epsilon:.3e}")
    if b.sigma_min_ptot <= 0:
        raise BoundInapplicableError("sigma_min must be positive")
    total = sum(b.block_sizes)
    return float(b.epsilon * np.sqrt(2.0 * total) / (b.delta * b.sigma_min_ptot))


def perblock_projector_bound(epsilon_fro: float, sub_pinv_norm: float) -> float:
    """Frobenius bound sqrt(2) * pinv_norm * eps for one block's projector shift."""
    return float(np.sqrt(2.0) * sub_pinv_norm * epsilon_fro)


def save_basis(est: SubspaceEstimate, path: str) -> None:
    """Debug dump of the basis in the rectangular JSON layout."""
    flat = est.basis.reshape(-1)
    payload = {
        "dim": est.basis.shape[0],
        "cols": est.basis.shape[1],
        "data": [[float(z.real), float(z.imag)] for z in flat],
    }
    with open(path, "w") as fh:
        json.dump(payload, fh)


def load_basis(path: str) -> SubspaceEstimate:
    """Read a basis written by :func:`save_basis`."""
    with open(path) as fh:
        payload = json.load(fh)
    rows, cols = int(payload["dim"]), int(payload["cols"])
    arr = np.array([complex(re, im) for re, im in payload["data"]])
    return SubspaceEstimate(arr.reshape(rows, cols))
