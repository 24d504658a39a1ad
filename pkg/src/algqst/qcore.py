"""Core state types, random states, distance metrics, and Pauli observables.

A quantum state on N qubits is a Hermitian, positive-semidefinite,
unit-trace complex matrix of dimension D = 2^N. This module holds the
:class:`DensityMatrix` value type, the Ginibre random-state generator used
by the benchmarks, the fidelity and trace-distance metrics, and the
physicality projection applied to raw estimates.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidRankError, InvalidStateError, ShapeError

HERMITIAN_TOL = 1e-12
PSD_TOL = 1e-10
TRACE_TOL = 1e-10

_PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def _freeze(arr: np.ndarray) -> np.ndarray:
    out = np.ascontiguousarray(arr, dtype=complex)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class DensityMatrix:
    """Immutable D x D density matrix.

    Parameters
    ----------
    dim : int
        Matrix dimension D.
    data : ndarray
        Complex D x D matrix, row-major. Stored read-only.
    """

    dim: int
    data: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.dim < 1:
            raise ShapeError("dimension must be positive")
        data = _freeze(self.data)
        if data.shape != (self.dim, self.dim):
            raise ShapeError(f"expected shape {(self.dim, self.dim)}, got {data.shape}")
        object.__setattr__(self, "data", data)

    def validate(self, hermitian_tol: float = HERMITIAN_TOL,
                 psd_tol: float = PSD_TOL, trace_tol: float = TRACE_TOL) -> None:
        """Raise :class:`InvalidStateError` if any state invariant fails."""
        dev = np.max(np.abs(self.data - self.data.conj().T))
        if dev > hermitian_tol:
            raise InvalidStateError(f"Hermitian deviation {dev:.3e} exceeds {hermitian_tol:.1e}")
        tr = self.data.trace()
        if abs(tr - 1.0) > trace_tol:
            raise InvalidStateError(f"trace deviates from 1 by {abs(tr - 1.0):.3e}")
        lo = float(np.linalg.eigvalsh((self.data + self.data.conj().T) / 2).min())
        if lo < -psd_tol:
            raise InvalidStateError(f"smallest eigenvalue {lo:.3e} below -{psd_tol:.1e}")


@dataclass(frozen=True)
class HermitianObservable:
    """Immutable Hermitian D x D observable."""

    dim: int
    data: np.ndarray = field(repr=False)

    def __post_init__(self):
        data = _freeze(self.data)
        if data.shape != (self.dim, self.dim):
            raise ShapeError(f"expected shape {(self.dim, self.dim)}, got {data.shape}")
        dev = np.max(np.abs(data - data.conj().T))
        if dev > HERMITIAN_TOL:
            raise InvalidStateError(f"observable Hermitian deviation {dev:.3e}")
        object.__setattr__(self, "data", data)


def ginibre_random_state(D: int, R: int, seed) -> DensityMatrix:
    """Draw a random rank-R density matrix from the Ginibre ensemble.

    The state is G G^H / Tr(G G^H) for a D x R matrix G with independent
    standard complex Gaussian entries. The construction has rank R with
    probability 1 and is deterministic for a fixed seed.

    Parameters
    ----------
    D : int
        Dimension of the state.
    R : int
        Target rank, 1 <= R <= D.
    seed : int or numpy.random.SeedSequence
        Source of randomness; an integer gives a portable generator.
    """
    if D < 1:
        raise ShapeError("dimension must be positive")
    if R < 1 or R > D:
        raise InvalidRankError(f"rank {R} outside [1, {D}]")
    rng = np.random.default_rng(seed)
    G = rng.standard_normal((D, R)) + 1j * rng.standard_normal((D, R))
    rho = G @ G.conj().T
    rho /= rho.trace().real
    return DensityMatrix(D, rho)


def _psd_sqrt(data: np.ndarray) -> np.ndarray:
    # negative eigenvalues from rounding are clipped before the root
    w, V = np.linalg.eigh(data)
    w = np.clip(w, 0.0, None)
    return (V * np.sqrt(w)) @ V.conj().T


def _check_pair(rho: DensityMatrix, sigma: DensityMatrix, slack: float) -> None:
    if rho.dim != sigma.dim:
        raise ShapeError(f"dimension mismatch: {rho.dim} vs {sigma.dim}")
    for s in (rho, sigma):
        s.validate(hermitian_tol=slack, psd_tol=slack, trace_tol=slack)


def fidelity(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    """Squared Uhlmann fidelity (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2.

    Returns a value in [0, 1]; 1 means the states coincide. Inputs may be
    slightly unphysical (within 1e-6 of the invariants); negative
    eigenvalues are clipped to zero before the matrix square roots.
    """
    _check_pair(rho, sigma, 1e-6)
    # Tr sqrt(sqrt(rho) sigma sqrt(rho)) equals the trace norm of
    # sqrt(rho) sqrt(sigma); singular values avoid the sqrt of near-zero
    # eigenvalues that makes the direct form asymmetric at the 1e-9 level
    prod = _psd_sqrt(rho.data) @ _psd_sqrt(sigma.data)
    val = float(np.linalg.svd(prod, compute_uv=False).sum() ** 2)
    return min(val, 1.0) if val < 1.0 + 1e-6 else val


def trace_distance(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    """Trace distance (1/2)||rho - sigma||_1 between two states."""
    if rho.dim != sigma.dim:
        raise ShapeError(f"dimension mismatch: {rho.dim} vs {sigma.dim}")
    return 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(rho.data - sigma.data))))


def pauli_observable(labels) -> HermitianObservable:
    """Tensor product of single-qubit Pauli matrices.

    Parameters
    ----------
    labels : sequence of str
        Symbols from {"I", "X", "Y", "Z"}, one per qubit, most significant
        qubit first.
    """
    labels = list(labels)
    if not labels:
        raise ShapeError("label list must be nonempty")
    out = np.array([[1.0 + 0.0j]])
    for sym in labels:
        if sym not in _PAULI:
            raise ShapeError(f"unknown Pauli label {sym!r}")
        out = np.kron(out, _PAULI[sym])
    return HermitianObservable(2 ** len(labels), out)


def project_to_physical(H: np.ndarray) -> DensityMatrix:
    """Project an arbitrary matrix onto the set of valid states.

    Hermitizes, clips negative eigenvalues to zero, and renormalizes the
    trace to one. A matrix whose spectrum clips to all zeros maps to the
    maximally mixed state.
    """
    H = np.asarray(H, dtype=complex)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise ShapeError(f"expected a square matrix, got shape {H.shape}")
    H = (H + H.conj().T) / 2
    w, V = np.linalg.eigh(H)
    w = np.clip(w, 0.0, None)
    total = w.sum()
    if total == 0.0:
        return DensityMatrix(H.shape[0], np.eye(H.shape[0], dtype=complex) / H.shape[0])
    w /= total
    return DensityMatrix(H.shape[0], (V * w) @ V.conj().T)


def save_density(state: DensityMatrix, path: str) -> None:
    """Write a state as JSON: {"dim": D, "data": [[re, im], ...]} row-major."""
    flat = state.data.reshape(-1)
    payload = {"dim": state.dim, "data": [[float(z.real), float(z.imag)] for z in flat]}
    with open(path, "w") as fh:
        json.dump(payload, fh)


def load_density(path: str) -> DensityMatrix:
    """Read a state written by :func:`save_density`. Round-trips bit-exactly."""
    with open(path) as fh:
        payload = json.load(fh)
    dim = int(payload["dim"])
    data = payload["data"]
    if len(data) != dim * dim:
        raise ShapeError(f"expected {dim * dim} entries, got {len(data)}")
    arr = np.array([complex(re, im) for re, im in data]).reshape(dim, dim)
    return DensityMatrix(dim, arr)
