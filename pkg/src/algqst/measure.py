"""Measurement simulation: selective submatrix readout and Pauli expectations.

Two acquisition styles are simulated. Selective readout observes the
principal submatrices named by a pattern, one setting per distinct matrix
cell (a cell shared by overlapping blocks is measured once and its value
reused). Pauli acquisition records expectations of explicit observables.

Gaussian noise is calibrated against the signal: sigma equals the
root-mean-square of the independent real parameters of the acquisition
times 10^(-snr_db/20), optionally rescaled by `scale` to match a
different reference-power convention.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidStateError, ShapeError
from .patterns import IndexSet, SelectionPattern
from .qcore import HERMITIAN_TOL, DensityMatrix, HermitianObservable, _freeze, pauli_observable

__all__ = [
    "NoiseSpec",
    "ObservedSubmatrix",
    "MeasurementRecord",
    "sample_submatrices",
    "pauli_expectations",
    "random_pauli_set",
    "save_record",
    "save_submatrix",
    "load_submatrix",
]

_PAULI_AXES = "IXYZ"


@dataclass(frozen=True)
class NoiseSpec:
    """Noise model for simulated measurements.

    kind is "none" (exact values) or "gaussian_snr" (additive Gaussian
    noise at snr_db decibels below the signal rms). seed may be an int or
    a numpy SeedSequence; identical specs give identical noise. scale
    multiplies the calibrated sigma, default 1.0.
    """

    kind: str = "none"
    snr_db: float = 30.0
    seed: object = 0
    scale: float = 1.0

    def __post_init__(self):
        if self.kind not in ("none", "gaussian_snr"):
            raise InvalidStateError(f"unknown noise kind {self.kind!r}")
        if self.kind == "gaussian_snr" and not np.isfinite(self.snr_db):
            raise InvalidStateError("snr_db must be finite for gaussian_snr noise")
        if self.scale < 0:
            raise InvalidStateError("scale must be nonnegative")


@dataclass(frozen=True)
class ObservedSubmatrix:
    """One measured principal submatrix with its 1-based index set."""

    indices: IndexSet
    data: np.ndarray = field(repr=False)

    def __post_init__(self):
        m = len(self.indices)
        data = _freeze(self.data)
        if data.shape != (m, m):
            raise ShapeError(f"expected shape {(m, m)}, got {data.shape}")
        dev = np.max(np.abs(data - data.conj().T)) if m else 0.0
        if dev > HERMITIAN_TOL:
            raise InvalidStateError(f"submatrix Hermitian deviation {dev:.3e}")
        object.__setattr__(self, "data", data)


@dataclass(frozen=True)
class MeasurementRecord:
    """Observables paired with their (possibly noisy) expectation values."""

    observables: tuple
    outcomes: np.ndarray = field(repr=False)

    def __post_init__(self):
        obs = tuple(self.observables)
        y = np.asarray(self.outcomes, dtype=float).copy()
        if y.ndim != 1 or len(y) != len(obs):
            raise ShapeError(f"{len(obs)} observables but {y.shape} outcomes")
        dims = {o.dim for o in obs}
        if len(dims) > 1:
            raise ShapeError(f"observables mix dimensions {sorted(dims)}")
        y.setflags(write=False)
        object.__setattr__(self, "observables", obs)
        object.__setattr__(self, "outcomes", y)

    @property
    def dim(self) -> int:
        return self.observables[0].dim if self.observables else 0


def _distinct_cells(p: SelectionPattern):
    # 0-based (i, j) with i <= j, sorted; one setting per distinct cell
    cells = set()
    for b in p.blocks:
        idx = b.zero_based()
        for i in idx:
            for j in idx:
                if i <= j:
                    cells.add((int(i), int(j)))
    return sorted(cells)


def sample_submatrices(rho: DensityMatrix, p: SelectionPattern,
                       noise: NoiseSpec) -> list:
    """Observe the principal submatrices rho(r_l, r_l) named by a pattern.

    Under gaussian_snr noise every independent real parameter of the
    acquisition (diagonal reals, strict-upper real and imaginary parts,
    one per distinct cell) is perturbed by i.i.d. N(0, sigma^2) and the
    values are mirrored back onto every block, so outputs stay Hermitian
    and overlapping blocks agree on shared cells.
    """
    if p.dim != rho.dim:
        raise ShapeError(f"pattern dimension {p.dim} != state dimension {rho.dim}")
    if noise.kind == "none":
        return [ObservedSubmatrix(b, rho.data[np.ix_(b.zero_based(), b.zero_based())])
                for b in p.blocks]

    cells = _distinct_cells(p)
    vals = np.array([rho.data[i, j] for (i, j) in cells])
    diag = np.array([i == j for (i, j) in cells])
    params = np.concatenate([vals[diag].real, vals[~diag].real, vals[~diag].imag])
    sigma = noise.scale * np.sqrt(np.mean(params ** 2)) * 10 ** (-noise.snr_db / 20)
    rng = np.random.default_rng(noise.seed)
    noisy = {}
    for (i, j), v in zip(cells, vals):
        if i == j:
            noisy[(i, j)] = v.real + sigma * rng.standard_normal()
        else:
            noisy[(i, j)] = v + sigma * (rng.standard_normal() + 1j * rng.standard_normal())

    out = []
    for b in p.blocks:
        idx = b.zero_based()
        m = len(idx)
        s = np.empty((m, m), dtype=complex)
        for ii, i in enumerate(idx):
            for jj, j in enumerate(idx):
                s[ii, jj] = noisy[(i, j)] if i <= j else np.conj(noisy[(j, i)])
        out.append(ObservedSubmatrix(b, s))
    return out


def pauli_expectations(rho: DensityMatrix, observables: list,
                       noise: NoiseSpec) -> MeasurementRecord:
    """Record y_m = Re Tr(E_m rho), optionally with calibrated Gaussian noise."""
    for o in observables:
        if o.dim != rho.dim:
            raise ShapeError(f"observable dimension {o.dim} != state dimension {rho.dim}")
    y = np.array([np.einsum("ij,ji->", o.data, rho.data).real for o in observables])
    if noise.kind == "gaussian_snr" and len(y):
        sigma = noise.scale * np.sqrt(np.mean(y ** 2)) * 10 ** (-noise.snr_db / 20)
        rng = np.random.default_rng(noise.seed)
        y = y + sigma * rng.standard_normal(len(y))
    return MeasurementRecord(tuple(observables), y)


def random_pauli_set(N: int, M: int, seed) -> list:
    """Draw M uniform N-qubit Pauli observables, deterministic per seed.

    Strings are i.i.d. uniform over {I, X, Y, Z}^N with replacement,
    except the all-identity string (whose expectation is constant) is
    admitted at most once; repeats of it are redrawn.
    """
    if M < 1:
        raise ShapeError("need at least one observable")
    rng = np.random.default_rng(seed)
    out = []
    identity_used = False
    while len(out) < M:
        draw = rng.integers(0, 4, size=N)
        if not draw.any():
            if identity_used:
                continue
            identity_used = True
        out.append(pauli_observable([_PAULI_AXES[k] for k in draw]))
    return out


def save_record(rec: MeasurementRecord, path: str) -> None:
    """Write outcomes as CSV with columns (observable_id, outcome)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["observable_id", "outcome"])
        for i, y in enumerate(rec.outcomes):
            w.writerow([i, repr(float(y))])


def save_submatrix(sub: ObservedSubmatrix, path: str) -> None:
    """Write an observed submatrix as JSON with its 1-based indices."""
    payload = {
        "dim": len(sub.indices),
        "data": [[float(v.real), float(v.imag)] for v in sub.data.ravel()],
        "indices": list(sub.indices),
    }
    with open(path, "w") as fh:
        json.dump(payload, fh)


def load_submatrix(path: str) -> ObservedSubmatrix:
    """Read a submatrix written by :func:`save_submatrix`."""
    with open(path) as fh:
        payload = json.load(fh)
    m = int(payload["dim"])
    flat = np.array([complex(re, im) for re, im in payload["data"]])
    return ObservedSubmatrix(IndexSet(tuple(payload["indices"])), flat.reshape(m, m))
