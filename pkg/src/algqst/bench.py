"""Seeded benchmark harness comparing reconstruction methods.

Every trial derives its randomness from (seed, method, d, trial) through
fixed spawn keys, so adding methods or step sizes never shifts another
trial's draws, trials can run in parallel in any order, and all methods
see the same random state for a given (d, trial). Wall time covers the
reconstruction call only, not state generation or measurement
simulation.
"""

from __future__ import annotations

import csv
import json
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from . import kernels
from .baselines import BMConfig, NuclearConfig, bm_qst, matched_budget, nuclear_qst
from .errors import AlgQSTError, ShapeError
from .measure import NoiseSpec, pauli_expectations, random_pauli_set, sample_submatrices
from .patterns import overlapping_block_pattern
from .qcore import fidelity, ginibre_random_state, trace_distance
from .reconstruct import ReconstructionOptions, algebraic_qst

__all__ = [
    "METHOD_IDS",
    "ExperimentConfig",
    "TrialResult",
    "run_trial",
    "run_sweep",
    "load_config",
    "CSV_HEADER",
]

METHOD_IDS = {"algebraic": 0, "bm": 1, "nuclear": 2}
CSV_HEADER = ["method", "d", "trial", "fidelity", "trace_distance", "wall_time_s", "seed"]

# spawn-key tags separating the state stream from the noise streams
_STATE_TAG = 0xA11CE
_NOISE_TAG = 0xB0B


@dataclass(frozen=True)
class ExperimentConfig:
    """One benchmark campaign.

    snr_db None (or infinity) disables noise. noise_scale multiplies the
    calibrated noise level; the default matches the reference results
    this harness reproduces. reconstruction_method picks the finishing
    solve of the main pipeline.
    """

    qubits: int = 5
    rank: int = 2
    d_values: tuple = (1, 2, 3, 4, 5, 6)
    snr_db: float = 30.0
    trials: int = 20
    methods: tuple = ("algebraic",)
    seed: int = 0
    output_path: str = "bench_out"
    noise_scale: float = 0.54
    reconstruction_method: str = "columnwise"

    def __post_init__(self):
        if self.qubits < 1:
            raise ShapeError("need at least one qubit")
        D = 2 ** self.qubits
        if not (1 <= self.rank < D):
            raise ShapeError(f"rank {self.rank} outside [1, {D - 1}]")
        if self.trials < 1:
            raise ShapeError("need at least one trial")
        d_values = tuple(int(d) for d in self.d_values)
        if not d_values or any(not (1 <= d <= D - self.rank) for d in d_values):
            raise ShapeError(f"step sizes must be nonempty and within [1, {D - self.rank}]")
        methods = tuple(self.methods)
        unknown = [m for m in methods if m not in METHOD_IDS]
        if not methods or unknown:
            raise ShapeError(f"methods must be a nonempty subset of {sorted(METHOD_IDS)}, "
                             f"got {list(self.methods)}")
        if self.noise_scale < 0:
            raise ShapeError("noise_scale must be nonnegative")
        if self.reconstruction_method not in ("columnwise", "eigenvalue"):
            raise ShapeError(f"unknown reconstruction method {self.reconstruction_method!r}")
        object.__setattr__(self, "d_values", d_values)
        object.__setattr__(self, "methods", methods)

    @property
    def noiseless(self) -> bool:
        return self.snr_db is None or math.isinf(self.snr_db)


@dataclass(frozen=True)
class TrialResult:
    """Metrics for one reconstruction; error text set when a stage failed."""

    method: str
    d: int
    trial_index: int
    fidelity: float
    trace_distance: float
    wall_time_seconds: float
    seed_used: int
    error: str = ""

    def __post_init__(self):
        if not self.error:
            if not (0.0 <= self.fidelity <= 1.0 + 1e-6):
                raise ShapeError(f"fidelity {self.fidelity} outside [0, 1]")
            if self.trace_distance < 0:
                raise ShapeError(f"negative trace distance {self.trace_distance}")


def state_seed(seed: int, d: int, trial: int) -> np.random.SeedSequence:
    """Seed for the trial's random state; shared by every method."""
    return np.random.SeedSequence(seed, spawn_key=(_STATE_TAG, d, trial))


def noise_seed(seed: int, method: str, d: int, trial: int) -> np.random.SeedSequence:
    """Seed for the trial's measurement randomness; method-specific."""
    return np.random.SeedSequence(seed, spawn_key=(_NOISE_TAG, METHOD_IDS[method], d, trial))


def run_trial(cfg: ExperimentConfig, method: str, d: int, trial_index: int) -> TrialResult:
    """Run one (method, d, trial) cell of the benchmark grid."""
    D = 2 ** cfg.qubits
    pattern = overlapping_block_pattern(D, cfg.rank, d)
    rho = ginibre_random_state(D, cfg.rank, state_seed(cfg.seed, d, trial_index))
    no_ss = noise_seed(cfg.seed, method, d, trial_index)
    seed_used = int(no_ss.generate_state(1, np.uint64)[0])

    try:
        if method == "algebraic":
            spec = (NoiseSpec("none") if cfg.noiseless else
                    NoiseSpec("gaussian_snr", cfg.snr_db, no_ss, cfg.noise_scale))
            subs = sample_submatrices(rho, pattern, spec)
            opts = ReconstructionOptions(method=cfg.reconstruction_method)
            start = time.perf_counter()
            result = algebraic_qst(subs, cfg.rank, opts)
            wall = time.perf_counter() - start
        else:
            obs_ss, meas_ss, init_ss = no_ss.spawn(3)
            budget = matched_budget(D, pattern)
            observables = random_pauli_set(cfg.qubits, budget, obs_ss)
            spec = (NoiseSpec("none") if cfg.noiseless else
                    NoiseSpec("gaussian_snr", cfg.snr_db, meas_ss, cfg.noise_scale))
            rec = pauli_expectations(rho, observables, spec)
            if method == "bm":
                bm_cfg = BMConfig(rank=cfg.rank,
                                  seed=int(init_ss.generate_state(1, np.uint64)[0]))
                start = time.perf_counter()
                result = bm_qst(rec, bm_cfg)
            else:
                start = time.perf_counter()
                result = nuclear_qst(rec, NuclearConfig())
            wall = time.perf_counter() - start
        est = result.rho_hat
        return TrialResult(method, d, trial_index, fidelity(rho, est),
                           trace_distance(rho, est), wall, seed_used)
    except AlgQSTError as e:
        return TrialResult(method, d, trial_index, float("nan"), float("nan"),
                           float("nan"), seed_used, error=str(e))


def _median_rows(results) -> list:
    keys = []
    for r in results:
        if (r.method, r.d) not in keys:
            keys.append((r.method, r.d))
    rows = []
    for method, d in keys:
        good = [r for r in results if r.method == method and r.d == d and not r.error]
        if good:
            rows.append({
                "method": method,
                "d": d,
                "median_fidelity": float(np.median([r.fidelity for r in good])),
                "median_trace_distance": float(np.median([r.trace_distance for r in good])),
                "median_wall_time_s": float(np.median([r.wall_time_seconds for r in good])),
            })
    return rows


def run_sweep(cfg: ExperimentConfig, jobs: int = 1):
    """Run the full methods x d_values x trials grid and write results.

    Writes <output_path>/trials.csv (one row per trial), medians.csv (one
    row per method and d), and summary.json. Returns the trial results
    and the median rows.
    """
    os.makedirs(cfg.output_path, exist_ok=True)
    trials_path = os.path.join(cfg.output_path, "trials.csv")
    # the sink is opened before any computation so path problems fail fast
    fh = open(trials_path, "w", newline="")
    try:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        fh.flush()

        combos = [(m, d, t) for m in cfg.methods for d in cfg.d_values
                  for t in range(cfg.trials)]
        if jobs > 1:
            with ThreadPoolExecutor(max_workers=jobs) as pool:
                results = list(pool.map(lambda c: run_trial(cfg, *c), combos))
        else:
            results = [run_trial(cfg, *c) for c in combos]

        for r in results:
            writer.writerow([r.method, r.d, r.trial_index, repr(r.fidelity),
                             repr(r.trace_distance), repr(r.wall_time_seconds),
                             r.seed_used])
    finally:
        fh.close()

    medians = _median_rows(results)
    with open(os.path.join(cfg.output_path, "medians.csv"), "w", newline="") as mf:
        mw = csv.writer(mf)
        mw.writerow(["method", "d", "median_fidelity", "median_trace_distance",
                     "median_wall_time_s"])
        for row in medians:
            mw.writerow([row["method"], row["d"], repr(row["median_fidelity"]),
                         repr(row["median_trace_distance"]),
                         repr(row["median_wall_time_s"])])

    summary = {
        "config": asdict(cfg),
        "reconstruction_method": cfg.reconstruction_method,
        "kernel_backend": kernels.backend_name(),
        "medians": medians,
        "errors": [{"method": r.method, "d": r.d, "trial": r.trial_index,
                    "error": r.error} for r in results if r.error],
    }
    with open(os.path.join(cfg.output_path, "summary.json"), "w") as sf:
        json.dump(summary, sf, indent=2)
    return results, medians


def load_config(path: str) -> ExperimentConfig:
    """Build an ExperimentConfig from a JSON file mirroring its fields."""
    with open(path) as fh:
        payload = json.load(fh)
    known = {f for f in ExperimentConfig.__dataclass_fields__}
    unknown = sorted(set(payload) - known)
    if unknown:
        raise ShapeError(f"unknown config fields {unknown}")
    if "d_values" in payload:
        payload["d_values"] = tuple(payload["d_values"])
    if "methods" in payload:
        payload["methods"] = tuple(payload["methods"])
    return ExperimentConfig(**payload)
