"""Structured observation patterns and measurement budgets.

A selection pattern lists which principal submatrices of the state are
observed. The canonical family places blocks of size R + d along the
diagonal, each shifted by d rows, so consecutive blocks overlap in R
indices. Overlap ties the local eigenspaces together; coverage of every
row makes the global column space recoverable.

Indices are 1-based throughout the public interface.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidPatternParametersError, ShapeError
from .qcore import HermitianObservable

__all__ = [
    "IndexSet",
    "SelectionPattern",
    "PatternReport",
    "overlapping_block_pattern",
    "validate_pattern",
    "settings_count_formula",
    "settings_count_enumerated",
    "entry_observables",
    "save_pattern",
    "load_pattern",
]


@dataclass(frozen=True)
class IndexSet:
    """Sorted, duplicate-free 1-based index collection."""

    indices: tuple

    def __post_init__(self):
        idx = tuple(int(i) for i in self.indices)
        if any(b <= a for a, b in zip(idx, idx[1:])):
            raise ShapeError("indices must be strictly increasing")
        if idx and idx[0] < 1:
            raise ShapeError("indices are 1-based and must be >= 1")
        object.__setattr__(self, "indices", idx)

    def __len__(self):
        return len(self.indices)

    def __iter__(self):
        return iter(self.indices)

    def zero_based(self) -> np.ndarray:
        """Indices as a 0-based integer array for slicing."""
        return np.array(self.indices, dtype=np.intp) - 1


@dataclass(frozen=True)
class SelectionPattern:
    """Ordered list of observed index sets over [1, D]."""

    dim: int
    blocks: tuple
    rank_hint: int

    def __post_init__(self):
        blocks = tuple(b if isinstance(b, IndexSet) else IndexSet(tuple(b)) for b in self.blocks)
        for b in blocks:
            if b.indices and b.indices[-1] > self.dim:
                raise ShapeError(f"block index {b.indices[-1]} exceeds dimension {self.dim}")
        object.__setattr__(self, "blocks", blocks)


@dataclass(frozen=True)
class PatternReport:
    """Outcome of the recoverability checks for a pattern."""

    covers_all_rows: bool
    chain_overlap_ok: bool
    column_coverage_ok: bool
    necessary_count_ok: bool
    settings_count: int

    def all_ok(self) -> bool:
        return (self.covers_all_rows and self.chain_overlap_ok
                and self.column_coverage_ok and self.necessary_count_ok)


def overlapping_block_pattern(D: int, R: int, d: int) -> SelectionPattern:
    """Canonical overlapping block-diagonal pattern.

    Block l covers {(l-1)d + 1, ..., (l-1)d + R + d} for l = 1..L with
    L = ceil((D-R)/d). When d does not divide D - R the final block is
    shifted left to end exactly at D, keeping its size R + d and at least
    R overlap with its predecessor.
    """
    if R < 1 or R >= D:
        raise InvalidPatternParametersError(f"rank {R} must satisfy 1 <= R < D={D}")
    if d < 1 or d > D - R:
        raise InvalidPatternParametersError(f"step {d} must satisfy 1 <= d <= D-R={D - R}")
    L = math.ceil((D - R) / d)
    blocks = []
    for l in range(1, L + 1):
        start = (l - 1) * d + 1
        end = start + R + d - 1
        if end > D:
            start, end = D - (R + d) + 1, D
        blocks.append(IndexSet(tuple(range(start, end + 1))))
    return SelectionPattern(D, tuple(blocks), R)


def validate_pattern(p: SelectionPattern, R: int) -> PatternReport:
    """Check the recoverability conditions and count distinct settings.

    Verifies that the blocks cover every row, form a chain with >= R
    overlap between consecutive blocks (in sorted order; the canonical
    family is monotone so sorted order is the only candidate chain), give
    every column at least R observed entries, and jointly introduce at
    least D - R indices beyond the rank.
    """
    D = p.dim
    union = set()
    for b in p.blocks:
        union.update(b.indices)
    covers = union == set(range(1, D + 1))

    ordered = sorted(p.blocks, key=lambda b: (b.indices[0], b.indices[-1]))
    chain = all(
        len(set(a.indices) & set(b.indices)) >= R
        for a, b in zip(ordered, ordered[1:])
    )

    col_ok = True
    for c in range(1, D + 1):
        rows = set()
        for b in p.blocks:
            if c in b.indices:
                rows.update(b.indices)
        if len(rows) < R:
            col_ok = False
            break

    seen: set = set()
    new_total = 0
    for b in ordered:
        new_total += len(set(b.indices) - seen)
        seen.update(b.indices)
    necessary = new_total >= D - R

    return PatternReport(
        covers_all_rows=covers,
        chain_overlap_ok=chain,
        column_coverage_ok=col_ok,
        necessary_count_ok=necessary,
        settings_count=settings_count_enumerated(p),
    )


def settings_count_formula(R: int, d: int, L: int) -> int:
    """Distinct settings for the exact-fit pattern: (R+d)^2 + (L-1)((R+d)^2 - R^2).

    Exact when d divides D - R so no end-shift occurs; with an end-shift
    the enumerated count is authoritative (duplicate cells are measured
    once).
    """
    m = R + d
    return m * m + (L - 1) * (m * m - R * R)


def settings_count_enumerated(p: SelectionPattern) -> int:
    """Number of distinct matrix cells covered by the pattern."""
    cells = set()
    for b in p.blocks:
        for r in b.indices:
            for c in b.indices:
                cells.add((r, c))
    return len(cells)


def entry_observables(r: int, c: int, D: int) -> list:
    """Rank-1 observables whose expectations give the (r, c) entry.

    For a diagonal entry a single projector s_r s_r^T suffices. For an
    off-diagonal entry two Hermitian combinations are returned whose
    expectations are the real and imaginary parts:

        E_re = (s_c s_r^T + s_r s_c^T) / 2
        E_im = (s_c s_r^T - s_r s_c^T) / (2i)
    """
    if not (1 <= r <= D and 1 <= c <= D):
        raise ShapeError(f"entry ({r}, {c}) outside [1, {D}]^2")
    er = np.zeros((D, 1), dtype=complex)
    ec = np.zeros((D, 1), dtype=complex)
    er[r - 1] = 1.0
    ec[c - 1] = 1.0
    if r == c:
        return [HermitianObservable(D, er @ er.T)]
    outer_cr = ec @ er.T
    outer_rc = er @ ec.T
    e_re = (outer_cr + outer_rc) / 2
    e_im = (outer_cr - outer_rc) / 2j
    return [HermitianObservable(D, e_re), HermitianObservable(D, e_im)]


def save_pattern(p: SelectionPattern, path: str) -> None:
    """Write a pattern as JSON with 1-based block indices."""
    payload = {
        "dim": p.dim,
        "rank_hint": p.rank_hint,
        "blocks": [list(b.indices) for b in p.blocks],
    }
    with open(path, "w") as fh:
        json.dump(payload, fh)


def load_pattern(path: str) -> SelectionPattern:
    """Read a pattern written by :func:`save_pattern`."""
    with open(path) as fh:
        payload = json.load(fh)
    return SelectionPattern(
        dim=int(payload["dim"]),
        blocks=tuple(tuple(int(i) for i in blk) for blk in payload["blocks"]),
        rank_hint=int(payload["rank_hint"]),
    )
