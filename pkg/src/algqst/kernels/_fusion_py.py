"""Pure-numpy reference kernel for the aggregate-projector action."""

from __future__ import annotations

import numpy as np


def ptot_apply(V: np.ndarray, w: np.ndarray, idx_flat: np.ndarray,
               idx_off: np.ndarray, u_stack: np.ndarray) -> np.ndarray:
    """Apply the aggregate projector sum to a block of vectors.

    Computes w[:, None] * V plus, for every block l, the scatter-add of
    u^(l) (u^(l)H V[idx_l]) onto the block's rows. Block l owns rows
    idx_flat[idx_off[l]:idx_off[l+1]] and the matching rows of u_stack.
    """
    out = w[:, None] * V
    for l in range(len(idx_off) - 1):
        a, b = idx_off[l], idx_off[l + 1]
        idx = idx_flat[a:b]
        u = u_stack[a:b]
        out[idx, :] += u @ (u.conj().T @ V[idx, :])
    return out
