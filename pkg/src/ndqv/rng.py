"""Counter-based random streams for reproducible Monte Carlo runs.

Each Monte Carlo trial owns a fixed set of slots (source draw, one draw per
measurement event). Slot k of copy c reads the first double of Philox counter
blockc * slots + k, so draws are independent of evaluation order and the
whole table can be produced in a single vectorized call.
"""
from __future__ import annotations

import numpy as np

# One Philox counter block yields 4 doubles; each (copy, slot) pair owns a
# whole block so scalar and bulk paths agree bit for bit.
_BLOCK = 4


def slot_uniform(seed: int, copy: int, slot: int, slots_per_copy: int) -> float:
    """Uniform for one (copy, slot) pair, independent of draw order."""
    if slot >= slots_per_copy:
        raise ValueError(f"slot {slot} out of range for layout {slots_per_copy}")
    bg = np.random.Philox(key=seed)
    bg.advance(copy * slots_per_copy + slot)
    return float(np.random.Generator(bg).random())


def uniform_table(seed: int, n_copies: int, slots_per_copy: int) -> np.ndarray:
    """All trial uniforms at once, shape (n_copies, slots_per_copy).

    Row c column k equals ``slot_uniform(seed, c, k, slots_per_copy)``.
    """
    bg = np.random.Philox(key=seed)
    raw = np.random.Generator(bg).random(_BLOCK * n_copies * slots_per_copy)
    return raw[0::_BLOCK].reshape(n_copies, slots_per_copy)
