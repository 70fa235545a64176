"""Mixed-radix trajectory indexing.

A trajectory (z_0, ..., z_n) over an alphabet of size ``base`` is identified
with the integer sum_i z_i * base**(n - i), i.e. row-major with the time-0
letter most significant.  All tables in this package (joint measures, kernels,
distortion tables, serialized JSON) use this convention.
"""
from __future__ import annotations

import numpy as np


def num_trajectories(base: int, length: int) -> int:
    """Number of length-``length`` trajectories over ``base`` symbols."""
    return base**length


def to_letters(indices, base: int, length: int) -> np.ndarray:
    """Decode trajectory indices into letter arrays of shape (..., length)."""
    idx = np.asarray(indices)
    out = np.empty(idx.shape + (length,), dtype=np.int64)
    for i in range(length):
        out[..., i] = (idx // base ** (length - 1 - i)) % base
    return out


def from_letters(letters, base: int) -> np.ndarray:
    """Encode letter arrays of shape (..., length) into trajectory indices."""
    arr = np.asarray(letters, dtype=np.int64)
    length = arr.shape[-1]
    weights = base ** np.arange(length - 1, -1, -1, dtype=np.int64)
    return arr @ weights


def letter_at(indices, base: int, length: int, i: int) -> np.ndarray:
    """Letter z_i of each trajectory index."""
    return (np.asarray(indices) // base ** (length - 1 - i)) % base


def prefix(indices, base: int, length: int, k: int) -> np.ndarray:
    """Index of the length-``k`` prefix (z_0, ..., z_{k-1})."""
    return np.asarray(indices) // base ** (length - k)


def all_indices(base: int, length: int) -> np.ndarray:
    return np.arange(num_trajectories(base, length), dtype=np.int64)
