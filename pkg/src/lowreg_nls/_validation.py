"""Input validation shared by the estimators and the CLI."""
from __future__ import annotations

import numbers

import numpy as np

from .spectral import Grid


def check_positive(name: str, value, allow_none: bool = False):
    if value is None and allow_none:
        return None
    if not isinstance(value, numbers.Real) or not np.isfinite(value) or value <= 0:
        raise ValueError(f"{name} must be a positive finite number, got {value!r}")
    return float(value)


def check_field_batch(X, grid: Grid) -> tuple[np.ndarray, tuple[int, ...]]:
    """Coerce ``X`` to a complex batch of shape ``(n_samples, *grid.shape)``.

    Accepts a single field (``grid.shape`` or flat ``n^d``) or a batch
    (``(n_samples, n^d)`` or ``(n_samples, *grid.shape)``).  Returns the batch
    and the original shape so results can be given back in the same layout.
    """
    arr = np.asarray(X)
    if arr.dtype == object:
        raise TypeError("field data must be numeric")
    arr = arr.astype(complex, copy=False)
    shape = arr.shape
    if shape == grid.shape or shape == (grid.size,):
        batch = arr.reshape((1,) + grid.shape)
    elif arr.ndim == 2 and shape[1] == grid.size:
        batch = arr.reshape((shape[0],) + grid.shape)
    elif arr.ndim == grid.d + 1 and shape[1:] == grid.shape:
        batch = arr
    else:
        raise ValueError(f"cannot interpret data of shape {shape} on a grid of shape {grid.shape}")
    if not np.all(np.isfinite(batch)):
        raise ValueError("field data contains NaN or Inf")
    return batch, shape


def check_tau_ladder(taus) -> np.ndarray:
    t = np.asarray(taus, dtype=float).ravel()
    if t.size < 2:
        raise ValueError("need at least two step sizes to fit an order")
    if np.any(~np.isfinite(t)) or np.any(t <= 0):
        raise ValueError("step sizes must be positive and finite")
    if len(np.unique(t)) != t.size:
        raise ValueError("step sizes must be distinct")
    return t
