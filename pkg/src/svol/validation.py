"""Input validation helpers shared by the estimator and the CLI."""

from __future__ import annotations

import numpy as np

__all__ = ["check_returns", "MIN_OBSERVATIONS"]

MIN_OBSERVATIONS = 10


def check_returns(y, min_length: int = MIN_OBSERVATIONS) -> np.ndarray:
    """Coerce a return series to a finite float64 vector.

    Accepts 1-d arrays or single-column 2-d arrays (sklearn convention).
    """
    arr = np.asarray(y, dtype=np.float64)
    if arr.ndim == 2 and arr.shape[1] == 1:
        arr = arr[:, 0]
    if arr.ndim != 1:
        raise ValueError(f"expected a 1-d return series, got shape {arr.shape}")
    if arr.size < min_length:
        raise ValueError(f"need at least {min_length} observations, "
                         f"got {arr.size}")
    if not np.all(np.isfinite(arr)):
        bad = int(np.flatnonzero(~np.isfinite(arr))[0])
        raise ValueError(f"non-finite return at position {bad}")
    return np.ascontiguousarray(arr)
