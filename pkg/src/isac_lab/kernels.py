"""Hot-kernel dispatch: compiled extension when available, numpy otherwise.

Both lanes compute the batched gain-concentrated matched-filter power
|phi(tau, r)^H y|^2 / P accumulated across paths. ``HAS_COMPILED`` reports
which lane is active; the benchmark script compares the two directly.
"""

from __future__ import annotations

import numpy as np

try:
    from ._ext._objective import batch_power as _compiled_batch_power

    HAS_COMPILED = True
except ImportError:  # pure-python install or skipped build
    _compiled_batch_power = None
    HAS_COMPILED = False


def batch_power_numpy(
    tau: np.ndarray,
    r: np.ndarray,
    y: np.ndarray,
    carriers: np.ndarray,
    doppler_slope: np.ndarray,
    out: np.ndarray,
) -> None:
    """Vectorized fallback for the compiled kernel (same contract)."""
    phase = tau[:, None] * carriers[None, :] - r[:, None] * doppler_slope[None, :]
    corr = np.exp(2j * np.pi * phase) @ y
    out += (corr.real**2 + corr.imag**2) / y.size


def batch_power_compiled(tau, r, y, carriers, doppler_slope, out) -> None:
    if _compiled_batch_power is None:
        raise RuntimeError("compiled kernel not available in this install")
    _compiled_batch_power(
        np.ascontiguousarray(tau, dtype=np.float64),
        np.ascontiguousarray(r, dtype=np.float64),
        np.ascontiguousarray(y, dtype=np.complex128),
        np.ascontiguousarray(carriers, dtype=np.float64),
        np.ascontiguousarray(doppler_slope, dtype=np.float64),
        out,
    )


batch_power = batch_power_compiled if HAS_COMPILED else batch_power_numpy


def accumulate_path_power(
    tau: np.ndarray,
    r: np.ndarray,
    y: np.ndarray,
    carriers: np.ndarray,
    times: np.ndarray,
    c: float,
    out: np.ndarray,
    use_compiled: bool | None = None,
) -> None:
    """Add one path's concentrated power surface to ``out`` in place."""
    slope = carriers * times / c
    impl = batch_power
    if use_compiled is True:
        impl = batch_power_compiled
    elif use_compiled is False:
        impl = batch_power_numpy
    impl(
        np.asarray(tau, dtype=float),
        np.asarray(r, dtype=float),
        np.asarray(y, dtype=complex),
        np.asarray(carriers, dtype=float),
        slope,
        out,
    )
