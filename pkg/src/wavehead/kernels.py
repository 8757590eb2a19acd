"""Stride-2 circular filter-bank kernels (the hot inner loops).

Two interchangeable implementations live here:

* ``*_numpy``: vectorized pure-numpy gather/scatter versions,
* ``*_numba``: explicit loops compiled with ``numba.njit(cache=True)``.

The active pair is chosen once at import time.  Set ``WAVEHEAD_NUMBA=0``
to force the numpy fallback, ``WAVEHEAD_NUMBA=1`` to require numba
(import error if unavailable); unset/``auto`` uses numba when it imports.
``benchmarks/bench_kernels.py`` compares the two paths.

All kernels take float arrays of one dtype (float32 or float64) and
accumulate in that dtype.  Signals are indexed circularly: coefficient
``m`` of the filter taps sample ``(2k + m) mod n`` of the signal.
"""

import os

import numpy as np

_ENV_FLAG = "WAVEHEAD_NUMBA"


def numba_requested() -> str:
    """Return the env-flag state: "0", "1" or "auto"."""
    val = os.environ.get(_ENV_FLAG, "auto").strip().lower()
    if val in ("0", "off", "false", "no"):
        return "0"
    if val in ("1", "on", "true", "yes"):
        return "1"
    return "auto"


try:
    from numba import njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised via env flag tests
    njit = None
    _HAVE_NUMBA = False


# ---------------------------------------------------------------------------
# numpy implementations

def dwt_batch_numpy(x, lo, hi):
    """Analysis step for a batch of rows.

    x: (B, n), lo/hi: (flen,) in x.dtype.  Returns (low, high), each (B, n/2).
    """
    b, n = x.shape
    half = n // 2
    flen = lo.shape[0]
    # gather matrix: idx[k, m] = (2k + m) mod n, no duplicate k for fixed m
    idx = (2 * np.arange(half)[:, None] + np.arange(flen)[None, :]) % n
    seg = x[:, idx]                      # (B, half, flen)
    low = seg @ lo
    high = seg @ hi
    return low, high


def idwt_batch_numpy(low, high, lo, hi, n):
    """Synthesis step, adjoint of dwt_batch_numpy. Returns (B, n)."""
    b, half = low.shape
    flen = lo.shape[0]
    x = np.zeros((b, n), dtype=low.dtype)
    k2 = 2 * np.arange(half)
    for m in range(flen):
        cols = (k2 + m) % n              # distinct for fixed m
        x[:, cols] += lo[m] * low + hi[m] * high
    return x


# ---------------------------------------------------------------------------
# loop bodies (compiled by numba when enabled)

def _dwt_batch_loops(x, lo, hi):
    b, n = x.shape
    half = n // 2
    flen = lo.shape[0]
    low = np.zeros((b, half), x.dtype)
    high = np.zeros((b, half), x.dtype)
    for i in range(b):
        for k in range(half):
            for m in range(flen):
                v = x[i, (2 * k + m) % n]
                low[i, k] += lo[m] * v
                high[i, k] += hi[m] * v
    return low, high


def _idwt_batch_loops(low, high, lo, hi, n):
    b, half = low.shape
    flen = lo.shape[0]
    x = np.zeros((b, n), low.dtype)
    for i in range(b):
        for k in range(half):
            lv = low[i, k]
            hv = high[i, k]
            for m in range(flen):
                x[i, (2 * k + m) % n] += lo[m] * lv + hi[m] * hv
    return x


if _HAVE_NUMBA:
    dwt_batch_numba = njit(cache=True)(_dwt_batch_loops)
    idwt_batch_numba = njit(cache=True)(_idwt_batch_loops)
else:
    dwt_batch_numba = None
    idwt_batch_numba = None


def _select():
    mode = numba_requested()
    if mode == "1" and not _HAVE_NUMBA:
        raise ImportError(f"{_ENV_FLAG}=1 but numba is not importable")
    use = _HAVE_NUMBA and mode != "0"
    if use:
        return "numba", dwt_batch_numba, idwt_batch_numba
    return "numpy", dwt_batch_numpy, idwt_batch_numpy


BACKEND, dwt_batch, idwt_batch = _select()
