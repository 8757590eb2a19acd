"""Orthonormal filter banks and single-level discrete wavelet transforms.

The transforms decompose a signal into a stride-2-downsampled low-frequency
band and a high-frequency band, and reconstruct it exactly.  Boundaries are
circular (periodic), which keeps the analysis operators exactly orthonormal
for every even signal length >= the filter length.

Two evaluation routes exist on purpose:

* ``dwt1d`` / ``idwt1d`` / ``dwt2d`` / ``idwt2d`` run the O(n * flen)
  stride-2 convolution kernels from :mod:`wavehead.kernels`;
* ``analysis_operators`` builds the dense (n/2, n) low/high matrices, an
  O(n^2) reference used by tests and diagnostics to cross-check the kernels.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import ConfigError, ShapeError

_SQRT2 = math.sqrt(2.0)
_SQRT3 = math.sqrt(3.0)

# Analysis low-pass coefficients per family.  The high-pass mate is derived
# by the quadrature rule highpass[j] = (-1)^j * lowpass[len-1-j].
_LOWPASS = {
    "haar": [1.0 / _SQRT2, 1.0 / _SQRT2],
    "db2": [
        (1.0 + _SQRT3) / (4.0 * _SQRT2),
        (3.0 + _SQRT3) / (4.0 * _SQRT2),
        (3.0 - _SQRT3) / (4.0 * _SQRT2),
        (1.0 - _SQRT3) / (4.0 * _SQRT2),
    ],
}
_ALIASES = {"db1": "haar"}

SUPPORTED_FAMILIES = tuple(sorted([*_LOWPASS, *_ALIASES]))


@dataclass(frozen=True)
class FilterBank:
    """Paired analysis filters of an orthonormal wavelet family.

    ``lowpass`` and ``highpass`` have equal even length and satisfy
    sum(lowpass^2) == sum(highpass^2) == 1 and lowpass . highpass == 0.
    """

    family: str
    lowpass: np.ndarray
    highpass: np.ndarray

    def __len__(self) -> int:
        return len(self.lowpass)


@dataclass(frozen=True)
class AnalysisOperators:
    """Dense analysis matrices for signal length ``n``.

    ``low`` and ``high`` have shape (n/2, n); row k holds the filter
    coefficients placed circularly at offset 2k, so ``low @ x`` filters
    and downsamples in one step.
    """

    low: np.ndarray
    high: np.ndarray
    n: int


@dataclass(frozen=True)
class Subbands1D:
    """Low/high bands of a 1D transform; each has half the input length.

    Batched inputs (B, n) yield (B, n/2) bands.
    """

    low: np.ndarray
    high: np.ndarray


@dataclass(frozen=True)
class Subbands2D:
    """The four subbands of a single-level 2D transform, each (r/2, c/2)."""

    ll: np.ndarray
    lh: np.ndarray
    hl: np.ndarray
    hh: np.ndarray


def make_filter_bank(family: str = "haar") -> FilterBank:
    """Build the named filter bank.

    Raises ConfigError for unknown family names.
    """
    key = _ALIASES.get(family, family)
    if key not in _LOWPASS:
        raise ConfigError(
            f"unknown wavelet family {family!r}; supported: {', '.join(SUPPORTED_FAMILIES)}"
        )
    lo = np.asarray(_LOWPASS[key], dtype=np.float64)
    flen = lo.shape[0]
    hi = np.array([(-1.0) ** j * lo[flen - 1 - j] for j in range(flen)])
    lo.setflags(write=False)
    hi.setflags(write=False)
    return FilterBank(family=key, lowpass=lo, highpass=hi)


def analysis_operators(fb: FilterBank, n: int) -> AnalysisOperators:
    """Dense (n/2, n) analysis matrices for the bank, circular boundary.

    Reference/oracle route; the conv kernels are the production route.
    """
    _check_length(fb, n)
    half = n // 2
    flen = len(fb)
    low = np.zeros((half, n))
    high = np.zeros((half, n))
    for k in range(half):
        for m in range(flen):
            j = (2 * k + m) % n
            low[k, j] += fb.lowpass[m]
            high[k, j] += fb.highpass[m]
    return AnalysisOperators(low=low, high=high, n=n)


def dwt1d(fb: FilterBank, x: np.ndarray) -> Subbands1D:
    """Single-level analysis along the last axis.

    ``x`` is a vector (n,) or batch (B, n) with even n >= the filter
    length.  Equivalent to (L @ x, H @ x) for the dense operators.
    """
    x = np.asarray(x)
    batched = x.ndim == 2
    if x.ndim not in (1, 2):
        raise ShapeError(f"expected 1D or 2D array, got ndim={x.ndim}")
    _check_length(fb, x.shape[-1])
    lo = fb.lowpass.astype(x.dtype, copy=False)
    hi = fb.highpass.astype(x.dtype, copy=False)
    rows = np.ascontiguousarray(x if batched else x[None, :])
    low, high = kernels.dwt_batch(rows, lo, hi)
    if not batched:
        low, high = low[0], high[0]
    return Subbands1D(low=low, high=high)


def idwt1d(fb: FilterBank, sb: Subbands1D) -> np.ndarray:
    """Reconstruct the signal from its 1D subbands (exact inverse)."""
    low = np.asarray(sb.low)
    high = np.asarray(sb.high)
    if low.shape != high.shape:
        raise ShapeError(f"band shapes differ: {low.shape} vs {high.shape}")
    batched = low.ndim == 2
    if low.ndim not in (1, 2):
        raise ShapeError(f"expected 1D or 2D bands, got ndim={low.ndim}")
    n = 2 * low.shape[-1]
    _check_length(fb, n)
    lo = fb.lowpass.astype(low.dtype, copy=False)
    hi = fb.highpass.astype(low.dtype, copy=False)
    low2 = np.ascontiguousarray(low if batched else low[None, :])
    high2 = np.ascontiguousarray(high if batched else high[None, :])
    x = kernels.idwt_batch(low2, high2, lo, hi, n)
    return x if batched else x[0]


def dwt2d(fb: FilterBank, x: np.ndarray) -> Subbands2D:
    """Single-level 2D analysis: ll = L X Lt, lh = H X Lt, hl = L X Ht, hh = H X Ht."""
    x = np.asarray(x)
    if x.ndim != 2:
        raise ShapeError(f"expected a 2D array, got ndim={x.ndim}")
    _check_length(fb, x.shape[0])
    _check_length(fb, x.shape[1])
    # transform rows (right-multiply by Lt/Ht), then columns (left-multiply)
    xl, xh = _rows(fb, x)          # X Lt, X Ht
    ll, lh = _cols(fb, xl)         # L X Lt, H X Lt
    hl, hh = _cols(fb, xh)         # L X Ht, H X Ht
    return Subbands2D(ll=ll, lh=lh, hl=hl, hh=hh)


def idwt2d(fb: FilterBank, sb: Subbands2D) -> np.ndarray:
    """Reconstruct X = Lt ll L + Ht lh L + Lt hl H + Ht hh H."""
    bands = (sb.ll, sb.lh, sb.hl, sb.hh)
    shapes = {np.asarray(b).shape for b in bands}
    if len(shapes) != 1:
        raise ShapeError(f"subband shapes differ: {sorted(shapes)}")
    (shape,) = shapes
    if len(shape) != 2:
        raise ShapeError(f"expected 2D subbands, got shape {shape}")
    xl = _icols(fb, sb.ll, sb.lh)  # Lt ll + Ht lh  (columns synthesis)
    xh = _icols(fb, sb.hl, sb.hh)  # Lt hl + Ht hh
    return _irows(fb, xl, xh)      # (.) L + (.) H  (rows synthesis)


def _rows(fb, m):
    sb = dwt1d(fb, m)
    return sb.low, sb.high


def _cols(fb, m):
    sb = dwt1d(fb, np.ascontiguousarray(m.T))
    return sb.low.T, sb.high.T


def _irows(fb, low, high):
    return idwt1d(fb, Subbands1D(low=low, high=high))


def _icols(fb, low, high):
    out = idwt1d(
        fb,
        Subbands1D(
            low=np.ascontiguousarray(low.T), high=np.ascontiguousarray(high.T)
        ),
    )
    return out.T


def _check_length(fb: FilterBank, n: int) -> None:
    if n % 2 != 0:
        raise ShapeError(f"signal length must be even, got {n}")
    if n < len(fb):
        raise ShapeError(
            f"signal length {n} shorter than {fb.family} filter length {len(fb)}"
        )
