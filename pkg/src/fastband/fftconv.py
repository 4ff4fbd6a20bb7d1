"""Zero-padded FFT convolution of grid counts with truncated kernel grids."""

import math

import numpy as np
import scipy.fft as sfft

from .errors import OutOfRange, ShapeMismatch

__all__ = [
    "DEFAULT_TAU",
    "effective_halfwidths",
    "padded_size_full",
    "padded_size_truncated",
    "zero_pad_counts",
    "zero_pad_kernel",
    "convolve",
    "convolve_direct",
    "CountsFftCache",
]

# Kernel support is truncated at tau standard deviations of the widest
# principal direction.
DEFAULT_TAU = 3.7


# ---------------------------------------------------------------------------
# support sizing
# ---------------------------------------------------------------------------

def effective_halfwidths(lambda_max, delta, shape, tau=DEFAULT_TAU):
    """Kernel half-widths, in grid steps, for a truncated kernel grid.

    The kernel is carried out to ``tau`` times its largest principal
    standard deviation ``sqrt(lambda_max)`` and never beyond the full
    grid half-width ``M_k - 1``.

    Parameters
    ----------
    lambda_max : float
        Largest eigenvalue of the bandwidth matrix.
    delta : (d,) array_like
        Grid step per axis.
    shape : sequence of int
        Grid nodes per axis.
    tau : float, optional
        Truncation radius in standard deviations (default 3.7).

    Returns
    -------
    tuple of int
        Half-width ``L_k`` per axis, each at least 1.
    """
    if lambda_max <= 0:
        raise OutOfRange("lambda_max must be positive")
    if tau <= 0:
        raise OutOfRange("tau must be positive")
    delta = np.atleast_1d(np.asarray(delta, dtype=float))
    if delta.size != len(shape):
        raise ShapeMismatch("delta and shape must agree in dimension")
    radius = tau * math.sqrt(lambda_max)
    out = []
    for dk, mk in zip(delta, shape):
        lk = min(int(mk) - 1, math.ceil(radius / dk))
        out.append(max(1, lk))
    return tuple(out)


def _next_pow2(n):
    """Smallest power of two that is at least ``n``."""
    return 1 << max(0, (int(n) - 1)).bit_length()


def padded_size_full(shape):
    """Padded FFT sizes for full-support kernels: powers of two >= 3M - 1."""
    return tuple(_next_pow2(3 * int(m) - 1) for m in shape)


def padded_size_truncated(shape, halfwidths):
    """Padded FFT sizes for truncated kernels: powers of two >= M + 2L - 1."""
    if len(shape) != len(halfwidths):
        raise ShapeMismatch("shape and halfwidths must agree in dimension")
    return tuple(
        _next_pow2(int(m) + 2 * int(l) - 1) for m, l in zip(shape, halfwidths)
    )


# ---------------------------------------------------------------------------
# padding
# ---------------------------------------------------------------------------

def _check_padded(data_shape, padded_shape):
    if len(padded_shape) != len(data_shape):
        raise ShapeMismatch("padded shape has wrong dimension")
    for p, m in zip(padded_shape, data_shape):
        if p < m:
            raise OutOfRange(f"padded size {p} smaller than data size {m}")


def zero_pad_counts(counts, padded_shape):
    """Embed the counts array at the origin of a zero block."""
    counts = np.asarray(counts, dtype=float)
    _check_padded(counts.shape, padded_shape)
    out = np.zeros(padded_shape)
    out[tuple(slice(0, m) for m in counts.shape)] = counts
    return out


def zero_pad_kernel(kernel, padded_shape):
    """Embed a kernel grid at the origin of a zero block.

    The kernel array covers offsets ``-L_k .. L_k`` per axis, so its
    first entry is the most negative offset and the zero offset sits at
    index ``L_k``.  Padding preserves that layout.
    """
    kernel = np.asarray(kernel, dtype=float)
    if any(s % 2 == 0 for s in kernel.shape):
        raise ShapeMismatch("kernel axes must have odd length 2L + 1")
    _check_padded(kernel.shape, padded_shape)
    out = np.zeros(padded_shape)
    out[tuple(slice(0, s) for s in kernel.shape)] = kernel
    return out


# ---------------------------------------------------------------------------
# convolution
# ---------------------------------------------------------------------------

def _halfwidths_of(kernel):
    return tuple((s - 1) // 2 for s in kernel.shape)


def convolve(counts, kernel, padded_shape=None, counts_fft=None):
    """Linear convolution of counts with a kernel grid, via circular FFT.

    Computes ``s_j = sum_i counts_i kernel_{j - i}`` for every grid node
    ``j``, with counts treated as zero outside the grid.  Both arrays
    are zero-padded to a common power-of-two shape, multiplied in the
    frequency domain, and the valid window is extracted at offset
    ``L_k`` per axis.

    Parameters
    ----------
    counts : ndarray
        Grid counts, shape ``M``.
    kernel : ndarray
        Kernel grid over offsets ``-L .. L`` per axis, shape ``2L + 1``.
    padded_shape : tuple of int, optional
        FFT shape; defaults to ``padded_size_truncated``.
    counts_fft : ndarray, optional
        Precomputed FFT of the zero-padded counts at ``padded_shape``,
        as returned by :class:`CountsFftCache`.

    Returns
    -------
    ndarray
        Convolution values on the original grid, shape ``M``.
    """
    counts = np.asarray(counts, dtype=float)
    kernel = np.asarray(kernel, dtype=float)
    if counts.ndim != kernel.ndim:
        raise ShapeMismatch("counts and kernel must have equal rank")
    halfwidths = _halfwidths_of(kernel)
    if padded_shape is None:
        padded_shape = padded_size_truncated(counts.shape, halfwidths)
    if counts_fft is None:
        counts_fft = sfft.fftn(zero_pad_counts(counts, padded_shape))
    kernel_fft = sfft.fftn(zero_pad_kernel(kernel, padded_shape))
    full = sfft.ifftn(counts_fft * kernel_fft)
    window = tuple(
        slice(l, l + m) for l, m in zip(halfwidths, counts.shape)
    )
    return full[window].real


def convolve_direct(counts, kernel):
    """Same convolution as :func:`convolve`, summed offset by offset.

    Slower than the FFT route but free of padding and round-off from
    the transform, which makes it the reference for equivalence checks.
    """
    counts = np.asarray(counts, dtype=float)
    kernel = np.asarray(kernel, dtype=float)
    if counts.ndim != kernel.ndim:
        raise ShapeMismatch("counts and kernel must have equal rank")
    halfwidths = _halfwidths_of(kernel)
    m = counts.shape
    out = np.zeros(m)
    for flat in np.ndindex(*kernel.shape):
        kv = kernel[flat]
        if kv == 0.0:
            continue
        offset = [f - l for f, l in zip(flat, halfwidths)]
        dst = tuple(
            slice(max(0, o), mk + min(0, o)) for o, mk in zip(offset, m)
        )
        src = tuple(
            slice(max(0, -o), mk + min(0, -o)) for o, mk in zip(offset, m)
        )
        out[dst] += kv * counts[src]
    return out


class CountsFftCache:
    """Reusable FFTs of one counts array across many kernel shapes.

    The selector evaluates its objective for many bandwidths on a fixed
    grid.  The padded shape only takes a handful of distinct values, so
    the forward transform of the counts is memoized per shape.
    """

    def __init__(self, counts):
        self.counts = np.asarray(counts, dtype=float)
        self._cache = {}

    def get(self, padded_shape):
        """FFT of the zero-padded counts at ``padded_shape``."""
        key = tuple(int(p) for p in padded_shape)
        if key not in self._cache:
            self._cache[key] = sfft.fftn(zero_pad_counts(self.counts, key))
        return self._cache[key]
