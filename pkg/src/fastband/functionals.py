"""Cross-validation kernels and integrated density derivative functionals."""

import numpy as np

from .binning import GridCounts
from .errors import OutOfRange, ShapeMismatch
from .fftconv import (
    DEFAULT_TAU,
    CountsFftCache,
    convolve,
    convolve_direct,
    effective_halfwidths,
    padded_size_full,
    padded_size_truncated,
)
from .gaussian import eta_r, normal_pdf
from .linalg import BandwidthMatrix

__all__ = [
    "PSI_MODES",
    "t_h",
    "kh_zero",
    "cv_kernel",
    "build_kernel_grid",
    "eta_kernel_grid",
    "psi_binned",
    "psi_direct",
    "q_r_binned",
    "q_r_exact",
]

# Binned evaluation strategies for the pairwise sums.
PSI_MODES = ("direct-binned", "fft-M", "fft-L")

# Pairwise chunk budget for the exact O(n^2) routes.
_PAIR_BUDGET = 1 << 21


def _as_bandwidth(h):
    return h if isinstance(h, BandwidthMatrix) else BandwidthMatrix(h)


# ---------------------------------------------------------------------------
# kernels
# ---------------------------------------------------------------------------

def t_h(u, h):
    """Cross-validation kernel ``K_{2H}(u) - 2 K_H(u)``.

    Parameters
    ----------
    u : (n, d) or (d,) array_like
        Difference vectors.
    h : (d, d) array_like or BandwidthMatrix
        Bandwidth matrix.

    Returns
    -------
    (n,) ndarray, or float for a single point.
    """
    bw = _as_bandwidth(h)
    return normal_pdf(u, 2.0 * bw.h) - 2.0 * normal_pdf(u, bw.h)


def kh_zero(h):
    """Gaussian kernel height at the origin, ``(2 pi)^{-d/2} det(H)^{-1/2}``."""
    bw = _as_bandwidth(h)
    return 1.0 / ((2.0 * np.pi) ** (bw.d / 2) * np.sqrt(bw.det))


def cv_kernel(u, h, r=0, form="t"):
    """Order-``r`` cross-validation kernel ``eta_r(u; 2H) - 2 eta_r(u; H)``.

    For ``r == 0`` this equals :func:`t_h`.  The ``form`` switch picks
    the computation route: ``"t"`` goes through plain density
    evaluations and only exists at ``r == 0``; ``"eta"`` goes through
    the derivative engine and works at every order.  Both routes
    implement the same function.
    """
    if form == "t":
        if r != 0:
            raise OutOfRange("the t form of the kernel is only defined at r = 0")
        return t_h(u, h)
    if form != "eta":
        raise OutOfRange(f"unknown kernel form {form!r}")
    bw = _as_bandwidth(h)
    return eta_r(u, 2.0 * bw.h, r) - 2.0 * eta_r(u, bw.h, r)


# ---------------------------------------------------------------------------
# kernel grids
# ---------------------------------------------------------------------------

def _offset_points(delta, halfwidths):
    """Grid offsets ``delta * j`` for ``j`` in the box ``[-L, L]^d``."""
    axes = [dk * np.arange(-lk, lk + 1) for dk, lk in zip(delta, halfwidths)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack(mesh, axis=-1).reshape(-1, len(delta))


def _support_halfwidths(grid, lambda_max, mode, tau):
    if mode == "fft-L":
        return effective_halfwidths(lambda_max, grid.delta, grid.shape, tau)
    return tuple(m - 1 for m in grid.shape)


def build_kernel_grid(grid, h, r=0, mode="fft-M", tau=DEFAULT_TAU, form="t"):
    """Tabulate the order-``r`` CV kernel on grid offsets.

    The kernel is evaluated at ``delta * j`` for every integer offset
    ``j`` in ``[-L_1, L_1] x ... x [-L_d, L_d]``.  Full-support modes
    (``"direct-binned"`` and ``"fft-M"``) use ``L_k = M_k - 1``; the
    truncated mode (``"fft-L"``) clips the support to ``tau`` standard
    deviations of the wider kernel ``2H``.

    Returns
    -------
    ndarray of shape ``(2 L_1 + 1, ..., 2 L_d + 1)``.
    """
    if mode not in PSI_MODES:
        raise OutOfRange(f"unknown mode {mode!r}; expected one of {PSI_MODES}")
    bw = _as_bandwidth(h)
    if form == "t" and r != 0:
        form = "eta"
    halfwidths = _support_halfwidths(grid, 2.0 * bw.lambda_max, mode, tau)
    pts = _offset_points(grid.delta, halfwidths)
    vals = cv_kernel(pts, bw, r=r, form=form)
    return np.asarray(vals).reshape(tuple(2 * l + 1 for l in halfwidths))


def eta_kernel_grid(grid, sigma, r, mode="fft-M", tau=DEFAULT_TAU):
    """Tabulate ``eta_r(.; sigma)`` on grid offsets, same layout as above."""
    if mode not in PSI_MODES:
        raise OutOfRange(f"unknown mode {mode!r}; expected one of {PSI_MODES}")
    bw = _as_bandwidth(sigma)
    halfwidths = _support_halfwidths(grid, bw.lambda_max, mode, tau)
    pts = _offset_points(grid.delta, halfwidths)
    vals = eta_r(pts, bw, r)
    return np.asarray(vals).reshape(tuple(2 * l + 1 for l in halfwidths))


# ---------------------------------------------------------------------------
# binned pairwise sums
# ---------------------------------------------------------------------------

def _binned_vstat(gc, kernel, mode, counts_fft_cache=None):
    """Evaluate ``n^-2 sum_i c_i (c * k)_i`` for a tabulated kernel."""
    counts = gc.counts
    if mode == "direct-binned":
        conv = convolve_direct(counts, kernel)
    else:
        halfwidths = tuple((s - 1) // 2 for s in kernel.shape)
        if mode == "fft-M":
            padded = padded_size_full(counts.shape)
        else:
            padded = padded_size_truncated(counts.shape, halfwidths)
        cfft = counts_fft_cache.get(padded) if counts_fft_cache else None
        conv = convolve(counts, kernel, padded_shape=padded, counts_fft=cfft)
    n = counts.sum()
    return float(np.sum(counts * conv) / (n * n))


def psi_binned(gc, h, r=0, mode="fft-L", tau=DEFAULT_TAU, form="t",
               counts_fft_cache=None):
    """Binned double sum of the order-``r`` CV kernel.

    Approximates ``n^-2 sum_i sum_j cv_kernel(X_i - X_j; H)`` by linear
    binning: with counts ``c`` and the tabulated kernel ``k``, returns
    ``n^-2 sum_i c_i (c * k)_i``.

    Parameters
    ----------
    gc : GridCounts
        Binned sample.
    h : (d, d) array_like or BandwidthMatrix
        Bandwidth matrix.
    r : int, optional
        Functional order (default 0).
    mode : str, optional
        One of ``"direct-binned"``, ``"fft-M"``, ``"fft-L"``.
    tau : float, optional
        Truncation radius for ``"fft-L"``.
    form : str, optional
        Kernel route, ``"t"`` or ``"eta"``; orders above 0 always use
        the eta route.
    counts_fft_cache : CountsFftCache, optional
        Memoized counts transforms for repeated calls on one sample.

    Returns
    -------
    float
    """
    if not isinstance(gc, GridCounts):
        raise ShapeMismatch("psi_binned expects GridCounts from linear_binning")
    kernel = build_kernel_grid(gc.grid, h, r=r, mode=mode, tau=tau, form=form)
    return _binned_vstat(gc, kernel, mode, counts_fft_cache)


def q_r_binned(gc, sigma, r, mode="fft-L", tau=DEFAULT_TAU, counts_fft_cache=None):
    """Binned V-statistic ``n^-2 sum_i c_i (c * k)_i`` with ``k = eta_r``."""
    if not isinstance(gc, GridCounts):
        raise ShapeMismatch("q_r_binned expects GridCounts from linear_binning")
    kernel = eta_kernel_grid(gc.grid, sigma, r, mode=mode, tau=tau)
    return _binned_vstat(gc, kernel, mode, counts_fft_cache)


# ---------------------------------------------------------------------------
# exact pairwise sums
# ---------------------------------------------------------------------------

def _pairwise_vstat(x, func):
    """Chunked evaluation of ``n^-2 sum_i sum_j func(X_i - X_j)``."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    n = x.shape[0]
    chunk = max(1, _PAIR_BUDGET // max(1, n))
    total = 0.0
    for start in range(0, n, chunk):
        stop = min(n, start + chunk)
        diffs = x[start:stop, None, :] - x[None, :, :]
        total += float(np.sum(func(diffs.reshape(-1, x.shape[1]))))
    return total / (n * n)


def psi_direct(x, h, r=0, form="t"):
    """Exact pairwise double sum of the order-``r`` CV kernel."""
    bw = _as_bandwidth(h)
    if form == "t" and r != 0:
        form = "eta"
    return _pairwise_vstat(x, lambda u: cv_kernel(u, bw, r=r, form=form))


def q_r_exact(x, sigma, r):
    """Exact pairwise V-statistic of ``eta_r``."""
    bw = _as_bandwidth(sigma)
    return _pairwise_vstat(x, lambda u: eta_r(u, bw, r))
