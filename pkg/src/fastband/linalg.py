"""Dense linear algebra helpers for bandwidth matrices."""

import numpy as np

from .errors import NotPositiveDefinite, ShapeMismatch, SingularBandwidth

__all__ = [
    "cholesky",
    "largest_eigenvalue",
    "vec",
    "kron_power",
    "BandwidthMatrix",
    "SpdParam",
]

# Determinants below this threshold are treated as numerically singular.
_DET_FLOOR = 1e-300


# ---------------------------------------------------------------------------
# free functions
# ---------------------------------------------------------------------------

def _as_square(m):
    """Validate and return ``m`` as a float square matrix."""
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ShapeMismatch(f"expected a square matrix, got shape {m.shape}")
    return m


def cholesky(m):
    """Lower-triangular Cholesky factor of a symmetric positive definite matrix.

    Parameters
    ----------
    m : (d, d) array_like
        Symmetric matrix to factor.

    Returns
    -------
    (d, d) ndarray
        Lower-triangular ``L`` with ``L @ L.T == m``.

    Raises
    ------
    NotPositiveDefinite
        If ``m`` is not symmetric positive definite.
    """
    m = _as_square(m)
    if not np.allclose(m, m.T, rtol=1e-10, atol=1e-12):
        raise NotPositiveDefinite("matrix is not symmetric")
    try:
        return np.linalg.cholesky(m)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(str(exc)) from exc


def largest_eigenvalue(m):
    """Largest eigenvalue of a symmetric matrix."""
    m = _as_square(m)
    return float(np.linalg.eigvalsh(m)[-1])


def vec(m):
    """Stack the columns of a matrix into one vector (column-major)."""
    m = _as_square(m)
    return np.ravel(m, order="F")


def kron_power(v, r):
    """r-fold Kronecker power of a vector; ``r == 0`` gives ``[1.0]``."""
    v = np.asarray(v, dtype=float).ravel()
    out = np.array([1.0])
    for _ in range(int(r)):
        out = np.kron(out, v)
    return out


# ---------------------------------------------------------------------------
# bandwidth matrix wrapper
# ---------------------------------------------------------------------------

class BandwidthMatrix:
    """A symmetric positive definite bandwidth matrix with cached factors.

    The constructor validates the matrix once and eagerly computes the
    quantities every downstream routine needs: the Cholesky factor, the
    determinant, the inverse, and the largest eigenvalue.

    Parameters
    ----------
    h : (d, d) array_like
        Symmetric positive definite matrix.

    Attributes
    ----------
    h : (d, d) ndarray
        The matrix itself (a defensive copy).
    d : int
        Dimension.
    chol : (d, d) ndarray
        Lower-triangular Cholesky factor.
    det : float
        Determinant of ``h``.
    inv : (d, d) ndarray
        Inverse of ``h``.
    lambda_max : float
        Largest eigenvalue of ``h``.

    Raises
    ------
    NotPositiveDefinite
        If ``h`` is not symmetric positive definite.
    SingularBandwidth
        If the determinant underflows to an unusable magnitude.
    """

    def __init__(self, h):
        h = _as_square(h)
        self.h = h.copy()
        self.d = h.shape[0]
        self.chol = cholesky(h)
        diag = np.diag(self.chol)
        self.det = float(np.prod(diag) ** 2)
        if not np.isfinite(self.det) or self.det < _DET_FLOOR:
            raise SingularBandwidth(f"determinant {self.det} is not usable")
        self.inv = np.linalg.inv(h)
        self.lambda_max = largest_eigenvalue(h)

    def scaled(self, factor):
        """Return a new BandwidthMatrix equal to ``factor * h``."""
        return BandwidthMatrix(float(factor) * self.h)

    def __repr__(self):
        return f"BandwidthMatrix(d={self.d}, det={self.det:.6g})"


# ---------------------------------------------------------------------------
# smooth parametrization of the SPD cone
# ---------------------------------------------------------------------------

class SpdParam:
    """Log-Cholesky coordinates for symmetric positive definite matrices.

    A full d-by-d SPD matrix is represented by the ``d * (d + 1) / 2``
    entries of its lower-triangular Cholesky factor, read row by row,
    with the diagonal entries stored on log scale.  Every real vector
    decodes to a valid SPD matrix, which makes the coordinates safe for
    unconstrained optimization.  With ``diagonal=True`` only the ``d``
    log-diagonal entries are kept and decoded matrices are diagonal.

    Parameters
    ----------
    d : int
        Matrix dimension.
    diagonal : bool, optional
        Restrict to diagonal matrices (default False).
    """

    def __init__(self, d, diagonal=False):
        self.d = int(d)
        self.diagonal = bool(diagonal)

    @property
    def n_params(self):
        """Length of the coordinate vector."""
        return self.d if self.diagonal else self.d * (self.d + 1) // 2

    def encode(self, h):
        """Map an SPD matrix to its coordinate vector."""
        bw = h if isinstance(h, BandwidthMatrix) else BandwidthMatrix(h)
        if bw.d != self.d:
            raise ShapeMismatch(f"expected dimension {self.d}, got {bw.d}")
        ell = bw.chol
        if self.diagonal:
            return np.log(np.diag(ell))
        theta = np.empty(self.n_params)
        k = 0
        for i in range(self.d):
            for j in range(i + 1):
                theta[k] = np.log(ell[i, i]) if i == j else ell[i, j]
                k += 1
        return theta

    def decode(self, theta):
        """Map a coordinate vector back to an SPD matrix."""
        theta = np.asarray(theta, dtype=float).ravel()
        if theta.size != self.n_params:
            raise ShapeMismatch(
                f"expected {self.n_params} coordinates, got {theta.size}"
            )
        if self.diagonal:
            return np.diag(np.exp(theta) ** 2)
        ell = np.zeros((self.d, self.d))
        k = 0
        for i in range(self.d):
            for j in range(i + 1):
                ell[i, j] = np.exp(theta[k]) if i == j else theta[k]
                k += 1
        return ell @ ell.T
