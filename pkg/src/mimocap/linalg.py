"""Dense complex-matrix kernel behind every capacity formula.

Gram products, Hermitian eigenvalue extraction, Cholesky-based
log2-determinants of I + s*A, and PSD matrix square roots.  Matrices are
small (sides up to ~64) and always dense ``numpy.ndarray`` with complex128
entries.  All functions are pure and safe to call concurrently.

The log-determinant is computed through a Cholesky factorization of
I + s*A, which is well-conditioned positive definite whenever A is PSD and
s >= 0; the eigenvalue form sum_i log2(1 + s*lam_i) is kept as the
independent cross-check used by the test suite, never as the hot path.
"""

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import IndefiniteInputError, NotHermitianError

# max tolerated entrywise |A - A^H| before an input is rejected
HERMITIAN_ATOL = 1e-10
# relative eigenvalue threshold (against the largest magnitude) for rank
RANK_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class EigenSpectrum:
    """Real eigenvalues of a Hermitian PSD matrix, sorted descending.

    ``rank`` counts the values above the relative zero threshold used when
    the spectrum was computed; near-zero values are clamped to 0.0 but kept,
    so ``len(values)`` always equals the matrix side.
    """

    values: np.ndarray
    rank: int


def as_complex_matrix(a):
    """Coerce to a 2-D contiguous complex128 array with positive extents."""
    mat = np.ascontiguousarray(a, dtype=np.complex128)
    if mat.ndim != 2:
        raise ValueError("expected a 2-D matrix, got ndim=%d" % mat.ndim)
    if mat.shape[0] < 1 or mat.shape[1] < 1:
        raise ValueError("matrix extents must be at least 1x1, got %r" % (mat.shape,))
    return mat


def hermitian_defect(a):
    """Largest entrywise asymmetry max |A - A^H|."""
    a = np.asarray(a)
    return float(np.max(np.abs(a - a.conj().T)))


def require_hermitian(a, atol=HERMITIAN_ATOL):
    defect = hermitian_defect(a)
    if defect > atol:
        raise NotHermitianError(
            "matrix is not Hermitian: max asymmetry %.3e exceeds %.1e" % (defect, atol)
        )


def gram(h):
    """Gram matrix H H^H, re-symmetrized against round-off.

    The result is Hermitian PSD with side equal to the row count of H; its
    positive eigenvalues are the squared singular values of the channel.
    """
    h = as_complex_matrix(h)
    g = h @ h.conj().T
    return 0.5 * (g + g.conj().T)


def herm_eigvals(a, zero_tol=RANK_TOL):
    """Eigenvalues of a Hermitian PSD matrix as an EigenSpectrum.

    Values with magnitude below ``zero_tol * max(|values|, 1)`` do not count
    toward the rank and negative round-off values are clamped to zero.
    Raises NotHermitianError for asymmetric input and IndefiniteInputError if
    an eigenvalue is negative beyond the threshold.
    """
    a = as_complex_matrix(a)
    require_hermitian(a)
    vals = np.linalg.eigvalsh(a)[::-1].copy()  # descending
    thresh = zero_tol * max(float(np.max(np.abs(vals))), 1.0)
    if vals[-1] < -thresh:
        raise IndefiniteInputError(
            "eigenvalue %.6e is negative beyond tolerance %.1e" % (vals[-1], thresh)
        )
    vals[vals < 0.0] = 0.0
    rank = int(np.count_nonzero(vals >= thresh))
    return EigenSpectrum(values=vals, rank=rank)


def logdet2_id_plus(a, scale):
    """log2 det(I + scale*A) for Hermitian PSD A via Cholesky.

    Never forms the determinant explicitly.  Raises NotHermitianError on
    asymmetric input and CholeskyBreakdownError when I + scale*A is not
    numerically positive definite (i.e. A was indefinite).
    """
    a = as_complex_matrix(a)
    require_hermitian(a)
    if not scale >= 0.0:
        raise ValueError("scale must be >= 0, got %r" % scale)
    return float(_kernels.logdet2_batch(a[np.newaxis], float(scale))[0])


def psd_sqrt(r):
    """Hermitian PSD square root B with B B^H = R.

    Eigendecomposition route: U diag(sqrt(lam)) U^H with negative round-off
    eigenvalues clamped to zero before the root.
    """
    r = as_complex_matrix(r)
    require_hermitian(r)
    vals, vecs = np.linalg.eigh(r)
    thresh = RANK_TOL * max(float(np.max(np.abs(vals))), 1.0)
    if vals[0] < -thresh:
        raise IndefiniteInputError(
            "eigenvalue %.6e is negative beyond tolerance %.1e" % (vals[0], thresh)
        )
    root = np.sqrt(np.maximum(vals, 0.0))
    b = (vecs * root) @ vecs.conj().T
    return 0.5 * (b + b.conj().T)
