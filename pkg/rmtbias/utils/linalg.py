"""
Linear algebra helpers
"""
import numpy as np
import scipy.linalg

from rmtbias.errors import NumericError


def hermitian_inverse(K: np.ndarray) -> np.ndarray:
    """
    Inverse of a Hermitian positive definite matrix via Cholesky.

    Raises:
        NumericError: K is not numerically positive definite
    """
    try:
        factor = scipy.linalg.cho_factor(K, lower=True, check_finite=False)
        inv = scipy.linalg.cho_solve(factor, np.eye(K.shape[0], dtype=K.dtype), check_finite=False)
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as e:
        raise NumericError(f"Cholesky factorization failed: {e}") from e
    # symmetrize away round-off so T stays exactly Hermitian
    return 0.5 * (inv + inv.conj().T)


def general_inverse(K: np.ndarray) -> np.ndarray:
    """Inverse by LU factorization"""
    try:
        inv = scipy.linalg.inv(K, check_finite=False)
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError, ValueError) as e:
        raise NumericError(f"LU inversion failed: {e}") from e
    if not np.all(np.isfinite(inv)):
        raise NumericError("LU inversion produced non-finite entries")
    return inv


def hpd_logdet(K: np.ndarray) -> float:
    """log det of a Hermitian positive definite matrix"""
    try:
        L = scipy.linalg.cholesky(K, lower=True, check_finite=False)
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as e:
        raise NumericError(f"log det: matrix is not positive definite ({e})") from e
    return float(2.0 * np.sum(np.log(np.real(np.diag(L)))))


def trace_product(X: np.ndarray, Y: np.ndarray) -> complex:
    """Tr(X @ Y) without forming the product"""
    return complex(np.sum(X * Y.T))


def relative_gap(left: np.ndarray, right: np.ndarray) -> float:
    """||left - right||_F / max(||left||_F, ||right||_F), 0 when both vanish"""
    scale = max(np.linalg.norm(left), np.linalg.norm(right))
    if scale == 0:
        return 0.0
    return float(np.linalg.norm(np.asarray(left) - np.asarray(right)) / scale)
