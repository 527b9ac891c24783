"""
Shared dense linear-algebra helpers.

Every inverse in the library goes through ``check_conditioning`` so that the
reciprocal-condition threshold (``settings.rcond_min``) and the error class are
applied in one place.
"""
from itertools import groupby
from typing import Optional, Tuple, Type

import numpy as np
from scipy.linalg import block_diag, sqrtm

from backend.api.config import settings
from backend.core.errors import NotSymmetric, RISNetError, SingularConversion


def frozen(values) -> np.ndarray:
    """Return a read-only complex copy of ``values``."""
    arr = np.array(values, dtype=complex, copy=True)
    arr.flags.writeable = False
    return arr


def reciprocal_condition(m: np.ndarray) -> float:
    s = np.linalg.svd(m, compute_uv=False)
    if s.size == 0:
        return 1.0
    if s[0] == 0.0:
        return 0.0
    return float(s[-1] / s[0])


def check_conditioning(
    m: np.ndarray,
    what: str,
    error: Type[RISNetError] = SingularConversion,
    rcond_min: Optional[float] = None,
) -> None:
    rcond_min = settings.rcond_min if rcond_min is None else rcond_min
    if not np.all(np.isfinite(m)):
        raise error(f"{what} has non-finite entries")
    rcond = reciprocal_condition(m)
    if rcond < rcond_min:
        raise error(f"{what} is numerically singular (rcond={rcond:.3e})")


def checked_inv(m, what: str, error: Type[RISNetError] = SingularConversion) -> np.ndarray:
    m = np.asarray(m)
    check_conditioning(m, what, error)
    return np.linalg.inv(m)


def checked_solve(a, b, what: str, error: Type[RISNetError] = SingularConversion) -> np.ndarray:
    """Solve ``a @ x = b`` after the conditioning check."""
    a = np.asarray(a)
    check_conditioning(a, what, error)
    return np.linalg.solve(a, b)


def right_solve(b, a, what: str, error: Type[RISNetError] = SingularConversion) -> np.ndarray:
    """Return ``b @ inv(a)`` without forming the inverse."""
    return checked_solve(np.asarray(a).T, np.asarray(b).T, what, error).T


def rel_fro(a, b) -> float:
    """Relative Frobenius deviation of ``a`` from ``b``."""
    a = np.asarray(a)
    b = np.asarray(b)
    scale = max(np.linalg.norm(b), np.finfo(float).tiny)
    return float(np.linalg.norm(a - b) / scale)


def symmetrize(m: np.ndarray) -> np.ndarray:
    return (m + m.T) / 2


def is_diagonal(m: np.ndarray, tol: float = 0.0) -> bool:
    off = m - np.diag(np.diag(m))
    return bool(np.max(np.abs(off), initial=0.0) <= tol)


def takagi(m: np.ndarray, tol: float = 1e-10) -> Tuple[np.ndarray, np.ndarray]:
    """Autonne-Takagi factorization of a complex symmetric matrix.

    Returns ``(sigma, U)`` with ``m = U @ diag(sigma) @ U.T`` and ``U`` unitary,
    singular values in decreasing order. Singular values closer than
    ``tol * sigma_max`` are treated as one degenerate cluster.
    """
    m = np.asarray(m, dtype=complex)
    n = m.shape[0]
    if m.shape != (n, n):
        raise NotSymmetric("Takagi factorization needs a square matrix")
    scale = max(np.max(np.abs(m), initial=0.0), 1.0)
    if np.max(np.abs(m - m.T), initial=0.0) > tol * scale:
        raise NotSymmetric("Takagi factorization needs a symmetric matrix")

    if not np.any(m):
        return np.zeros(n), np.eye(n, dtype=complex)

    if not np.any(m.imag):
        # Real symmetric: eigenvectors with sqrt(sign) phases
        lam, vec = np.linalg.eigh(m.real)
        phases = np.where(lam >= 0, 1.0 + 0j, 1j)
        order = np.argsort(-np.abs(lam), kind="stable")
        return np.abs(lam)[order], (vec * phases)[:, order]

    v, sigma, wh = np.linalg.svd(m)
    w = wh.conj().T

    # Cluster ids grow whenever the gap to the previous value exceeds the tolerance
    gaps = np.concatenate(([0.0], -np.diff(sigma)))
    cluster = np.cumsum(gaps > tol * sigma[0])
    blocks = []
    for _, members in groupby(range(n), key=lambda i: cluster[i]):
        idx = list(members)
        blocks.append(sqrtm(v[:, idx].T @ w[:, idx]))
    u = v @ np.conj(block_diag(*blocks))
    return sigma, u


def nearest_symmetric_unitary(m: np.ndarray) -> np.ndarray:
    """Frobenius-nearest symmetric unitary matrix to the symmetric part of ``m``."""
    _, u = takagi(symmetrize(np.asarray(m, dtype=complex)))
    return u @ u.T
