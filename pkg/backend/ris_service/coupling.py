"""
RIS mutual coupling for a uniform linear array of parallel thin dipoles.

Mutual impedances follow the induced-EMF method with sinusoidal currents,
referred to the feed terminals. The integral is evaluated in closed form
through the cosine and sine integrals.
"""
from typing import Optional

import numpy as np
from scipy import constants
from scipy.linalg import toeplitz
from scipy.special import sici

from backend.api.config import settings
from backend.core.errors import InvalidGeometry
from backend.models import ArrayGeometry

__all__ = ["ETA0", "dipole_mutual_impedance", "ris_coupling_matrix"]

ETA0 = constants.mu_0 * constants.c


def _g(kw: np.ndarray) -> np.ndarray:
    """Antiderivative of exp(-j k w) / w in w, as Ci(kw) - j Si(kw)."""
    si, ci = sici(kw)
    return ci - 1j * si


def _r_plus_s(d: float, s: np.ndarray) -> np.ndarray:
    r = np.hypot(d, s)
    s = np.asarray(s, dtype=float)
    return np.where(s >= 0, r + s, d**2 / (r - np.minimum(s, 0)))


def _r_minus_s(d: float, s: np.ndarray) -> np.ndarray:
    r = np.hypot(d, s)
    s = np.asarray(s, dtype=float)
    return np.where(s < 0, r - s, d**2 / (r + np.maximum(s, 0)))


def _half_integral(k: float, h: float, d: float, z0: float) -> complex:
    """∫_0^h sin(k(h - z)) exp(-jkR)/R dz with R = sqrt(d² + (z - z0)²)."""
    ends = np.array([0.0 - z0, h - z0])
    up = _g(k * _r_plus_s(d, ends))
    down = _g(k * _r_minus_s(d, ends))
    falling = np.exp(1j * k * h) * np.exp(-1j * k * z0) * (up[1] - up[0])
    rising = np.exp(-1j * k * h) * np.exp(1j * k * z0) * (down[1] - down[0])
    return complex((falling + rising) / 2j)


def dipole_mutual_impedance(length: float, distance: float, wavelength: float) -> complex:
    """Mutual impedance (Ω) of two side-by-side dipoles of total ``length``."""
    if length <= 0 or distance <= 0 or wavelength <= 0:
        raise InvalidGeometry(
            f"dipole length, spacing and wavelength must be positive "
            f"(got {length}, {distance}, {wavelength})"
        )
    k = 2 * np.pi / wavelength
    h = length / 2
    sin_kh = np.sin(k * h)
    if abs(sin_kh) < 1e-12:
        raise InvalidGeometry("terminal current vanishes for full-wavelength multiples")

    total = (
        _half_integral(k, h, distance, h)
        + _half_integral(k, h, distance, -h)
        - 2 * np.cos(k * h) * _half_integral(k, h, distance, 0.0)
    )
    return complex(1j * ETA0 / (4 * np.pi * sin_kh**2) * 2 * total)


def ris_coupling_matrix(geom: ArrayGeometry, z0: Optional[float] = None) -> np.ndarray:
    """Toeplitz Z_II with Z0 on the diagonal (perfectly matched elements)."""
    z0 = settings.z0 if z0 is None else z0
    if geom.spacing <= 0 or geom.length <= 0 or geom.frequency <= 0:
        raise InvalidGeometry("array spacing, dipole length and frequency must be positive")
    lam = geom.wavelength
    row = np.empty(geom.n_i, dtype=complex)
    row[0] = z0
    for offset in range(1, geom.n_i):
        row[offset] = dipole_mutual_impedance(geom.length, offset * geom.spacing, lam)
    return toeplitz(row, row)
