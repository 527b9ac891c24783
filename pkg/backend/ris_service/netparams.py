"""
Z-, Y- and S-parameter conversions for partitioned N-port networks.

All conversions use a single real reference impedance ``z0``:

    S = (Z + z0 I)^-1 (Z - z0 I),   Z = 2 z0 (I - S)^-1 - z0 I,   Y = Z^-1
"""
from typing import Optional, Tuple, Union

import numpy as np

from backend.api.config import settings
from backend.core.errors import KindMismatch, SingularConversion
from backend.core.linalg import checked_inv, checked_solve, is_diagonal
from backend.models import (
    NetworkMatrix,
    OpenCircuit,
    ParameterKind,
    PortPartition,
    TerminationSet,
)

__all__ = [
    "z_to_s",
    "s_to_z",
    "z_to_y",
    "y_to_z",
    "y_to_s",
    "s_to_y",
    "convert",
    "reflection_of",
    "admittance_of",
    "source_equivalents",
    "random_passive_network",
    "random_passive_terminations",
]


def _expect(net: NetworkMatrix, kind: ParameterKind) -> None:
    if net.kind != kind:
        raise KindMismatch(f"expected {kind.value}-parameters, got {net.kind.value}")


def z_to_s(z: NetworkMatrix) -> NetworkMatrix:
    _expect(z, ParameterKind.Z)
    eye = np.eye(z.partition.n)
    s = checked_solve(z.values + z.z0 * eye, z.values - z.z0 * eye, "Z + Z0 I")
    return z.with_values(ParameterKind.S, s)


def s_to_z(s: NetworkMatrix) -> NetworkMatrix:
    _expect(s, ParameterKind.S)
    eye = np.eye(s.partition.n)
    z = 2 * s.z0 * checked_inv(eye - s.values, "I - S") - s.z0 * eye
    return s.with_values(ParameterKind.Z, z)


def z_to_y(z: NetworkMatrix) -> NetworkMatrix:
    _expect(z, ParameterKind.Z)
    return z.with_values(ParameterKind.Y, checked_inv(z.values, "Z"))


def y_to_z(y: NetworkMatrix) -> NetworkMatrix:
    _expect(y, ParameterKind.Y)
    return y.with_values(ParameterKind.Z, checked_inv(y.values, "Y"))


def y_to_s(y: NetworkMatrix) -> NetworkMatrix:
    """S = (I + z0 Y)^-1 (I - z0 Y), without passing through Z."""
    _expect(y, ParameterKind.Y)
    eye = np.eye(y.partition.n)
    zy = y.z0 * y.values
    return y.with_values(ParameterKind.S, checked_solve(eye + zy, eye - zy, "I + Z0 Y"))


def s_to_y(s: NetworkMatrix) -> NetworkMatrix:
    _expect(s, ParameterKind.S)
    eye = np.eye(s.partition.n)
    y = checked_solve(eye + s.values, eye - s.values, "I + S") / s.z0
    return s.with_values(ParameterKind.Y, y)


_CONVERSIONS = {
    (ParameterKind.Z, ParameterKind.S): z_to_s,
    (ParameterKind.S, ParameterKind.Z): s_to_z,
    (ParameterKind.Z, ParameterKind.Y): z_to_y,
    (ParameterKind.Y, ParameterKind.Z): y_to_z,
    (ParameterKind.Y, ParameterKind.S): y_to_s,
    (ParameterKind.S, ParameterKind.Y): s_to_y,
}


def convert(net: NetworkMatrix, kind: ParameterKind) -> NetworkMatrix:
    if net.kind == kind:
        return net
    return _CONVERSIONS[(net.kind, kind)](net)


def reflection_of(zterm: Union[np.ndarray, OpenCircuit], z0: Optional[float] = None) -> np.ndarray:
    """Reflection coefficient (Z + z0 I)^-1 (Z - z0 I) of a termination.

    Diagonal terminations are handled entry by entry so the result is exactly
    diagonal; the open-circuit sentinel reflects with Gamma = I.
    """
    z0 = settings.z0 if z0 is None else z0
    if isinstance(zterm, OpenCircuit):
        return np.eye(zterm.size, dtype=complex)
    zterm = np.atleast_2d(np.asarray(zterm, dtype=complex))
    n = zterm.shape[0]
    if is_diagonal(zterm):
        d = np.diag(zterm)
        den = d + z0
        if np.any(np.abs(den) <= settings.rcond_min * np.maximum(np.abs(d), z0)):
            raise SingularConversion("Z + Z0 I is singular")
        return np.diag((d - z0) / den)
    eye = np.eye(n)
    return checked_solve(zterm + z0 * eye, zterm - z0 * eye, "Z + Z0 I")


def admittance_of(zterm: Union[np.ndarray, OpenCircuit]) -> np.ndarray:
    if isinstance(zterm, OpenCircuit):
        return np.zeros((zterm.size, zterm.size), dtype=complex)
    zterm = np.atleast_2d(np.asarray(zterm, dtype=complex))
    if is_diagonal(zterm):
        d = np.diag(zterm)
        if np.any(d == 0):
            raise SingularConversion("termination impedance has a short circuit")
        return np.diag(1.0 / d)
    return checked_inv(zterm, "termination impedance")


def source_equivalents(v_s, z_t, z0: Optional[float] = None) -> Tuple[np.ndarray, np.ndarray]:
    """Norton current i_s = Y_T v_s and incident wave b_s = (I - Gamma_T) v_s / 2."""
    z0 = settings.z0 if z0 is None else z0
    v_s = np.ravel(np.asarray(v_s, dtype=complex))
    z_t = np.atleast_2d(np.asarray(z_t, dtype=complex))
    i_s = admittance_of(z_t) @ v_s
    gamma_t = reflection_of(z_t, z0)
    b_s = (np.eye(z_t.shape[0]) - gamma_t) @ v_s / 2
    return i_s, b_s


def random_passive_network(partition: PortPartition, seed: int, z0: Optional[float] = None) -> NetworkMatrix:
    """Reciprocal passive Z = R + jX fixture.

    X is real symmetric and R = M M^T + 1e-3 z0 I is positive definite, so
    Z + z0 I, Z and I - S are all invertible.
    """
    z0 = settings.z0 if z0 is None else z0
    rng = np.random.default_rng(seed)
    n = partition.n
    x = rng.normal(scale=z0, size=(n, n))
    x = (x + x.T) / 2
    m = rng.normal(scale=z0 / np.sqrt(n), size=(n, n))
    r = m @ m.T + 1e-3 * z0 * np.eye(n)
    return NetworkMatrix(kind=ParameterKind.Z, values=r + 1j * x, partition=partition, z0=z0)


def random_passive_terminations(partition: PortPartition, seed: int, z0: Optional[float] = None) -> TerminationSet:
    """Diagonal lossy source/load impedances and a passive reciprocal RIS network."""
    z0 = settings.z0 if z0 is None else z0
    rng = np.random.default_rng(seed)

    def _diagonal(n):
        return np.diag(rng.uniform(0.2, 2.0, n) * z0 + 1j * rng.uniform(-1.0, 1.0, n) * z0)

    n_i = partition.n_i
    x = rng.normal(scale=z0, size=(n_i, n_i))
    m = rng.normal(scale=z0 / np.sqrt(n_i), size=(n_i, n_i))
    z_i = m @ m.T + 1e-3 * z0 * np.eye(n_i) + 1j * (x + x.T) / 2
    return TerminationSet(z_t=_diagonal(partition.n_t), z_i=z_i, z_r=_diagonal(partition.n_r), z0=z0)
