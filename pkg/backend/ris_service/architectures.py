"""
Lossless reciprocal RIS architectures.

Each family has a canonical parameterization matching its tunable circuit:
phases for single-connected, reactances X_I for group/fully-connected and
susceptances B_I for tree/forest-connected. The other forms are derived on
demand by ``to_parameterization``.
"""
from typing import Optional, Union

import numpy as np

from backend.api.config import settings
from backend.core.errors import NotSymmetric, SingularConversion
from backend.core.linalg import checked_solve, nearest_symmetric_unitary, right_solve
from backend.models import (
    AdmittanceComponents,
    ArchitectureFamily,
    ArchitectureSpec,
    ConstraintViolation,
    OpenCircuit,
    ParameterKind,
    Parameterization,
    RISConfiguration,
    ValidationReport,
)
from backend.ris_service.netparams import reflection_of

__all__ = [
    "validate",
    "random_feasible",
    "theta_from_impedance",
    "impedance_from_theta",
    "theta_from_admittance",
    "admittance_from_theta",
    "to_parameterization",
    "termination_matrix",
    "components_from_admittance",
    "admittance_from_components",
    "project",
]

_SYMBOL = {
    Parameterization.REACTANCE: "X",
    Parameterization.SUSCEPTANCE: "B",
    Parameterization.SCATTERING: "Θ",
}


def validate(config: RISConfiguration, tol: float = 1e-8) -> ValidationReport:
    """List every violated lossless/reciprocal/pattern constraint. Never raises."""
    report = ValidationReport(tolerance=tol)
    values = np.asarray(config.values)
    symbol = _SYMBOL[config.parameterization]

    def flag(constraint: str, magnitude: float):
        if magnitude > tol:
            report.violations.append(ConstraintViolation(constraint=constraint, magnitude=float(magnitude)))

    if not np.all(np.isfinite(values)):
        flag(f"{symbol} finite", np.inf)
        return report

    mask = config.architecture.mask_for(config.parameterization)
    flag("sparsity", np.max(np.abs(values[~mask]), initial=0.0))

    if config.parameterization == Parameterization.SCATTERING:
        flag("Θ=Θᵀ", np.max(np.abs(values - values.T)))
        gram = values.conj().T @ values
        flag("ΘᴴΘ=I", np.linalg.norm(gram - np.eye(values.shape[0])))
    else:
        scale = max(1.0, np.max(np.abs(values)))
        flag(f"{symbol}={symbol}ᵀ", np.max(np.abs(values - values.T)) / scale)
        flag(f"{symbol} real", np.max(np.abs(values.imag)) / scale)
    return report


def _random_symmetric(rng: np.random.Generator, mask: np.ndarray, bound: float) -> np.ndarray:
    upper = np.triu(rng.uniform(-bound, bound, size=mask.shape))
    return (upper + np.triu(upper, 1).T) * mask


def random_feasible(
    spec: ArchitectureSpec,
    seed: int,
    parameterization: Optional[Parameterization] = None,
    scale: float = 1.0,
    z0: Optional[float] = None,
) -> RISConfiguration:
    """Seeded feasible configuration in the family's canonical form (or ``parameterization``)."""
    z0 = settings.z0 if z0 is None else z0
    rng = np.random.default_rng(seed)

    if spec.family == ArchitectureFamily.SINGLE:
        phases = rng.uniform(0.0, 2 * np.pi, spec.n_i)
        config = RISConfiguration(parameterization=Parameterization.SCATTERING,
                                  values=np.diag(np.exp(1j * phases)), architecture=spec, z0=z0)
    elif spec.tridiagonal:
        b = _random_symmetric(rng, spec.susceptance_mask(), scale / z0)
        config = RISConfiguration(parameterization=Parameterization.SUSCEPTANCE,
                                  values=b, architecture=spec, z0=z0)
    else:
        x = _random_symmetric(rng, spec.block_mask(), scale * z0)
        config = RISConfiguration(parameterization=Parameterization.REACTANCE,
                                  values=x, architecture=spec, z0=z0)

    if parameterization is not None and parameterization != config.parameterization:
        config = to_parameterization(config, parameterization)
    return config


def theta_from_impedance(z_i: Union[np.ndarray, OpenCircuit], z0: Optional[float] = None) -> np.ndarray:
    return reflection_of(z_i, z0)


def impedance_from_theta(theta: np.ndarray, z0: Optional[float] = None) -> Union[np.ndarray, OpenCircuit]:
    """Z_I = z0 (I + Θ)(I - Θ)^-1; Θ = I is the open-circuit sentinel."""
    z0 = settings.z0 if z0 is None else z0
    theta = np.atleast_2d(np.asarray(theta, dtype=complex))
    eye = np.eye(theta.shape[0])
    if np.max(np.abs(theta - eye)) <= 1e-12:
        return OpenCircuit(size=theta.shape[0])
    return z0 * right_solve(eye + theta, eye - theta, "I - Θ")


def theta_from_admittance(y_i: np.ndarray, z0: Optional[float] = None) -> np.ndarray:
    z0 = settings.z0 if z0 is None else z0
    y_i = np.atleast_2d(np.asarray(y_i, dtype=complex))
    eye = np.eye(y_i.shape[0])
    return checked_solve(eye + z0 * y_i, eye - z0 * y_i, "I + Z0 Y_I")


def admittance_from_theta(theta: np.ndarray, z0: Optional[float] = None) -> np.ndarray:
    z0 = settings.z0 if z0 is None else z0
    theta = np.atleast_2d(np.asarray(theta, dtype=complex))
    eye = np.eye(theta.shape[0])
    return checked_solve(eye + theta, eye - theta, "I + Θ") / z0


def _inverse_real(m: np.ndarray, what: str) -> np.ndarray:
    return -checked_solve(m, np.eye(m.shape[0]), what).real


def to_parameterization(config: RISConfiguration, target: Parameterization) -> RISConfiguration:
    source = config.parameterization
    if source == target:
        return config
    v = np.asarray(config.values)
    z0 = config.z0

    if source == Parameterization.REACTANCE:
        if target == Parameterization.SCATTERING:
            out = theta_from_impedance(1j * v.real, z0)
        else:
            out = _inverse_real(v.real, "X_I")  # jB = (jX)^-1
    elif source == Parameterization.SUSCEPTANCE:
        if target == Parameterization.SCATTERING:
            out = theta_from_admittance(1j * v.real, z0)
        else:
            out = _inverse_real(v.real, "B_I")
    else:
        if target == Parameterization.REACTANCE:
            z_i = impedance_from_theta(v, z0)
            if isinstance(z_i, OpenCircuit):
                raise SingularConversion("open-circuited RIS has no finite reactance")
            out = z_i.imag
        else:
            out = admittance_from_theta(v, z0).imag
    return config.replace(out, target)


def termination_matrix(config: RISConfiguration, kind: ParameterKind) -> Union[np.ndarray, OpenCircuit]:
    """The RIS termination as Z_I = jX_I, Y_I = jB_I or Θ."""
    if kind == ParameterKind.S:
        return np.asarray(to_parameterization(config, Parameterization.SCATTERING).values)
    if kind == ParameterKind.Y:
        return 1j * to_parameterization(config, Parameterization.SUSCEPTANCE).values.real
    if config.parameterization == Parameterization.SCATTERING:
        return impedance_from_theta(config.values, config.z0)
    return 1j * to_parameterization(config, Parameterization.REACTANCE).values.real


def components_from_admittance(y_i: np.ndarray) -> AdmittanceComponents:
    """Split Y_I into port-to-ground and port-to-port tunable admittances.

    [Y_I]_{n,m} = -Y_{n,m} for n != m and [Y_I]_{n,n} = Y_n + sum_k Y_{n,k}.
    """
    y_i = np.atleast_2d(np.asarray(y_i, dtype=complex))
    if np.max(np.abs(y_i - y_i.T)) > 1e-12 * max(1.0, np.max(np.abs(y_i))):
        raise NotSymmetric("admittance matrix must be symmetric")
    links = -y_i.copy()
    np.fill_diagonal(links, 0)
    grounding = np.diag(y_i) - links.sum(axis=1)
    return AdmittanceComponents(grounding=grounding, interconnection=links)


def admittance_from_components(components: AdmittanceComponents) -> np.ndarray:
    links = np.asarray(components.interconnection)
    y_i = -links.copy()
    np.fill_diagonal(y_i, components.grounding + links.sum(axis=1))
    return y_i


def project(config: RISConfiguration, spec: Optional[ArchitectureSpec] = None) -> RISConfiguration:
    """Frobenius-nearest point satisfying the family constraints. Idempotent."""
    spec = spec or config.architecture
    v = np.array(config.values)

    if config.parameterization != Parameterization.SCATTERING:
        v = v.real
        v = (v + v.T) / 2
        v[~spec.mask_for(config.parameterization)] = 0.0
    elif spec.family == ArchitectureFamily.SINGLE:
        d = np.diag(v)
        v = np.diag(np.where(np.abs(d) > 0, np.exp(1j * np.angle(d)), 1.0 + 0j))
    else:
        out = np.zeros_like(v)
        for sl in spec.group_slices():
            out[sl, sl] = nearest_symmetric_unitary(v[sl, sl])
        v = out

    return RISConfiguration(parameterization=config.parameterization, values=v,
                            architecture=spec, z0=config.z0)
