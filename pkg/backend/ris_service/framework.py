"""
Universal linear-termination system.

    y = A x,   x1 = c1 + A1 y1,   x2 = A2 y2,   x3 = A3 y3

Z-, Y- and S-parameter descriptions of the transmitter/RIS/receiver network
are all instances of this system; ``problem_from_network`` builds the instance
for a given kind.
"""
from typing import Tuple

import numpy as np

from backend.core.errors import NotBlockLowerTriangular, SingularSystem
from backend.core.linalg import checked_solve
from backend.models import (
    FrameworkSolution,
    NetworkMatrix,
    ParameterKind,
    TerminationProblem,
    TerminationSet,
)
from backend.ris_service.netparams import convert, source_equivalents

__all__ = [
    "problem_from_network",
    "solve_general",
    "solve_unilateral",
    "residuals",
    "port_voltages",
]


def problem_from_network(net: NetworkMatrix, terms: TerminationSet, v_s) -> TerminationProblem:
    """Instantiate the system in the network's own parameter kind."""
    v_s = np.ravel(np.asarray(v_s, dtype=complex))
    i_s, b_s = source_equivalents(v_s, terms.z_t, terms.z0)

    if net.kind == ParameterKind.Z:
        a = convert(net, ParameterKind.Y).values
        return TerminationProblem(
            a=a, c1=v_s, a1=-terms.z_t,
            a2=terms.z_i if terms.ris_open else -terms.z_i,
            a3=-terms.z_r,
        )
    if net.kind == ParameterKind.Y:
        a = convert(net, ParameterKind.Z).values
        return TerminationProblem(a=a, c1=i_s, a1=-terms.y_t, a2=-terms.y_i, a3=-terms.y_r)
    return TerminationProblem(a=net.values, c1=b_s, a1=terms.gamma_t, a2=terms.theta, a3=terms.gamma_r)


def solve_general(p: TerminationProblem) -> FrameworkSolution:
    """x = (I - Abar A)^-1 c.

    An open-circuit A2 is imposed as y2 = 0, the limit of an infinite
    termination.
    """
    s1, s2, s3 = p.slices()
    n = p.a.shape[0]
    eye = np.eye(n)

    m1 = eye[s1] - p.a1 @ p.a[s1]
    m2 = p.a[s2] if p.a2_open else eye[s2] - p.a2 @ p.a[s2]
    m3 = eye[s3] - p.a3 @ p.a[s3]
    system = np.vstack([m1, m2, m3])
    rhs = np.concatenate([p.c1, np.zeros(n - p.c1.shape[0], dtype=complex)])

    x = checked_solve(system, rhs, "I - Abar A", SingularSystem)
    return FrameworkSolution(x1=x[s1], x2=x[s2], x3=x[s3], y=p.a @ x)


def solve_unilateral(p: TerminationProblem, tol: float = 1e-14) -> FrameworkSolution:
    """Cascade solution for block-lower-triangular A.

    x1 = (I - A1 A11)^-1 c1
    x2 = (A2^-1 - A22)^-1 A21 x1
    x3 = (A3^-1 - A33)^-1 (A31 x1 + A32 x2)
    """
    s1, s2, s3 = p.slices()
    a = p.a
    limit = tol * np.linalg.norm(a)
    for name, block in (("A12", a[s1, s2]), ("A13", a[s1, s3]), ("A23", a[s2, s3])):
        if block.size and np.linalg.norm(block) > limit:
            raise NotBlockLowerTriangular(f"{name} is not zero (norm {np.linalg.norm(block):.3e})")

    n1, n2, n3 = p.sizes
    x1 = checked_solve(np.eye(n1) - p.a1 @ a[s1, s1], p.c1, "I - A1 A11", SingularSystem)

    forward = a[s2, s1] @ x1
    if p.a2_open:
        x2 = checked_solve(-a[s2, s2], forward, "A22", SingularSystem)
    else:
        # (I - A2 A22)^-1 A2 equals (A2^-1 - A22)^-1 and stays defined for singular A2
        x2 = checked_solve(np.eye(n2) - p.a2 @ a[s2, s2], p.a2 @ forward, "I - A2 A22", SingularSystem)

    x3 = checked_solve(np.eye(n3) - p.a3 @ a[s3, s3], p.a3 @ (a[s3, s1] @ x1 + a[s3, s2] @ x2),
                       "I - A3 A33", SingularSystem)

    x = np.concatenate([x1, x2, x3])
    return FrameworkSolution(x1=x1, x2=x2, x3=x3, y=a @ x)


def residuals(p: TerminationProblem, sol: FrameworkSolution) -> Tuple[float, float, float, float]:
    """Norms of the four system equations evaluated at ``sol``."""
    s1, s2, s3 = p.slices()
    y = sol.y
    r_net = np.linalg.norm(y - p.a @ sol.x)
    r1 = np.linalg.norm(sol.x1 - p.c1 - p.a1 @ y[s1])
    r2 = np.linalg.norm(y[s2]) if p.a2_open else np.linalg.norm(sol.x2 - p.a2 @ y[s2])
    r3 = np.linalg.norm(sol.x3 - p.a3 @ y[s3])
    return float(r_net), float(r1), float(r2), float(r3)


def port_voltages(sol: FrameworkSolution, kind: ParameterKind) -> np.ndarray:
    """Port voltages: x for Z, y for Y, and a + b for S (voltage-wave convention)."""
    if kind == ParameterKind.Z:
        return sol.x
    if kind == ParameterKind.Y:
        return sol.y
    return sol.x + sol.y
