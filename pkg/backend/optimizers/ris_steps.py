"""
RIS updates for fixed precoder w and combiner g.

Every step maximizes the modulus of an effective scalar channel and returns a
configuration that is never worse than the one it was given:

    S:  |s_RT + s_RI Θ s_IT|
    Y:  |-y_RT + y_RI (jB + Y0 I)^-1 y_IT|
    Z:  |z_RT - z_RI (jX + Z_II)^-1 z_IT|
"""
from typing import Callable, List, Optional, Tuple

import numpy as np
from scipy.linalg import eigh, null_space, orth, polar

from backend.core.errors import SingularSystem
from backend.core.linalg import checked_solve
from backend.models import ArchitectureSpec, RISConfiguration

__all__ = [
    "inner_bound",
    "alignment_targets",
    "symmetric_unitary_map",
    "s_inner_step",
    "y_inner_step",
    "z_inner_step",
    "reactance_gradient",
]

GOLDEN = (np.sqrt(5) - 1) / 2

Target = Tuple[slice, np.ndarray, np.ndarray]


def inner_bound(s0: complex, a: np.ndarray, b: np.ndarray, spec: ArchitectureSpec) -> float:
    """|s0| + Σ_g ‖a_g‖ ‖b_g‖, the largest |s0 + a Θ b| any feasible Θ reaches."""
    a = np.ravel(a)
    b = np.ravel(b)
    return float(abs(s0) + sum(np.linalg.norm(a[sl]) * np.linalg.norm(b[sl]) for sl in spec.group_slices()))


def alignment_targets(s0: complex, a: np.ndarray, b: np.ndarray, spec: ArchitectureSpec) -> List[Target]:
    """Per group, the unit vectors (u, v) with Θ_g u = v co-phasing a_g Θ_g b_g with s0.

    Groups where a_g or b_g vanishes contribute nothing and are left out.
    """
    a = np.ravel(a)
    b = np.ravel(b)
    phase = np.exp(1j * np.angle(s0)) if s0 != 0 else 1.0
    targets = []
    for sl in spec.group_slices():
        na, nb = np.linalg.norm(a[sl]), np.linalg.norm(b[sl])
        if na == 0 or nb == 0:
            continue
        targets.append((sl, b[sl] / nb, phase * a[sl].conj() / na))
    return targets


def symmetric_unitary_map(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """A symmetric unitary Θ with Θ u = v for unit vectors u and v.

    On span{u, conj(v)} the map is the unitary polar factor of
    Qᵀ(v uᴴ + conj(u) vᵀ)Q; the orthogonal complement P is closed by conj(P) Pᴴ.
    """
    q = orth(np.column_stack([u, v.conj()]), rcond=1e-9)
    p = null_space(q.conj().T)
    m = q.T @ (np.outer(v, u.conj()) + np.outer(u.conj(), v)) @ q
    k = polar(m)[0]
    k = (k + k.T) / 2
    return q.conj() @ k @ q.conj().T + p.conj() @ p.conj().T


def _s_value(theta: np.ndarray, s0: complex, a: np.ndarray, b: np.ndarray) -> float:
    return float(abs(s0 + a @ theta @ b))


def s_inner_step(ris: RISConfiguration, s0: complex, a, b) -> RISConfiguration:
    """Globally optimal Θ for group/fully/single-connected architectures."""
    a = np.ravel(np.asarray(a, dtype=complex))
    b = np.ravel(np.asarray(b, dtype=complex))
    theta = np.array(ris.values)
    for sl, u, v in alignment_targets(s0, a, b, ris.architecture):
        theta[sl, sl] = symmetric_unitary_map(u, v)
    if _s_value(theta, s0, a, b) < _s_value(np.asarray(ris.values), s0, a, b):
        return ris
    return ris.replace(theta)


def _fit_real_symmetric(mask: np.ndarray, x: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Least-squares real symmetric M supported on ``mask`` with M x ≈ rhs."""
    n = mask.shape[0]
    rows, cols = np.nonzero(np.triu(mask))
    design = np.zeros((n, rows.size), dtype=complex)
    for k, (i, j) in enumerate(zip(rows, cols)):
        design[i, k] += x[j]
        if i != j:
            design[j, k] += x[i]
    stacked = np.vstack([design.real, design.imag])
    target = np.concatenate([rhs.real, rhs.imag])
    coef = np.linalg.lstsq(stacked, target, rcond=None)[0]
    m = np.zeros((n, n))
    m[rows, cols] = coef
    return m + np.triu(m, 1).T


def _stacked_targets(targets: List[Target], n: int) -> Tuple[np.ndarray, np.ndarray]:
    u = np.zeros(n, dtype=complex)
    v = np.zeros(n, dtype=complex)
    for sl, ug, vg in targets:
        u[sl] = ug
        v[sl] = vg
    return u, v


def _golden_section_max(fun: Callable[[float], float], lo: float, hi: float,
                        iterations: int = 40) -> Tuple[float, float]:
    c = hi - GOLDEN * (hi - lo)
    d = lo + GOLDEN * (hi - lo)
    fc, fd = fun(c), fun(d)
    for _ in range(iterations):
        if fc > fd:
            hi, d, fd = d, c, fc
            c = hi - GOLDEN * (hi - lo)
            fc = fun(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + GOLDEN * (hi - lo)
            fd = fun(d)
    return (c, fc) if fc > fd else (d, fd)


def _coordinate_ascent(m: np.ndarray, mask: np.ndarray, value: Callable[[np.ndarray], float],
                       unit: float, sweeps: int) -> np.ndarray:
    """Cyclic scalar maximization over the free entries of a real symmetric matrix."""
    rows, cols = np.nonzero(np.triu(mask))
    best = value(m)
    for _ in range(sweeps):
        start = best
        for i, j in zip(rows, cols):
            def along(x, i=i, j=j):
                trial = m.copy()
                trial[i, j] = trial[j, i] = x
                return value(trial)

            x0 = m[i, j]
            span = 2 * max(abs(x0), unit)
            for _widen in range(4):
                x, fx = _golden_section_max(along, x0 - span, x0 + span)
                if abs(abs(x - x0) - span) > 0.05 * span:
                    break
                span *= 4
            if fx > best:
                m[i, j] = m[j, i] = x
                best = fx
        if best - start <= 1e-12 * max(best, 1e-300):
            break
    return m


def _y_value(b_mat: np.ndarray, y_rt: complex, r: np.ndarray, t: np.ndarray, z0: float) -> float:
    m = 1j * b_mat + np.eye(b_mat.shape[0]) / z0
    return float(abs(-y_rt + r @ np.linalg.solve(m, t)))


def y_inner_step(ris: RISConfiguration, y_rt: complex, r, t, sweeps: int = 50) -> RISConfiguration:
    """Tree/forest-connected susceptance update.

    A least-squares fit of the tridiagonal B to the group alignment targets
    comes first; cyclic golden-section coordinate ascent refines it when the
    fit falls short of the inner bound.
    """
    spec = ris.architecture
    z0 = ris.z0
    r = np.ravel(np.asarray(r, dtype=complex))
    t = np.ravel(np.asarray(t, dtype=complex))
    mask = spec.susceptance_mask()

    def value(b_mat):
        return _y_value(b_mat, y_rt, r, t, z0)

    b_mat = np.array(ris.values.real)
    best = value(b_mat)

    s0 = -y_rt + z0 / 2 * (r @ t)
    a = z0 / 2 * r
    bound = inner_bound(s0, a, t, spec)
    targets = alignment_targets(s0, a, t, spec)
    if targets:
        u, v = _stacked_targets(targets, spec.n_i)
        candidate = _fit_real_symmetric(mask, u + v, -1j * (u - v)) / z0
        if value(candidate) > best:
            b_mat, best = candidate, value(candidate)

    if best < (1 - 1e-9) * bound:
        b_mat = _coordinate_ascent(b_mat, mask, value, 1.0 / z0, sweeps)
    return ris.replace(b_mat)


def _z_value(x_mat: np.ndarray, z_rt: complex, r: np.ndarray, t: np.ndarray, z_ii: np.ndarray) -> float:
    m = 1j * x_mat + z_ii
    try:
        return float(abs(z_rt - r @ checked_solve(m, t, "jX + Z_II", SingularSystem)))
    except SingularSystem:
        return -np.inf


def _whitened_candidate(spec: ArchitectureSpec, z_rt: complex, r: np.ndarray, t: np.ndarray,
                        z_ii: np.ndarray) -> Optional[np.ndarray]:
    """Per group, whiten by Re(Z_II,gg) and solve the resulting unitary alignment.

    Exact when Z_II has no coupling between groups; a starting point otherwise.
    """
    n = spec.n_i
    r_w = np.zeros(n, dtype=complex)
    t_w = np.zeros(n, dtype=complex)
    roots = []
    for sl in spec.group_slices():
        lam, vec = eigh(z_ii[sl, sl].real)
        if np.any(lam <= 0):
            return None
        half = (vec * np.sqrt(lam)) @ vec.T
        inv_half = (vec / np.sqrt(lam)) @ vec.T
        r_w[sl] = r[sl] @ inv_half
        t_w[sl] = inv_half @ t[sl]
        roots.append((sl, half))

    s0 = z_rt - (r_w @ t_w) / 2
    a = -r_w / 2
    targets = alignment_targets(s0, a, t_w, spec)
    if not targets:
        return None
    u, v = _stacked_targets(targets, n)
    x_tilde = _fit_real_symmetric(spec.block_mask(), u + v, -1j * (u - v))
    x_mat = np.zeros((n, n))
    for sl, half in roots:
        x_mat[sl, sl] = half @ x_tilde[sl, sl] @ half - z_ii[sl, sl].imag
    return (x_mat + x_mat.T) / 2


def _circle_sweep(x_mat: np.ndarray, z_rt: complex, r: np.ndarray, t: np.ndarray,
                  z_ii: np.ndarray, limit: float) -> np.ndarray:
    """Exact update of each diagonal reactance on its own.

    Moving X_nn by δ moves the objective along a circle through the current
    value; the farthest point from the origin is applied.
    """
    for n in range(x_mat.shape[0]):
        m_inv = np.linalg.inv(1j * x_mat + z_ii)
        p = r @ m_inv
        q = m_inv @ t
        f0 = z_rt - p @ t
        c = m_inv[n, n]
        k = p[n] * q[n]
        if abs(c.real) < 1e-15 or k == 0:
            continue
        center = f0 + k / (2 * c.real)
        radius = abs(k) / (2 * abs(c.real))
        direction = np.exp(1j * np.angle(center)) if center != 0 else 1.0
        w = (center + radius * direction - f0) / k
        if w == 0:
            continue
        # 1/w runs along the line Re = Re c; its offset from c is -1/δ
        tau = (1 / w).imag - c.imag
        if abs(tau) > 1 / limit:
            delta = -1 / tau
        else:
            delta = -limit * np.sign(tau) if tau else limit
        trial = x_mat.copy()
        trial[n, n] += delta
        if _z_value(trial, z_rt, r, t, z_ii) > _z_value(x_mat, z_rt, r, t, z_ii):
            x_mat = trial
    return x_mat


def reactance_gradient(x_mat: np.ndarray, z_rt: complex, r, t, z_ii: np.ndarray,
                       mask: np.ndarray) -> np.ndarray:
    """∂|f|²/∂X_nm for each free entry of symmetric X; the result is exactly symmetric."""
    r = np.ravel(np.asarray(r, dtype=complex))
    t = np.ravel(np.asarray(t, dtype=complex))
    m = 1j * x_mat + z_ii
    p = np.linalg.solve(m.T, r)
    q = np.linalg.solve(m, t)
    f = z_rt - p @ t
    df = 1j * (np.outer(p, q) + np.outer(q, p))
    np.fill_diagonal(df, 1j * p * q)
    grad = 2 * (np.conj(f) * df).real
    grad = (grad + grad.T) / 2
    return np.where(mask, grad, 0.0)


def _gradient_ascent(x_mat: np.ndarray, z_rt: complex, r: np.ndarray, t: np.ndarray,
                     z_ii: np.ndarray, mask: np.ndarray, scale: float, iterations: int,
                     rtol: float = 1e-10) -> np.ndarray:
    """Backtracking (Armijo) ascent on |f|² over symmetric X.

    Stops once a step of size ``scale`` along the gradient cannot change |f|²
    by more than ``rtol`` relative; singular trial points count as rejected.
    """
    def objective(x):
        return _z_value(x, z_rt, r, t, z_ii) ** 2

    x_mat = (x_mat + x_mat.T) / 2
    current = objective(x_mat)
    max_step = 64 * scale
    step = scale
    for _ in range(iterations):
        grad = reactance_gradient(x_mat, z_rt, r, t, z_ii, mask)
        norm = np.linalg.norm(grad)
        if norm * scale <= rtol * max(current, np.finfo(float).tiny):
            break
        direction = grad / norm
        accepted = False
        for _halving in range(40):
            trial = x_mat + step * direction
            trial = (trial + trial.T) / 2
            value = objective(trial)
            if value >= current + 1e-4 * step * norm:
                x_mat, current, accepted = trial, value, True
                break
            step /= 2
        if not accepted:
            break
        step = min(2 * step, max_step)
    return x_mat


def z_inner_step(ris: RISConfiguration, z_rt: complex, r, t, z_ii: np.ndarray,
                 iterations: int = 50) -> RISConfiguration:
    """Reactance update for single/group/fully-connected RIS under mutual coupling."""
    spec = ris.architecture
    z0 = ris.z0
    r = np.ravel(np.asarray(r, dtype=complex))
    t = np.ravel(np.asarray(t, dtype=complex))
    z_ii = np.asarray(z_ii, dtype=complex)
    mask = spec.block_mask()

    x_mat = np.array(ris.values.real)
    start = _z_value(x_mat, z_rt, r, t, z_ii)

    candidate = _whitened_candidate(spec, z_rt, r, t, z_ii)
    if candidate is not None and _z_value(candidate, z_rt, r, t, z_ii) > start:
        x_mat = candidate

    x_mat = _circle_sweep(x_mat, z_rt, r, t, z_ii, limit=1e4 * z0)
    x_mat = _gradient_ascent(x_mat, z_rt, r, t, z_ii, mask, scale=z0, iterations=iterations)

    if _z_value(x_mat, z_rt, r, t, z_ii) <= start:
        return ris
    return ris.replace(x_mat)
