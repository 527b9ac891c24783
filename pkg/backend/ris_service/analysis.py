"""
Structural scattering in a SISO link.

The exact model keeps the Θ-independent term -h_RI h_IT that the widely used
model h' = h_RI Θ h_IT drops.
"""
from concurrent.futures import ThreadPoolExecutor
from typing import Literal, Optional, Tuple

import numpy as np

from backend.models import MonteCarloPowers, SISOInstance

__all__ = [
    "siso_exact",
    "siso_approx",
    "max_power_exact",
    "max_power_approx",
    "los_expected_power",
    "los_delta",
    "draw_instance",
    "monte_carlo_powers",
]

ChannelLaw = Literal["los_random_phase", "rayleigh"]


def _terms(inst: SISOInstance) -> np.ndarray:
    return inst.h_ri * inst.h_it


def siso_exact(inst: SISOInstance, theta) -> complex:
    theta = np.ravel(np.asarray(theta, dtype=float))
    terms = _terms(inst)
    return complex(-terms.sum() + np.sum(np.exp(1j * theta) * terms))


def siso_approx(inst: SISOInstance, theta) -> complex:
    theta = np.ravel(np.asarray(theta, dtype=float))
    return complex(np.sum(np.exp(1j * theta) * _terms(inst)))


def max_power_exact(inst: SISOInstance) -> Tuple[float, np.ndarray]:
    """P_R = P_T (|h_RI h_IT| + Σ|h_n|)², realized by co-phasing with -h_RI h_IT."""
    terms = _terms(inst)
    structural = -terms.sum()
    anchor = np.angle(structural) if structural != 0 else 0.0
    theta = np.mod(anchor - np.angle(terms), 2 * np.pi)
    power = inst.p_t * (np.abs(structural) + np.abs(terms).sum()) ** 2
    return float(power), theta


def max_power_approx(inst: SISOInstance) -> Tuple[float, np.ndarray]:
    terms = _terms(inst)
    theta = np.mod(-np.angle(terms), 2 * np.pi)
    return float(inst.p_t * np.abs(terms).sum() ** 2), theta


def los_expected_power(n_i: int) -> float:
    """E[P_R] = N² + sqrt(πN) N + N for unit-modulus random-phase channels."""
    if n_i < 1:
        raise ValueError("n_i must be at least 1")
    return float(n_i**2 + np.sqrt(np.pi * n_i) * n_i + n_i)


def los_delta(n_i: int) -> float:
    if n_i < 1:
        raise ValueError("n_i must be at least 1")
    root = np.sqrt(np.pi * n_i)
    return float((root + 1) / (n_i + root + 1))


def draw_instance(n_i: int, rng: np.random.Generator, model: ChannelLaw = "los_random_phase",
                  p_t: float = 1.0) -> SISOInstance:
    if model == "los_random_phase":
        h_ri = np.exp(1j * rng.uniform(0.0, 2 * np.pi, n_i))
        h_it = np.exp(1j * rng.uniform(0.0, 2 * np.pi, n_i))
    elif model == "rayleigh":
        h_ri = (rng.standard_normal(n_i) + 1j * rng.standard_normal(n_i)) / np.sqrt(2)
        h_it = (rng.standard_normal(n_i) + 1j * rng.standard_normal(n_i)) / np.sqrt(2)
    else:
        raise ValueError(f"unknown channel model {model!r}")
    return SISOInstance(h_ri=h_ri, h_it=h_it, p_t=p_t)


def _trial(n_i: int, seed: int, trial: int, model: ChannelLaw) -> Tuple[float, float]:
    rng = np.random.default_rng([seed, trial])
    inst = draw_instance(n_i, rng, model)
    return max_power_exact(inst)[0], max_power_approx(inst)[0]


def _standard_error(x: np.ndarray) -> float:
    return float(x.std(ddof=1) / np.sqrt(x.size)) if x.size > 1 else 0.0


def monte_carlo_powers(n_i: int, trials: int, seed: int, model: ChannelLaw = "los_random_phase",
                       workers: Optional[int] = None) -> MonteCarloPowers:
    """Mean optimal powers of both models over seeded trials.

    Trial t draws from ``default_rng([seed, t])``, so the result does not
    depend on ``workers``.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")

    def run(t: int) -> Tuple[float, float]:
        return _trial(n_i, seed, t, model)

    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            pairs = list(executor.map(run, range(trials)))
    else:
        pairs = [run(t) for t in range(trials)]

    powers = np.array(pairs)
    return MonteCarloPowers(
        n_i=n_i,
        trials=trials,
        mean_pr=float(powers[:, 0].mean()),
        mean_prp=float(powers[:, 1].mean()),
        se_pr=_standard_error(powers[:, 0]),
        se_prp=_standard_error(powers[:, 1]),
    )
