"""
Rayleigh MIMO scenarios for the optimization sweeps.

S_RI and S_IT are drawn with per-entry variance L_RI and L_IT. The direct link
is completely obstructed (Z_RT = 0), so S_RT = -S_RI S_IT, and every
formulation sees the same realization.
"""
from typing import List, Optional

import numpy as np

from backend.api.config import settings
from backend.core.errors import InvalidGeometry
from backend.models import (
    ArrayGeometry,
    ChannelBlocks,
    MIMOScenario,
    ParameterKind,
    ScenarioConfig,
    ScenarioSet,
)
from backend.ris_service.channel import map_matched
from backend.ris_service.coupling import ris_coupling_matrix


def pathloss(d: float, l0_db: float, alpha: float) -> float:
    """Linear gain L0 d^-α with L0 given in dB."""
    if d <= 0:
        raise InvalidGeometry(f"distance must be positive, got {d}")
    return float(10 ** (l0_db / 10) * d ** (-alpha))


def derive_seed(*entropy: int) -> int:
    """Independent substream seed from a tuple of nonnegative integers."""
    return int(np.random.SeedSequence(list(entropy)).generate_state(1)[0])


def channel_seed(master: int, n_i: int, trial: int) -> int:
    return derive_seed(master, n_i, trial)


def solver_seed(master: int, n_i: int, arch_index: int, trial: int) -> int:
    return derive_seed(master, n_i, arch_index, trial)


def _complex_gaussian(rng: np.random.Generator, shape, variance: float) -> np.ndarray:
    return np.sqrt(variance / 2) * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def coupling_for(cfg: ScenarioConfig, n_i: int, z0: float) -> np.ndarray:
    geom = ArrayGeometry.from_wavelengths(n_i, cfg.spacing_wl, cfg.length_wl, cfg.frequency)
    return ris_coupling_matrix(geom, z0)


def synthesize_scenario(cfg: ScenarioConfig, trial_seed: int, n_i: Optional[int] = None,
                        z0: Optional[float] = None) -> ScenarioSet:
    n_i = cfg.n_i_list[0] if n_i is None else n_i
    z0 = settings.z0 if z0 is None else z0
    rng = np.random.default_rng(trial_seed)

    l_ri = pathloss(cfg.d_ri, cfg.l0_db, cfg.alpha_ri)
    l_it = pathloss(cfg.d_it, cfg.l0_db, cfg.alpha_it)
    s_ri = _complex_gaussian(rng, (cfg.n_r, n_i), l_ri)
    s_it = _complex_gaussian(rng, (n_i, cfg.n_t), l_it)

    z_blocks = ChannelBlocks(kind=ParameterKind.Z, rt=np.zeros((cfg.n_r, cfg.n_t)),
                             ri=2 * z0 * s_ri, it=2 * z0 * s_it, z0=z0)
    mapped = map_matched(z_blocks)
    if cfg.coupling:
        z_blocks = ChannelBlocks(kind=ParameterKind.Z, rt=z_blocks.rt, ri=z_blocks.ri, it=z_blocks.it,
                                 ii=coupling_for(cfg, n_i, z0), z0=z0)

    return ScenarioSet(
        seed=trial_seed,
        z=MIMOScenario(blocks=z_blocks, p_t=cfg.p_t),
        y=MIMOScenario(blocks=mapped.y, p_t=cfg.p_t),
        s=MIMOScenario(blocks=mapped.s, p_t=cfg.p_t),
    )


def parse_ni_list(text: str) -> List[int]:
    return [int(part) for part in text.split(",") if part.strip()]
