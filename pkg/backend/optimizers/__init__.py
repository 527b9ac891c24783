"""
RISNet Optimizers Package
Alternating maximization of received power over precoder, combiner and RIS
"""
from .beamforming import update_beamformers
from .ris_steps import inner_bound, s_inner_step, y_inner_step, z_inner_step
from .alternating import (
    RISOptimizer,
    SParameterOptimizer,
    YParameterOptimizer,
    ZParameterOptimizer,
    received_power,
    optimize_s_group,
    optimize_y_forest,
    optimize_z_group_mc
)

__all__ = [
    "update_beamformers",
    "inner_bound",
    "s_inner_step",
    "y_inner_step",
    "z_inner_step",
    "RISOptimizer",
    "SParameterOptimizer",
    "YParameterOptimizer",
    "ZParameterOptimizer",
    "received_power",
    "optimize_s_group",
    "optimize_y_forest",
    "optimize_z_group_mc"
]
